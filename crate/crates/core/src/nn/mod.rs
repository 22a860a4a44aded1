//! Small reverse-mode differentiation engine with dense layers, losses and Adam.

pub mod ball;
pub mod gradcheck;
pub mod layers;
pub mod loss;
pub mod optim;
pub mod tape;

pub use layers::{Activation, DenseLayer, ParameterSet};
pub use optim::{AdamConfig, AdamState};
pub use tape::{Gradients, Tape, Var};
