//! Scattering autoencoder: feature extraction, model and training loop.

mod config;
mod model;
mod train;

pub use config::{DsaeConfig, Geometry};
pub use model::{
    embed, property_loss, EmbeddingModel, NodeEmbeddings, PropertyHead, PropertyKind, PropertyTargets,
    Standardizer,
};
pub use train::{
    compute_features, train, train_on_features, EpochRecord, NodeLabels, TrainOutput, TrainingLog, INTERCELLULAR,
    INTRACELLULAR,
};
