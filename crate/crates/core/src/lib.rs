// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dsae;
pub mod error;
pub mod graph;
pub mod hyperbolic;
pub mod inference;
pub mod linkpred;
pub mod nn;
pub mod scattering;
pub mod spectral;

pub use dsae::{DsaeConfig, EmbeddingModel, Geometry, NodeEmbeddings};
pub use error::{Error, Result};
pub use graph::{DirectedGraph, Edge, GraphStats};
pub use scattering::{ScatteringFeatures, WaveletFrame};
pub use spectral::{MagneticLaplacian, SpectralDecomposition};
