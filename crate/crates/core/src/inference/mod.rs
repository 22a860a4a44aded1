//! Cell-type marker selection, intercellular network inference and spatial
//! validation.

mod expression;
pub mod fixture;
mod markers;
mod network;
mod spatial;
mod stats;

pub use expression::{load_annotation_csv, parse_annotation_csv, CellAnnotations, ExpressionMatrix};
pub use markers::{select_marker_genes, GeneTest, MarkerSets, LFC_PSEUDOCOUNT};
pub use network::{
    build_celltype_graph, infer_network, inference_defaults, knn_union_pairs, orient_knn_edges, CellTypeGraph,
    InferenceOutput, InferredEdge, InferredNetwork, Provenance, DEFAULT_K,
};
pub use spatial::{fov_sizes, validate_spatial, KsResult, SpatialOptions, SpatialReport};
pub use stats::{ks_test_one_sided, mutual_information, wilcoxon_rank_sum};
