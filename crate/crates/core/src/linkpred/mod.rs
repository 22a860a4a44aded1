//! Link-direction prediction: edge splits, orientation scorer, AUROC and the
//! benchmark grid.

mod auroc;
mod bench;
mod scorer;
mod split;

pub use auroc::{auroc, midranks};
pub use bench::{
    ablation_grid, benchmark_run, run_benchmark, save_results_csv, summarize, validate_grid, write_results_csv,
    BenchConfig, ConfigSummary, RunResult,
};
pub use scorer::{fit_logistic, DirectionScorer, EdgeFeature, SCORER_L2, SCORER_MAX_ITER, SCORER_TOL};
pub use split::{split_edges, EdgeSplit, EvalPair, SplitRatios};
