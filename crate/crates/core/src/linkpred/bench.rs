use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::auroc::auroc;
use super::scorer::{DirectionScorer, EdgeFeature};
use super::split::{split_edges, EvalPair, SplitRatios};
use crate::dsae::{compute_features, train, DsaeConfig, Standardizer};
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

/// One row of a benchmark grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub name: String,
    /// Score standardized scattering features directly, without the autoencoder.
    #[serde(default)]
    pub no_ae: bool,
    #[serde(default)]
    pub dsae: DsaeConfig,
    #[serde(default)]
    pub recipe: EdgeFeature,
}

impl BenchConfig {
    pub fn geometry_label(&self) -> String {
        if self.no_ae {
            "none".into()
        } else {
            self.dsae.geometry.to_string()
        }
    }
}

/// `q ∈ {0, 0.1, 0.2}` × `J ∈ {5, 10, 15}` on top of `base`, followed by a
/// no-autoencoder row at the charge and scale of `base`.
pub fn ablation_grid(base: &DsaeConfig) -> Vec<BenchConfig> {
    let mut grid = Vec::new();
    for q in [0.0, 0.1, 0.2] {
        for j in [5, 10, 15] {
            grid.push(BenchConfig {
                name: format!("q={q} J={j}"),
                no_ae: false,
                dsae: DsaeConfig {
                    q,
                    max_scale: j,
                    ..base.clone()
                },
                recipe: EdgeFeature::Concat,
            });
        }
    }
    grid.push(BenchConfig {
        name: "no AE".into(),
        no_ae: true,
        dsae: base.clone(),
        recipe: EdgeFeature::Concat,
    });
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: String,
    pub q: f64,
    #[serde(rename = "J")]
    pub max_scale: usize,
    pub geometry: String,
    pub run: usize,
    pub auroc: f64,
    pub val_auroc: f64,
}

fn pair_auroc(scorer: &DirectionScorer, z: &Array2<f64>, pairs: &[EvalPair]) -> Result<f64> {
    let scores = scorer.score_pairs(&z.view(), pairs);
    let labels: Vec<bool> = pairs.iter().map(|p| p.label).collect();
    auroc(&scores, &labels)
}

/// One benchmark cell: fresh split with seed `seed_base + run`, model
/// trained on the training graph only, AUROC on the held-out pairs.
pub fn benchmark_run(
    g: &DirectedGraph,
    cfg: &BenchConfig,
    ratios: SplitRatios,
    run: usize,
    seed_base: u64,
) -> Result<RunResult> {
    let seed = seed_base + run as u64;
    let split = split_edges(g, ratios, seed)?;
    let dsae = DsaeConfig {
        seed,
        ..cfg.dsae.clone()
    };
    let z = if cfg.no_ae {
        dsae.validate()?;
        let f = compute_features(&split.train_graph, &dsae)?;
        Standardizer::fit(&f.matrix.view())?.apply(&f.matrix.view())?
    } else {
        train(&split.train_graph, &dsae, None)?.embeddings.tangent()
    };
    let scorer = DirectionScorer::fit(&z.view(), &split.train_graph, cfg.recipe)?;
    let auroc = pair_auroc(&scorer, &z, &split.test_pairs)?;
    let val_auroc = if split.val_pairs.is_empty() {
        f64::NAN
    } else {
        pair_auroc(&scorer, &z, &split.val_pairs)?
    };
    Ok(RunResult {
        config: cfg.name.clone(),
        q: cfg.dsae.q,
        max_scale: cfg.dsae.max_scale,
        geometry: cfg.geometry_label(),
        run,
        auroc,
        val_auroc,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub config: String,
    pub q: f64,
    #[serde(rename = "J")]
    pub max_scale: usize,
    pub geometry: String,
    pub runs: usize,
    pub mean_auroc: f64,
    /// Sample standard deviation (0 for a single run).
    pub std_auroc: f64,
    pub mean_val_auroc: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Mean and standard deviation per config, in grid order.
pub fn summarize(grid: &[BenchConfig], results: &[RunResult]) -> Vec<ConfigSummary> {
    grid.iter()
        .filter_map(|cfg| {
            let rows: Vec<&RunResult> = results.iter().filter(|r| r.config == cfg.name).collect();
            if rows.is_empty() {
                return None;
            }
            let (mean, std) = mean_std(&rows.iter().map(|r| r.auroc).collect::<Vec<_>>());
            let (val, _) = mean_std(&rows.iter().map(|r| r.val_auroc).collect::<Vec<_>>());
            Some(ConfigSummary {
                config: cfg.name.clone(),
                q: cfg.dsae.q,
                max_scale: cfg.dsae.max_scale,
                geometry: cfg.geometry_label(),
                runs: rows.len(),
                mean_auroc: mean,
                std_auroc: std,
                mean_val_auroc: val,
            })
        })
        .collect()
}

pub fn validate_grid(grid: &[BenchConfig], n_runs: usize) -> Result<()> {
    if n_runs == 0 {
        return Err(Error::Config("runs must be >= 1".into()));
    }
    if grid.is_empty() {
        return Err(Error::Config("benchmark grid is empty".into()));
    }
    for (i, cfg) in grid.iter().enumerate() {
        if grid[..i].iter().any(|c| c.name == cfg.name) {
            return Err(Error::Config(format!("duplicate grid config name `{}`", cfg.name)));
        }
        cfg.dsae.validate()?;
    }
    Ok(())
}

/// Runs every config of `grid` `n_runs` times, sequentially.
pub fn run_benchmark(
    g: &DirectedGraph,
    grid: &[BenchConfig],
    ratios: SplitRatios,
    n_runs: usize,
    seed_base: u64,
) -> Result<Vec<RunResult>> {
    validate_grid(grid, n_runs)?;
    let mut out = Vec::with_capacity(grid.len() * n_runs);
    for cfg in grid {
        for run in 0..n_runs {
            out.push(benchmark_run(g, cfg, ratios, run, seed_base)?);
        }
    }
    Ok(out)
}

/// CSV `config,q,J,geometry,run,auroc`.
pub fn write_results_csv<W: Write>(out: &mut W, rows: &[RunResult]) -> Result<()> {
    writeln!(out, "config,q,J,geometry,run,auroc")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{},{}", r.config, r.q, r.max_scale, r.geometry, r.run, r.auroc)?;
    }
    Ok(())
}

pub fn save_results_csv(path: &Path, rows: &[RunResult]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_results_csv(&mut out, rows)?;
    out.flush()?;
    Ok(())
}
