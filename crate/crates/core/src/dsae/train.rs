use std::io::Write;
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::DsaeConfig;
use super::model::{embed, property_loss, EmbeddingModel, NodeEmbeddings, PropertyTargets, Standardizer};
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::nn::loss::mse;
use crate::nn::{AdamConfig, AdamState, Tape};
use crate::scattering::{build_frame, gaussian_signal, scatter, ScatteringFeatures};
use crate::spectral::magnetic_laplacian;

pub const INTRACELLULAR: &str = "intracellular";
pub const INTERCELLULAR: &str = "intercellular";

/// Scattering features of `g` under `cfg` (charge, scales, signal count and
/// signal seed).
pub fn compute_features(g: &DirectedGraph, cfg: &DsaeConfig) -> Result<ScatteringFeatures> {
    let lap = magnetic_laplacian(g, cfg.q, cfg.normalized_laplacian)?;
    let frame = build_frame(lap.decompose()?, cfg.max_scale);
    let signals = gaussian_signal(g.n_vertices(), cfg.signals, cfg.seed)?;
    scatter(&frame, &signals.view())
}

/// Class labels for the two property heads, one entry per vertex.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeLabels {
    pub intracellular: Option<Vec<usize>>,
    pub intercellular: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub total: f64,
    pub recon: f64,
    pub intracellular: f64,
    pub intercellular: f64,
    pub val_recon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_recon: f64,
    pub stopped_early: bool,
    pub train_nodes: usize,
    pub val_nodes: usize,
}

impl TrainingLog {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "epoch,total,recon,intracellular,intercellular,val_recon")?;
        for r in &self.epochs {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.epoch, r.total, r.recon, r.intracellular, r.intercellular, r.val_recon
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: EmbeddingModel,
    pub embeddings: NodeEmbeddings,
    pub features: ScatteringFeatures,
    pub log: TrainingLog,
}

/// Computes scattering features of `g` and trains an autoencoder on them.
pub fn train(g: &DirectedGraph, cfg: &DsaeConfig, labels: Option<&NodeLabels>) -> Result<TrainOutput> {
    cfg.validate()?;
    if !g.is_weakly_connected() {
        return Err(Error::InvalidArgument(
            "graph is not connected; restrict it to its largest component first".into(),
        ));
    }
    let features = compute_features(g, cfg)?;
    let mut out = train_on_features(features, cfg, labels)?;
    let names = (0..g.n_vertices()).map(|v| g.vertex_label(v)).collect();
    out.embeddings = out.embeddings.with_names(names)?;
    Ok(out)
}

fn check_labels(cfg: &DsaeConfig, labels: Option<&NodeLabels>, n: usize) -> Result<(Vec<&'static str>, Vec<PropertyTargets>)> {
    let mut names = Vec::new();
    let mut targets = Vec::new();
    let wanted = [
        (INTRACELLULAR, cfg.beta, labels.and_then(|l| l.intracellular.as_ref())),
        (INTERCELLULAR, cfg.gamma, labels.and_then(|l| l.intercellular.as_ref())),
    ];
    for (name, weight, lab) in wanted {
        if weight == 0.0 {
            continue;
        }
        let lab = lab.ok_or_else(|| {
            Error::Config(format!("{name} loss weight is {weight} but no {name} labels were given"))
        })?;
        if lab.len() != n {
            return Err(Error::Dimension(format!("{} {name} labels for {n} vertices", lab.len())));
        }
        names.push(name);
        targets.push(PropertyTargets::Classes(lab.clone()));
    }
    Ok((names, targets))
}

/// Full-batch training on precomputed features. Features are z-scored per
/// column, a random node subset of size `val_fraction·N` is held out for
/// early stopping on reconstruction loss, and the parameters of the best
/// validation epoch are restored.
pub fn train_on_features(
    features: ScatteringFeatures,
    cfg: &DsaeConfig,
    labels: Option<&NodeLabels>,
) -> Result<TrainOutput> {
    cfg.validate()?;
    let n = features.n_vertices();
    if n < 2 {
        return Err(Error::InvalidArgument("training needs at least 2 vertices".into()));
    }
    let (head_names, targets) = check_labels(cfg, labels, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let standardizer = Standardizer::fit(&features.matrix.view())?;
    let x_all = standardizer.apply(&features.matrix.view())?;
    let mut model = EmbeddingModel::init(cfg, standardizer, &head_names, &mut rng)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_val = ((n as f64) * cfg.val_fraction).round() as usize;
    let n_val = n_val.min(n - 1);
    let (val_idx, train_idx) = order.split_at(n_val);
    let mut train_idx = train_idx.to_vec();
    let mut val_idx = val_idx.to_vec();
    train_idx.sort_unstable();
    val_idx.sort_unstable();
    let x_train = x_all.select(Axis(0), &train_idx);
    let x_val = if val_idx.is_empty() {
        x_train.clone()
    } else {
        x_all.select(Axis(0), &val_idx)
    };
    // (head index, training-row targets, loss weight)
    let heads: Vec<(usize, PropertyTargets, f64)> = head_names
        .iter()
        .zip(&targets)
        .map(|(name, tgt)| {
            let idx = model.heads.iter().position(|h| h.name == *name).expect("head created");
            let weight = if *name == INTRACELLULAR { cfg.beta } else { cfg.gamma };
            (idx, tgt.select(&train_idx), weight)
        })
        .collect();

    let mut opt = AdamState::new(
        &model.params,
        AdamConfig {
            lr: cfg.learning_rate,
            weight_decay: cfg.weight_decay,
            ..Default::default()
        },
    );

    let mut log = TrainingLog {
        epochs: Vec::new(),
        best_epoch: 0,
        best_val_recon: f64::INFINITY,
        stopped_early: false,
        train_nodes: train_idx.len(),
        val_nodes: val_idx.len(),
    };
    let mut best_params = model.params.clone();
    let keep = 1.0 - cfg.dropout;

    for epoch in 1..=cfg.epochs {
        let mut t = Tape::new();
        let vars = model.params.leaves(&mut t);
        let x = t.leaf(x_train.clone());
        let mut draw = |rows: usize, cols: usize| {
            Array2::from_shape_simple_fn((rows, cols), || if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
        };
        let use_dropout = cfg.dropout > 0.0;
        let z = if use_dropout {
            model.encode(&mut t, &vars, x, Some(&mut draw))?
        } else {
            model.encode(&mut t, &vars, x, None)?
        };
        let recon = if use_dropout {
            model.decode(&mut t, &vars, z, Some(&mut draw))?
        } else {
            model.decode(&mut t, &vars, z, None)?
        };
        let l_recon = mse(&mut t, recon, x);
        let mut total = t.scale(l_recon, cfg.alpha);
        let mut head_values = [0.0; 2];
        for (idx, tgt, weight) in &heads {
            let head = &model.heads[*idx];
            let input = model.head_input(&mut t, z);
            let l = property_loss(&mut t, &vars, &head.layers, input, tgt, head.kind, cfg.temperature)?;
            head_values[usize::from(head.name == INTERCELLULAR)] = t.scalar(l);
            let wl = t.scale(l, *weight);
            total = t.add(total, wl);
        }

        let total_value = t.scalar(total);
        if !total_value.is_finite() {
            return Err(Error::Diverged(epoch));
        }
        let grads = t.backward(total);
        let grads: Vec<Array2<f64>> = vars.iter().map(|&v| grads.wrt(v)).collect();
        opt.step(&mut model.params, &grads)?;

        let val_recon = eval_recon(&model, &x_val)?;
        if !val_recon.is_finite() {
            return Err(Error::Diverged(epoch));
        }
        log.epochs.push(EpochRecord {
            epoch,
            total: total_value,
            recon: t.scalar(l_recon),
            intracellular: head_values[0],
            intercellular: head_values[1],
            val_recon,
        });
        if val_recon < log.best_val_recon {
            log.best_val_recon = val_recon;
            log.best_epoch = epoch;
            best_params = model.params.clone();
        } else if epoch - log.best_epoch >= cfg.patience {
            log.stopped_early = epoch < cfg.epochs;
            break;
        }
    }
    model.params = best_params;
    let embeddings = embed(&model, &features)?;
    Ok(TrainOutput {
        model,
        embeddings,
        features,
        log,
    })
}

fn eval_recon(model: &EmbeddingModel, x: &Array2<f64>) -> Result<f64> {
    let mut t = Tape::new();
    let vars = model.params.leaves(&mut t);
    let xv = t.leaf(x.clone());
    let z = model.encode(&mut t, &vars, xv, None)?;
    let r = model.decode(&mut t, &vars, z, None)?;
    let l = mse(&mut t, r, xv);
    Ok(t.scalar(l))
}
