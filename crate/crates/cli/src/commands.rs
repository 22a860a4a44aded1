use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use dsae_core::dsae::train;
use dsae_core::graph::{load_edge_list, EdgeFormat, HeaderMode};
use dsae_core::inference::{
    build_celltype_graph, infer_network, inference_defaults, load_annotation_csv, select_marker_genes,
    validate_spatial, CellAnnotations, ExpressionMatrix, InferredNetwork, Provenance,
};
use dsae_core::linkpred::{
    ablation_grid, benchmark_run, save_results_csv, summarize, validate_grid, BenchConfig, EdgeFeature,
};
use dsae_core::{DirectedGraph, DsaeConfig, GraphStats};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::{Cli, Command, InferArgs};

/// A failed command: bad input or configuration (exit 2) or a failure
/// while computing (exit 1).
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Runtime(e) => e,
        }
    }

    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

trait Classify<T> {
    fn usage(self) -> Outcome<T>;
    fn runtime(self) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for std::result::Result<T, E> {
    fn usage(self) -> Outcome<T> {
        self.map_err(|e| Failure::Usage(e.into()))
    }

    fn runtime(self) -> Outcome<T> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

/// Configuration errors from the core library are usage errors; everything
/// else happened while computing.
fn core<T>(r: dsae_core::Result<T>) -> Outcome<T> {
    r.map_err(|e| match e {
        dsae_core::Error::Config(_) => Failure::Usage(e.into()),
        _ => Failure::Runtime(e.into()),
    })
}

fn usage_err(msg: String) -> Failure {
    Failure::Usage(anyhow!(msg))
}

fn require_file(path: &Path) -> Outcome {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage_err(format!("no such file: {}", path.display())))
    }
}

fn load_graph(path: &Path) -> Outcome<DirectedGraph> {
    require_file(path)?;
    let (g, report) = load_edge_list(path, EdgeFormat::from_path(path), true, HeaderMode::Auto).usage()?;
    log::info!(
        "{}: {} vertices, {} edges ({} self-loops dropped, {} duplicates merged)",
        path.display(),
        g.n_vertices(),
        g.n_edges(),
        report.self_loops_dropped,
        report.duplicates_merged
    );
    Ok(g)
}

fn largest_component(g: DirectedGraph) -> DirectedGraph {
    if g.is_weakly_connected() {
        return g;
    }
    let lcc = g.largest_connected_component().graph;
    log::warn!(
        "graph is not connected; using its largest component ({} of {} vertices)",
        lcc.n_vertices(),
        g.n_vertices()
    );
    lcc
}

fn out_dir(cli_out: &Option<PathBuf>) -> Outcome<PathBuf> {
    let dir = cli_out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).runtime()?;
    Ok(dir)
}

fn write_json(path: &Path, value: &Value) -> Outcome {
    let text = serde_json::to_string_pretty(value).runtime()?;
    std::fs::write(path, text + "\n").runtime()
}

struct Context {
    cfg: RunConfig,
    seed: u64,
    out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Outcome {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(usage_err("--jobs must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().runtime()?;
    }
    if let Some(path) = &cli.config {
        require_file(path)?;
    }
    let cfg = RunConfig::load(cli.config.as_deref()).usage()?;
    let seed = cli
        .seed
        .or(cfg.seed)
        .or_else(|| cfg.dsae.get("seed").and_then(Value::as_u64))
        .unwrap_or(0);
    let ctx = Context { cfg, seed, out: cli.out };
    match cli.command {
        Command::Stats { graph, lcc } => stats(&ctx, &graph, lcc),
        Command::Embed { graph, check } => embed(&ctx, &graph, check),
        Command::Linkpred {
            graph,
            runs,
            grid,
            ablation,
        } => linkpred(&ctx, &graph, runs, grid.as_deref(), ablation),
        Command::Infer(args) => infer(&ctx, &args),
        Command::ValidateSpatial {
            network,
            spatial,
            spatial_labels,
        } => validate(&ctx, &network, &spatial, &spatial_labels),
    }
}

fn stats(ctx: &Context, path: &Path, lcc: bool) -> Outcome {
    let mut g = load_graph(path)?;
    if lcc {
        g = g.largest_connected_component().graph;
    }
    let stats = core(GraphStats::compute(&g))?;
    let mut doc = json!({
        "command": "stats",
        "input": path,
        "largest_component": lcc,
    });
    let fields = serde_json::to_value(stats).runtime()?;
    doc.as_object_mut().unwrap().extend(fields.as_object().unwrap().clone());
    match &ctx.out {
        Some(_) => {
            let dir = out_dir(&ctx.out)?;
            write_json(&dir.join("stats.json"), &doc)
        }
        None => {
            println!("{}", serde_json::to_string_pretty(&doc).runtime()?);
            Ok(())
        }
    }
}

fn embed(ctx: &Context, path: &Path, check: bool) -> Outcome {
    let dsae = ctx.cfg.resolve_dsae(DsaeConfig::default(), ctx.seed).usage()?;
    let g = largest_component(load_graph(path)?);
    let dir = out_dir(&ctx.out)?;
    write_json(
        &dir.join("config.json"),
        &json!({"command": "embed", "seed": ctx.seed, "graph": path, "vertices": g.n_vertices(), "dsae": dsae}),
    )?;
    let trained = core(train(&g, &dsae, None))?;
    let emb = &trained.embeddings;
    core(emb.write_csv(&dir.join("embeddings.csv")))?;
    core(trained.log.write_csv(&dir.join("training_log.csv")))?;
    std::fs::write(dir.join("model.json"), core(trained.model.to_json())?).runtime()?;
    println!(
        "embedded {} vertices into {} {} dimensions (best epoch {}, validation recon {:.6})",
        emb.n(),
        emb.dim(),
        emb.geometry,
        trained.log.best_epoch,
        trained.log.best_val_recon
    );
    if check {
        let worst = core(emb.check())?;
        println!("check passed: all rows finite, max sqrt(c)*|z| = {worst:.6}");
    }
    Ok(())
}

fn linkpred(ctx: &Context, path: &Path, runs: Option<usize>, grid_file: Option<&Path>, ablation: bool) -> Outcome {
    let mut opts = ctx.cfg.linkpred.clone();
    if let Some(r) = runs {
        opts.runs = r;
    }
    if let Some(file) = grid_file {
        require_file(file)?;
        let text = std::fs::read_to_string(file).usage()?;
        let grid: Vec<BenchConfig> = serde_json::from_str(&text)
            .map_err(|e| usage_err(format!("grid {}: {e}", file.display())))?;
        opts.grid = Some(grid);
    }
    opts.ablation |= ablation;
    core(opts.split.validate())?;
    let dsae = ctx.cfg.resolve_dsae(DsaeConfig::default(), ctx.seed).usage()?;
    let grid = match (&opts.grid, opts.ablation) {
        (Some(grid), _) => grid.clone(),
        (None, true) => ablation_grid(&dsae),
        (None, false) => vec![BenchConfig {
            name: "default".into(),
            no_ae: false,
            dsae: dsae.clone(),
            recipe: EdgeFeature::default(),
        }],
    };
    core(validate_grid(&grid, opts.runs))?;
    let g = largest_component(load_graph(path)?);
    let dir = out_dir(&ctx.out)?;
    let resolved = json!({
        "command": "linkpred",
        "seed": ctx.seed,
        "graph": path,
        "vertices": g.n_vertices(),
        "runs": opts.runs,
        "split": opts.split,
        "grid": grid,
    });
    write_json(&dir.join("config.json"), &resolved)?;

    let cells: Vec<(&BenchConfig, usize)> = grid.iter().flat_map(|c| (0..opts.runs).map(move |r| (c, r))).collect();
    let results = cells
        .par_iter()
        .map(|&(cfg, run)| benchmark_run(&g, cfg, opts.split, run, ctx.seed))
        .collect::<dsae_core::Result<Vec<_>>>();
    let results = core(results)?;
    core(save_results_csv(&dir.join("results.csv"), &results))?;
    let summary = summarize(&grid, &results);
    write_json(&dir.join("summary.json"), &json!({"config": resolved, "summary": summary}))?;
    println!("{:<16} {:>5} {:>3} {:>10} {:>5} {:>8} {:>8}", "config", "q", "J", "geometry", "runs", "mean", "std");
    for s in &summary {
        println!(
            "{:<16} {:>5} {:>3} {:>10} {:>5} {:>8.4} {:>8.4}",
            s.config, s.q, s.max_scale, s.geometry, s.runs, s.mean_auroc, s.std_auroc
        );
    }
    Ok(())
}

fn pick_types(ann: &CellAnnotations, a: Option<String>, b: Option<String>) -> Outcome<(String, String)> {
    if let (Some(a), Some(b)) = (&a, &b) {
        return Ok((a.clone(), b.clone()));
    }
    let types: BTreeSet<&String> = ann.cell_type.iter().collect();
    if types.len() != 2 {
        let listed: Vec<&str> = types.iter().map(|s| s.as_str()).collect();
        return Err(usage_err(format!(
            "labels contain {} cell types ({}); choose two with --type-a and --type-b",
            types.len(),
            listed.join(", ")
        )));
    }
    let mut it = types.into_iter().cloned();
    let (first, second) = (it.next().unwrap(), it.next().unwrap());
    match (a, b) {
        (Some(a), None) => {
            let other = if a == first { second } else { first };
            Ok((a, other))
        }
        (None, Some(b)) => {
            let other = if b == first { second } else { first };
            Ok((other, b))
        }
        _ => Ok((first, second)),
    }
}

fn infer(ctx: &Context, args: &InferArgs) -> Outcome {
    let mut opts = ctx.cfg.inference.clone();
    if let Some(k) = args.k {
        opts.k = k;
    }
    opts.type_a = args.type_a.clone().or(opts.type_a);
    opts.type_b = args.type_b.clone().or(opts.type_b);
    let dsae = ctx.cfg.resolve_dsae(inference_defaults(), ctx.seed).usage()?;
    for p in [&args.expression, &args.labels, &args.prior, &args.annotation] {
        require_file(p)?;
    }
    let expr = ExpressionMatrix::load_csv(&args.expression).usage()?;
    let ann = CellAnnotations::load_csv(&args.labels, &expr.cells).usage()?;
    let (prior, _) = load_edge_list(&args.prior, EdgeFormat::from_path(&args.prior), true, HeaderMode::Auto).usage()?;
    let flags = load_annotation_csv(&args.annotation).usage()?;
    let (type_a, type_b) = pick_types(&ann, opts.type_a.clone(), opts.type_b.clone())?;
    opts.type_a = Some(type_a.clone());
    opts.type_b = Some(type_b.clone());

    let markers = core(select_marker_genes(&expr, &ann, &type_a, &type_b, opts.lfc_threshold, opts.p_threshold))?;
    let ctg = core(build_celltype_graph(&prior, &markers, &flags))?;
    let out = core(infer_network(&ctg, &dsae, opts.k))?;
    let net = &out.network;

    let dir = out_dir(&ctx.out)?;
    let resolved = json!({
        "command": "infer",
        "seed": ctx.seed,
        "expression": args.expression,
        "labels": args.labels,
        "prior": args.prior,
        "annotation": args.annotation,
        "inference": opts,
        "dsae": dsae,
    });
    write_json(&dir.join("config.json"), &resolved)?;
    let preamble = vec![
        format!("alpha={} beta={} gamma={} k={}", dsae.alpha, dsae.beta, dsae.gamma, opts.k),
        format!("seed={} type_a={type_a} type_b={type_b}", ctx.seed),
        format!(
            "markers: {} {type_a}, {} {type_b}; cell-type graph {} vertices",
            markers.genes_i.len(),
            markers.genes_j.len(),
            ctg.graph.n_vertices()
        ),
        format!("config={}", serde_json::to_string(&resolved).runtime()?),
    ];
    core(net.save(&dir.join("network.csv"), &dir.join("network.dot"), &preamble))?;
    write_json(&dir.join("network.json"), &serde_json::to_value(net).runtime()?)?;
    write_json(&dir.join("markers.json"), &serde_json::to_value(&markers).runtime()?)?;
    core(out.log.write_csv(&dir.join("training_log.csv")))?;
    core(out.embeddings.write_csv(&dir.join("embeddings.csv")))?;

    let prior_supported = net.edges.iter().filter(|e| e.provenance == Provenance::PriorSupported).count();
    let cross = net
        .edges
        .iter()
        .filter(|e| net.celltype_of[e.src] != net.celltype_of[e.dst])
        .count();
    println!(
        "inferred {} edges ({} prior-supported, {} de-novo, {} cross-type) over {} genes",
        net.edges.len(),
        prior_supported,
        net.edges.len() - prior_supported,
        cross,
        net.names.len()
    );
    Ok(())
}

fn validate(ctx: &Context, network: &Path, spatial: &Path, labels: &Path) -> Outcome {
    for p in [network, spatial, labels] {
        require_file(p)?;
    }
    let text = std::fs::read_to_string(network).usage()?;
    let net: InferredNetwork =
        serde_json::from_str(&text).map_err(|e| usage_err(format!("network {}: {e}", network.display())))?;
    let expr = ExpressionMatrix::load_csv(spatial).usage()?;
    let ann = CellAnnotations::load_csv(labels, &expr.cells).usage()?;
    let mut opts = ctx.cfg.spatial.clone();
    opts.seed = ctx.seed;
    let dir = out_dir(&ctx.out)?;
    let resolved = json!({
        "command": "validate-spatial",
        "seed": ctx.seed,
        "network": network,
        "spatial": spatial,
        "spatial_labels": labels,
        "spatial_options": opts,
    });
    write_json(&dir.join("config.json"), &resolved)?;
    let report = core(validate_spatial(&net, &expr, &ann, &opts))?;
    write_json(&dir.join("spatial_report.json"), &json!({"config": resolved, "report": report}))?;
    if report.no_pairs {
        println!("no cross-type network edge has both genes on the spatial panel");
        return Ok(());
    }
    println!(
        "{} pairs tested on {} close / {} distant cell pairs",
        report.tested_pairs.len(),
        report.close_cell_pairs,
        report.distant_cell_pairs
    );
    for (name, ks) in [
        ("network vs random", report.ks_network_vs_random),
        ("close vs distant", report.ks_close_vs_distant),
    ] {
        if let Some(ks) = ks {
            println!("KS {name}: D = {:.4}, p = {:.3e}", ks.statistic, ks.p_value);
        }
    }
    Ok(())
}
