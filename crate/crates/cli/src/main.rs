//! `oswl`: generators, refinement tests, distinguishability matrices, the subgraph
//! sampler, training and gradient checks from the command line.
//!
//! Every JSON output is deterministic given its arguments; anything that varies
//! between runs (timestamps, thread counts, wall times) lives under a top-level
//! `"metadata"` key. Exit codes: 0 success, 1 runtime failure, 2 bad arguments or
//! a violated guard.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use oswl_core::gadgets::{gen_backbone, gen_cfi, gen_furer, gen_gnp, BackbonePattern, CfiVariant, Sidecar};
use oswl_core::graph::io::{read_graph, write_graph, Format};
use oswl_core::harness::{run_matrix, ExperimentSpec};
use oswl_core::imle::{apply_policy, sample_rows, to_masked_adjacency, GradAgg, Mode, Noise, Policy, SamplerConfig, ThetaMatrix};
use oswl_core::neural::{
    cfi_pair_dataset, checkpoint, run_gradchecks, train, triangle_dataset, Task, TrainConfig, TrainMode,
    GRADCHECK_TOLERANCE,
};
use oswl_core::wl::{distinguish, Algorithm, ColorTable};
use oswl_core::LabeledGraph;
use serde::Deserialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

const THREADS_VAR: &str = "OSWL_THREADS";

#[derive(Parser)]
#[command(name = "oswl", version, about = "Ordered-subgraph WL engines, hard-instance generators and subgraph sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph file plus a `.sidecar.json` cloud map.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Run one algorithm on two graph files and print the verdict.
    Test(TestArgs),
    /// Evaluate a suite of graph pairs against a set of algorithms.
    Matrix(MatrixArgs),
    /// Draw perturb-and-MAP subgraph encodings from a theta matrix.
    Sample(SampleArgs),
    /// Train a baseline, I-MLE or random-sampling model.
    Train(TrainArgs),
    /// Central finite-difference checks of every backward pass.
    Gradcheck(GradcheckArgs),
}

#[derive(Subcommand)]
enum GenKind {
    /// CFI gadget G_k or H_k.
    Cfi {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "G")]
        variant: String,
        #[command(flatten)]
        out: GenOut,
    },
    /// Furer graph X or Y over the h x n grid.
    Furer {
        #[arg(long)]
        h: usize,
        #[arg(long)]
        n: usize,
        /// Build Y (one twisted edge) instead of X.
        #[arg(long)]
        twist: bool,
        #[command(flatten)]
        out: GenOut,
    },
    /// Backbone composite of CFI gadgets.
    Backbone {
        #[arg(long)]
        k: usize,
        /// `alternating` or `blocked`.
        #[arg(long, default_value = "alternating")]
        pattern: String,
        #[command(flatten)]
        out: GenOut,
    },
    /// Erdos-Renyi G(n, p).
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: GenOut,
    },
}

#[derive(Args)]
struct GenOut {
    /// Graph file; `.json` selects JSON, anything else the edge-list format.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct TestArgs {
    first: PathBuf,
    second: PathBuf,
    /// `cr`, `kwl:K`, `oswl:K[:all][:unordered]` or `vs-oswl:K[...]`.
    #[arg(long, default_value = "cr")]
    alg: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MatrixArgs {
    /// Experiment spec JSON; the canonical suite when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the engines' object caps.
    #[arg(long)]
    cap: Option<u64>,
    /// JSON output (stdout when omitted and no spec output is set).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    /// `{"m":..,"n":..,"values":[..]}`, a list of rows, or a single row.
    #[arg(long)]
    theta: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "unordered")]
    mode: String,
    /// Required unless `--noise none`.
    #[arg(long)]
    seed: Option<u64>,
    /// `gumbel` or `none`.
    #[arg(long, default_value = "gumbel")]
    noise: String,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Also emit masks on this graph.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value = "node-select")]
    policy: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// `cfi-pairs` or `triangles`.
    #[arg(long)]
    task: String,
    #[arg(long)]
    seed: u64,
    /// `baseline`, `imle` or `random`.
    #[arg(long, default_value = "imle")]
    mode: String,
    #[arg(long, default_value = "node-delete")]
    policy: String,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Sampler encoding, `unordered` or `ordered`.
    #[arg(long, default_value = "unordered")]
    encoding: String,
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 8)]
    batch_size: usize,
    #[arg(long, default_value_t = 32)]
    hidden: usize,
    #[arg(long, default_value_t = 3)]
    layers: usize,
    #[arg(long, default_value_t = 0.0)]
    aux_weight: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    noise_scale: f64,
    #[arg(long, default_value = "sum")]
    grad_agg: String,
    /// Feed ordered ranks to the downstream model.
    #[arg(long)]
    rank_channel: bool,
    /// Disable per-subgraph feature normalization.
    #[arg(long)]
    no_norm: bool,
    /// Graph pairs (cfi-pairs) or graphs (triangles).
    #[arg(long)]
    size: Option<usize>,
    /// CFI order for cfi-pairs.
    #[arg(long, default_value_t = 2)]
    cfi_k: usize,
    /// Largest graph for triangles.
    #[arg(long, default_value_t = 12)]
    max_n: usize,
    /// Write the trained parameters here.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Per-epoch metrics as JSON lines `{epoch, split, loss, metric}`.
    #[arg(long)]
    metrics: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-epoch progress on stderr.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Args)]
struct GradcheckArgs {
    /// Seed for the random check inputs.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

/// A failure caused by the invocation rather than by the computation.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<oswl_core::Error>() {
            use oswl_core::Error as E;
            return match e {
                E::Guard(_) | E::InvalidArgument(_) | E::CapExceeded { .. } | E::Shape(_) | E::EmptySelection => 2,
                _ => 1,
            };
        }
    }
    1
}

fn configure_threads() -> Result<usize> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| usage(format!("{THREADS_VAR} must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(rayon::current_num_threads())
}

fn metadata(threads: usize, started: Instant) -> Value {
    let unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "threads": threads,
        "created_unix": unix,
        "wall_seconds": started.elapsed().as_secs_f64(),
    })
}

fn emit(out: Option<&Path>, doc: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    write_text(out, &text)
}

fn write_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn with_metadata(mut doc: Value, meta: Value) -> Value {
    doc.as_object_mut().expect("object output").insert("metadata".into(), meta);
    doc
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("sidecar.json")
}

fn load_graph(path: &Path) -> Result<LabeledGraph> {
    read_graph(path, Format::from_path(path)).with_context(|| format!("reading {}", path.display()))
}

fn cmd_gen(kind: GenKind) -> Result<()> {
    let (graph, sidecar, out) = match kind {
        GenKind::Cfi { k, variant, out } => {
            let variant: CfiVariant = variant.parse()?;
            let g = gen_cfi(k, variant)?;
            let sc = Sidecar {
                generator: "cfi".into(),
                params: json!({ "k": k, "variant": variant.to_string() }),
                twisted_edges: Vec::new(),
                clouds: g.cloud_map,
            };
            (g.graph, sc, out)
        }
        GenKind::Furer { h, n, twist, out } => {
            let f = gen_furer(h, n, twist)?;
            let sc = Sidecar {
                generator: "furer".into(),
                params: json!({ "h": h, "n": n, "twist": twist }),
                twisted_edges: f.twisted_edges,
                clouds: f.cloud_map,
            };
            (f.graph, sc, out)
        }
        GenKind::Backbone { k, pattern, out } => {
            let parsed: BackbonePattern = pattern.parse()?;
            let (g, clouds) = gen_backbone(k, parsed)?;
            let sc = Sidecar {
                generator: "backbone".into(),
                params: json!({ "k": k, "pattern": pattern }),
                twisted_edges: Vec::new(),
                clouds,
            };
            (g, sc, out)
        }
        GenKind::Random { n, p, seed, out } => {
            let g = gen_gnp(n, p, seed, 0)?;
            let sc = Sidecar {
                generator: "random".into(),
                params: json!({ "n": n, "p": p, "seed": seed }),
                twisted_edges: Vec::new(),
                clouds: Vec::new(),
            };
            (g, sc, out)
        }
    };
    write_graph(&out.out, &graph, Format::from_path(&out.out)).with_context(|| format!("writing {}", out.out.display()))?;
    let side = sidecar_path(&out.out);
    std::fs::write(&side, sidecar.to_json()).with_context(|| format!("writing {}", side.display()))?;
    eprintln!("wrote {} ({} vertices, {} edges) and {}", out.out.display(), graph.n(), graph.num_edges(), side.display());
    Ok(())
}

fn cmd_test(a: TestArgs, threads: usize, started: Instant) -> Result<()> {
    let alg: Algorithm = a.alg.parse()?;
    let g = load_graph(&a.first)?;
    let h = load_graph(&a.second)?;
    let table = ColorTable::new();
    let v = distinguish(&g, &h, &alg, &table)?;
    let doc = json!({
        "algorithm": alg.to_string(),
        "verdict": v.verdict,
        "round": v.round,
        "histogram_sizes": [v.histograms[0].0.len(), v.histograms[1].0.len()],
    });
    emit(a.out.as_deref(), &with_metadata(doc, metadata(threads, started)))
}

fn cmd_matrix(a: MatrixArgs, threads: usize, started: Instant) -> Result<()> {
    let mut spec = match &a.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            ExperimentSpec::from_json(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
        }
        None => ExperimentSpec::canonical(),
    };
    if a.seed.is_some() {
        spec.seed = a.seed;
    }
    if a.cap.is_some() {
        spec.cap = a.cap;
    }
    let (matrix, timings) = run_matrix(&spec)?;
    if let Some(csv) = &a.csv {
        write_text(Some(csv), &matrix.to_csv())?;
    }
    let mut meta = metadata(threads, started);
    meta["cell_seconds"] = serde_json::to_value(&timings)?;
    let doc = with_metadata(serde_json::to_value(&matrix)?, meta);
    let out = a.out.or_else(|| spec.output.as_ref().map(PathBuf::from));
    emit(out.as_deref(), &doc)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ThetaInput {
    Matrix(ThetaMatrix),
    Rows(Vec<Vec<f64>>),
    Row(Vec<f64>),
}

fn cmd_sample(a: SampleArgs) -> Result<()> {
    let mode: Mode = a.mode.parse()?;
    let text = std::fs::read_to_string(&a.theta).with_context(|| format!("reading {}", a.theta.display()))?;
    let input: ThetaInput = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", a.theta.display())))?;
    let theta = match input {
        ThetaInput::Matrix(t) => ThetaMatrix::new(t.m, t.n, t.values)?,
        ThetaInput::Rows(rows) => ThetaMatrix::from_rows(&rows)?,
        ThetaInput::Row(row) => ThetaMatrix::from_rows(&[row])?,
    };
    let noise = match a.noise.as_str() {
        "gumbel" => Noise::Gumbel { scale: a.scale },
        "none" => Noise::None,
        other => bail!(usage(format!("noise must be gumbel or none, got {other:?}"))),
    };
    let seed = match (a.seed, noise) {
        (Some(s), _) => s,
        (None, Noise::None) => 0,
        (None, _) => bail!(usage("--seed is required with gumbel noise")),
    };
    let mut cfg = SamplerConfig::new(a.k, theta.m, mode, seed);
    cfg.noise = noise;
    let encodings = sample_rows(&theta, &cfg)?;
    let graph = a.graph.as_deref().map(load_graph).transpose()?;
    let policy: Policy = a.policy.parse()?;
    let mut samples = Vec::new();
    for (i, z) in encodings.iter().enumerate() {
        let mut s = json!({ "row": i, "z": z.z, "ranking": z.ranking() });
        if let Some(g) = &graph {
            let mask = apply_policy(policy, z, g)?;
            let kept: Vec<[usize; 2]> = g
                .edges()
                .iter()
                .zip(&mask.edges)
                .filter(|(_, &keep)| keep)
                .map(|(&(u, v), _)| [u, v])
                .collect();
            s["vertex_mask"] = json!(mask.vertices);
            s["edges"] = json!(kept);
            if mode == Mode::Ordered && !policy.is_edge_policy() {
                s["rank_of_vertex"] = json!(to_masked_adjacency(z, g)?.rank_of_vertex);
            }
        }
        samples.push(s);
    }
    let mut doc = json!({
        "k": a.k,
        "mode": mode.to_string(),
        "noise": a.noise,
        "seed": seed,
        "samples": samples,
    });
    if graph.is_some() {
        doc["policy"] = json!(policy.to_string());
    }
    emit(a.out.as_deref(), &doc)
}

fn cmd_train(a: TrainArgs, threads: usize, started: Instant) -> Result<()> {
    let task: Task = a.task.parse()?;
    let mut cfg = TrainConfig::new(a.mode.parse::<TrainMode>()?, a.seed);
    cfg.policy = a.policy.parse()?;
    cfg.k = a.k;
    cfg.m = a.m;
    cfg.sampler_mode = a.encoding.parse()?;
    cfg.epochs = a.epochs;
    cfg.lr = a.lr;
    cfg.batch_size = a.batch_size;
    cfg.hidden = a.hidden;
    cfg.gin_layers = a.layers;
    cfg.aux_weight = a.aux_weight;
    cfg.lambda = a.lambda;
    cfg.noise_scale = a.noise_scale;
    cfg.grad_agg = a.grad_agg.parse::<GradAgg>()?;
    cfg.rank_channel = a.rank_channel;
    cfg.norm = !a.no_norm;
    cfg.validate()?;
    let data = match task {
        Task::CfiPairs => cfi_pair_dataset(a.size.unwrap_or(100), a.cfi_k, a.seed)?,
        Task::Triangles => triangle_dataset(a.size.unwrap_or(200), a.max_n, a.seed)?,
    };
    let verbose = a.verbose;
    let report = train(&cfg, &data, |m| {
        if verbose {
            eprintln!("epoch {:>3} {:<5} loss {:.5} metric {:.4}", m.epoch, m.split, m.loss, m.metric);
        }
    })?;
    if let Some(p) = &a.metrics {
        let mut lines = String::new();
        for m in &report.metrics {
            lines.push_str(&serde_json::to_string(m)?);
            lines.push('\n');
        }
        write_text(Some(p), &lines)?;
    }
    if let Some(p) = &a.checkpoint {
        checkpoint::save(&report.model.store, p).with_context(|| format!("writing {}", p.display()))?;
    }
    let metric_name = if task.higher_is_better() { "accuracy" } else { "mae" };
    let mut finals = serde_json::Map::new();
    for split in ["train", "val", "test"] {
        finals.insert(split.into(), json!(report.final_metric(split)));
    }
    let mut doc = json!({
        "task": task.to_string(),
        "config": {
            "mode": cfg.mode.to_string(),
            "policy": cfg.policy.to_string(),
            "k": cfg.k,
            "m": cfg.m,
            "encoding": cfg.sampler_mode.to_string(),
            "epochs": cfg.epochs,
            "lr": cfg.lr,
            "batch_size": cfg.batch_size,
            "hidden": cfg.hidden,
            "layers": cfg.gin_layers,
            "aux_weight": cfg.aux_weight,
            "lambda": cfg.lambda,
            "noise_scale": cfg.noise_scale,
            "grad_agg": a.grad_agg,
            "rank_channel": cfg.rank_channel,
            "norm": cfg.norm,
            "seed": cfg.seed,
        },
        "dataset": { "train": data.train.len(), "val": data.val.len(), "test": data.test.len() },
        "metric": metric_name,
        "epochs": report.metrics,
        "final": finals,
    });
    doc[format!("final_{metric_name}")] = json!(report.final_metric("test"));
    emit(a.out.as_deref(), &with_metadata(doc, metadata(threads, started)))
}

fn cmd_gradcheck(a: GradcheckArgs) -> Result<()> {
    let rows = run_gradchecks(a.seed);
    let failed: Vec<&str> = rows.iter().filter(|r| !r.passed()).map(|r| r.layer.as_str()).collect();
    if a.json {
        emit(None, &json!({ "seed": a.seed, "tolerance": GRADCHECK_TOLERANCE, "rows": rows }))?;
    } else {
        println!("{:<20} {:>8} {:>12}  status", "layer", "checked", "max_rel_err");
        for r in &rows {
            let status = if r.passed() { "ok" } else { "FAIL" };
            println!("{:<20} {:>8} {:>12.3e}  {status}", r.layer, r.checked, r.max_rel_err);
        }
    }
    if !failed.is_empty() {
        return Err(anyhow!("gradient check failed for {}", failed.join(", ")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    let threads = configure_threads()?;
    match cli.command {
        Command::Gen { kind } => cmd_gen(kind),
        Command::Test(a) => cmd_test(a, threads, started),
        Command::Matrix(a) => cmd_matrix(a, threads, started),
        Command::Sample(a) => cmd_sample(a),
        Command::Train(a) => cmd_train(a, threads, started),
        Command::Gradcheck(a) => cmd_gradcheck(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
