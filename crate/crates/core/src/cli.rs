//! Command-line frontend. Exit codes: 0 on success, 1 for usage errors, 2
//! for runtime errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde::Serialize;

use crate::bench::{evaluate, run_experiment, write_csv, ExperimentSpec, Family, Method};
use crate::codec::{aggregate_error, decode_all, encode, error_bound, IndexCode, MessageVector};
use crate::error::Error;
use crate::graph::SideInfoGraph;
use crate::netcode::{network_config, solve_network, NetworkOutcome, NetworkSpec};
use crate::rankmin::{matio, pattern_for, solve, SolverConfig, Variant};
use crate::rng::RngSeed;

#[derive(Debug, Parser)]
#[command(name = "minrank", version, about = "Scalar linear index codes by rank minimization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random side-information graph.
    Gen(GenArgs),
    /// Find a short index code for a graph and report it as JSON.
    Solve(SolveArgs),
    /// Encode and decode one message vector end to end.
    Demo(DemoArgs),
    /// Build a linear network code through the index coding reduction.
    Netcode(NetcodeArgs),
    /// Run a paired experiment and write CSV rows.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
}

impl SolverArgs {
    fn config(&self, variant: Variant, seed: u64) -> SolverConfig {
        SolverConfig {
            epsilon: self.epsilon,
            max_iters: self.max_iters,
            restarts: self.restarts,
            variant,
            seed: RngSeed(seed),
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// er-undirected, er-directed, regular or three-clique.
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub n: usize,
    /// Edge probability (all families but regular).
    #[arg(long)]
    pub p: Option<f64>,
    /// Cache size (regular family).
    #[arg(long)]
    pub c: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value = "ap-eig")]
    pub method: String,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Include the completed matrix in the report.
    #[arg(long)]
    pub matrix: bool,
    /// Report zero wall time so the output is reproducible byte for byte.
    #[arg(long)]
    pub no_timing: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value = "ap-svd")]
    pub method: String,
    /// Comma-separated messages; drawn uniformly from [-x_max, x_max] when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, default_value_t = 10.0)]
    pub x_max: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct NetcodeArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long, default_value = "ap-svd")]
    pub method: String,
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    #[arg(long, default_value_t = crate::netcode::NETWORK_MAX_ITERS)]
    pub max_iters: usize,
    #[arg(long, default_value_t = crate::netcode::NETWORK_RESTARTS)]
    pub restarts: usize,
    /// Write the outcome as JSON instead of a listing.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Override the spec's trial count.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Worker threads; all cores when absent.
    #[arg(long, env = "MINRANK_THREADS")]
    pub threads: Option<usize>,
    /// Override the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {}", m.trim_start_matches("error: ")),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| runtime(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(runtime),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(runtime)?;
    s.push('\n');
    Ok(s)
}

fn load_graph(path: &PathBuf) -> Result<SideInfoGraph, CliError> {
    SideInfoGraph::load(path).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

/// Parses arguments and runs the chosen subcommand.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string())),
    };
    match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Demo(a) => cmd_demo(a),
        Command::Netcode(a) => cmd_netcode(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn cmd_gen(a: GenArgs) -> Result<(), CliError> {
    let family: Family = a.family.parse().map_err(usage)?;
    let param = match (family, a.p, a.c) {
        (Family::DirectedRegular, None, Some(c)) => c as f64,
        (Family::DirectedRegular, _, _) => return Err(usage("the regular family takes --c and no --p")),
        (_, Some(p), None) => p,
        _ => return Err(usage(format!("the {} family takes --p and no --c", family.as_str()))),
    };
    let g = family.generate(a.n, param, RngSeed(a.common.seed)).map_err(usage)?;
    write_output(&a.common.out, &g.to_text())
}

#[derive(Serialize)]
struct SolveReport {
    method: Method,
    n: usize,
    r_star: usize,
    residual: f64,
    iterations: usize,
    wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<String>,
}

fn cmd_solve(a: SolveArgs) -> Result<(), CliError> {
    let method: Method = a.method.parse().map_err(usage)?;
    let g = load_graph(&a.graph)?;
    let cfg = a.solver.config(method.variant().unwrap_or(Variant::ApEig), a.common.seed);
    cfg.validate().map_err(usage)?;
    let (ev, matrix) = match method.variant() {
        Some(_) if a.matrix => {
            let out = solve(&g, &cfg).map_err(runtime)?;
            let ev = crate::bench::Evaluation {
                code_length: out.r_star,
                wall_time_s: out.wall_time,
                iterations: out.iterations,
                residual: out.residual,
            };
            (ev, Some(matio::to_text(&out.m_star)))
        }
        _ => (evaluate(method, &g, &cfg).map_err(runtime)?, None),
    };
    let report = SolveReport {
        method,
        n: g.n(),
        r_star: ev.code_length,
        residual: ev.residual,
        iterations: ev.iterations,
        wall_time_s: if a.no_timing { 0.0 } else { ev.wall_time_s },
        matrix,
    };
    write_output(&a.common.out, &to_json(&report)?)
}

#[derive(Serialize)]
struct DemoReport {
    method: Variant,
    r_star: usize,
    residual: f64,
    encoder_rows: Vec<usize>,
    x: Vec<f64>,
    y: Vec<f64>,
    x_hat: Vec<f64>,
    per_user_error: Vec<f64>,
    aggregate_error: f64,
    bound: f64,
}

fn parse_messages(text: &str, x_max: f64) -> Result<MessageVector, CliError> {
    let x: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("bad message value {t:?}"))))
        .collect::<Result<_, _>>()?;
    MessageVector::new(DVector::from_vec(x), x_max).map_err(usage)
}

fn cmd_demo(a: DemoArgs) -> Result<(), CliError> {
    let method: Method = a.method.parse().map_err(usage)?;
    let variant = method
        .variant()
        .ok_or_else(|| usage("demo needs a rank-minimization method"))?;
    let g = load_graph(&a.graph)?;
    let cfg = a.solver.config(variant, a.common.seed);
    cfg.validate().map_err(usage)?;
    let x = match &a.x {
        Some(text) => parse_messages(text, a.x_max)?,
        None => MessageVector::random(g.n(), a.x_max, RngSeed(a.common.seed).derive(&[1])).map_err(usage)?,
    };
    if x.len() != g.n() {
        return Err(usage(format!("{} messages for {} users", x.len(), g.n())));
    }
    let out = solve(&g, &cfg).map_err(runtime)?;
    let code = IndexCode::new(out.m_star, out.r_star, pattern_for(&g, variant), cfg.epsilon).map_err(runtime)?;
    let y = encode(&code.a, &x).map_err(runtime)?;
    let x_hat = decode_all(&code, &x).map_err(runtime)?;
    let err = aggregate_error(x.x(), &x_hat).map_err(runtime)?;
    let bound = error_bound(cfg.epsilon, x.x_max(), g.n());
    let report = DemoReport {
        method: variant,
        r_star: code.r_star,
        residual: out.residual,
        encoder_rows: code.rows.iter().map(|r| r + 1).collect(),
        x: x.x().iter().copied().collect(),
        y: y.iter().copied().collect(),
        x_hat: x_hat.iter().copied().collect(),
        per_user_error: (x.x() - &x_hat).iter().map(|d| d.abs()).collect(),
        aggregate_error: err,
        bound,
    };
    write_output(&a.common.out, &to_json(&report)?)?;
    if err > bound {
        return Err(runtime(format!("decoding error {err:.3e} exceeds the bound {bound:.3e}")));
    }
    Ok(())
}

fn cmd_netcode(a: NetcodeArgs) -> Result<(), CliError> {
    let method: Method = a.method.parse().map_err(usage)?;
    let variant = method
        .variant()
        .ok_or_else(|| usage("netcode needs a rank-minimization method"))?;
    let cfg = SolverConfig {
        epsilon: a.epsilon,
        max_iters: a.max_iters,
        restarts: a.restarts,
        ..network_config(RngSeed(a.common.seed)).with_variant(variant)
    };
    cfg.validate().map_err(usage)?;
    let net = NetworkSpec::load(&a.network).map_err(|e| runtime(format!("{}: {e}", a.network.display())))?;
    let outcome: NetworkOutcome = solve_network(&net, &cfg).map_err(runtime)?;
    let text = if a.json { to_json(&outcome)? } else { outcome.to_string() };
    write_output(&a.common.out, &text)
}

fn cmd_bench(a: BenchArgs) -> Result<(), CliError> {
    let mut spec = ExperimentSpec::load(&a.spec).map_err(|e| match e {
        Error::Io(_) => runtime(format!("{}: {e}", a.spec.display())),
        e => usage(format!("{}: {e}", a.spec.display())),
    })?;
    if let Some(t) = a.trials {
        spec.trials = t;
    }
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    if a.no_timing {
        spec.timing = false;
    }
    spec.validate().map_err(usage)?;
    if a.threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    let rows = run_experiment(&spec, a.threads).map_err(runtime)?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).map_err(runtime)?;
    write_output(&a.out, &String::from_utf8(buf).map_err(runtime)?)
}
