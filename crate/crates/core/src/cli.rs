//! Command-line front end.
//!
//! Exit codes: 0 success, 1 output write failure, 2 invalid flags or
//! arguments, 3 input read/parse failure, 4 solver failure, 5 brute-force
//! size over the cap. Indices are 0-based everywhere.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bench::{
    best_of_restarts, capture_trace, run_campaign_with_jobs, write_trace_csv, CampaignSpec,
    Initializer, SolverKind,
};
use crate::error::FspcaError;
use crate::matcore::{numerical_rank, SymMat, RANK_REL_TOL};
use crate::metrics::normalized_explained_variance;
use crate::oracle::brute_force_with_cap;
use crate::solver::{go, go_lowrank_init, SolveReport, SolverConfig, SubspaceEstimate};
use crate::synth::{
    format_f64, load_covariance_csv, load_matrix_csv, make_covariance, sample_covariance,
    write_matrix_csv, Scheme, SchemeSpec,
};

#[derive(Parser, Debug)]
#[command(name = "fspca", version, about = "Feature-sparse PCA solvers, oracle and experiment harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve for a row-sparse principal subspace.
    Solve(SolveArgs),
    /// Brute-force the global optimum over all supports.
    Oracle(OracleArgs),
    /// Write a synthetic covariance as CSV.
    Generate(GenerateArgs),
    /// Run a seeded Monte-Carlo campaign against the oracle.
    Campaign(CampaignArgs),
    /// Run the iterative solver and write its objective trace.
    Trace(TraceArgs),
}

#[derive(Args, Debug, Clone)]
#[group(id = "source", required = true, multiple = false)]
pub struct SourceArgs {
    /// Covariance matrix as CSV (d rows, d columns).
    #[arg(long, group = "source")]
    pub covariance_csv: Option<PathBuf>,
    /// Data matrix as CSV (d rows = features, n columns = samples).
    #[arg(long, group = "source")]
    pub data_csv: Option<PathBuf>,
    /// Synthetic scheme: A, B, C, D, E, F or zipf.
    #[arg(long, group = "source")]
    pub scheme: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Center data rows before forming X X^T (only with --data-csv).
    #[arg(long)]
    pub center: bool,
    /// Dimension for --scheme.
    #[arg(long, default_value_t = 20)]
    pub d: usize,
    /// Sample count for schemes E/F (default d).
    #[arg(long)]
    pub n: Option<usize>,
    /// Zipf scale.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Zipf exponent.
    #[arg(long, default_value_t = 2.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Go,
    Ipu,
    GoLowrank,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitKind {
    Random,
    Lowrank,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Pretty,
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct IterArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub k: usize,
    /// Ridge added to the working matrix.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = InitKind::Lowrank)]
    pub init: InitKind,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub restarts: u64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iter: u64,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    #[command(flatten)]
    pub iter: IterArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub k: usize,
    #[command(flatten)]
    pub input: InputArgs,
    /// Largest C(d, k) allowed.
    #[arg(long, default_value_t = crate::oracle::DEFAULT_SUPPORT_CAP)]
    pub max_supports: u128,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long)]
    pub scheme: String,
    #[arg(long, default_value_t = 20)]
    pub d: usize,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 2.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CampaignArgs {
    #[arg(long)]
    pub scheme: String,
    #[arg(long, default_value_t = 20)]
    pub d: usize,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, default_value_t = 7)]
    pub k: usize,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 2.0)]
    pub t: f64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, value_enum, default_value_t = Algo::Ipu)]
    pub solver: Algo,
    #[arg(long, value_enum, default_value_t = InitKind::Lowrank)]
    pub init: InitKind,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub restarts: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iter: u64,
    /// Skip the brute-force oracle (IR/RE/HF are left empty).
    #[arg(long)]
    pub no_oracle: bool,
    #[arg(long, default_value_t = crate::oracle::DEFAULT_SUPPORT_CAP)]
    pub max_supports: u128,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads.
    #[arg(long, env = "FSPCA_JOBS", default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    #[command(flatten)]
    pub iter: IterArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: 2, message: msg.into() }
    }

    /// Errors raised while reading or building the input matrix.
    fn input(e: FspcaError) -> Self {
        match e {
            FspcaError::InvalidInput(msg) => Self::usage(msg),
            other => Self { code: 3, message: other.to_string() },
        }
    }

    /// Errors raised by solvers and the oracle.
    fn solve(e: FspcaError) -> Self {
        match e {
            FspcaError::InvalidInput(msg) => Self::usage(msg),
            e @ FspcaError::CombinatorialCap { .. } => Self { code: 5, message: e.to_string() },
            other => Self { code: 4, message: other.to_string() },
        }
    }

    fn output(e: impl std::fmt::Display) -> Self {
        Self { code: 1, message: format!("cannot write output: {e}") }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn parse_scheme(name: &str) -> CliResult<Scheme> {
    name.parse::<Scheme>().map_err(|e| CliError::usage(e.to_string()))
}

fn scheme_spec(scheme: Scheme, d: usize, n: Option<usize>, c: f64, t: f64, seed: u64) -> SchemeSpec {
    match scheme {
        Scheme::Zipf => SchemeSpec::zipf(c, t, d, seed),
        other => SchemeSpec::named(other, d, seed, n),
    }
}

fn load_input(input: &InputArgs) -> CliResult<SymMat> {
    let src = &input.source;
    if input.center && src.data_csv.is_none() {
        return Err(CliError::usage("--center requires --data-csv"));
    }
    if let Some(path) = &src.covariance_csv {
        return load_covariance_csv(path).map_err(CliError::input);
    }
    if let Some(path) = &src.data_csv {
        let x = load_matrix_csv(path).map_err(CliError::input)?;
        return sample_covariance(&x, input.center).map_err(CliError::input);
    }
    let name = src.scheme.as_deref().ok_or_else(|| CliError::usage("no input source given"))?;
    let spec = scheme_spec(parse_scheme(name)?, input.d, input.n, input.c, input.t, input.seed);
    make_covariance(&spec).map_err(CliError::input)
}

fn open_out(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(CliError::output)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn solver_config(iter: &IterArgs, seed: u64) -> SolverConfig {
    SolverConfig::new(iter.m, iter.k)
        .with_ridge(iter.eps)
        .with_max_iter(iter.max_iter as usize)
        .with_seed(seed)
}

fn run_ipu(a: &SymMat, iter: &IterArgs, seed: u64) -> CliResult<SolveReport> {
    let cfg = solver_config(iter, seed);
    cfg.validate(a.dim()).map_err(CliError::solve)?;
    match iter.init {
        InitKind::Lowrank => {
            let w0 = go_lowrank_init(a, iter.m, iter.k).map_err(CliError::solve)?;
            capture_trace(a, &cfg, &w0).map_err(CliError::solve)
        }
        InitKind::Random => {
            best_of_restarts(a, &cfg, iter.restarts as usize, seed).map_err(CliError::solve)
        }
    }
}

fn block_rows(w: &SubspaceEstimate) -> Vec<Vec<f64>> {
    let b = w.block();
    (0..b.nrows()).map(|i| b.row(i).iter().copied().collect()).collect()
}

fn cmd_solve(args: &SolveArgs) -> CliResult<()> {
    let a = load_input(&args.input)?;
    let (m, k) = (args.iter.m, args.iter.k);
    let (w, report) = match args.algo {
        Algo::Go => (go(&a, m, k).map_err(CliError::solve)?, None),
        Algo::GoLowrank => (go_lowrank_init(&a, m, k).map_err(CliError::solve)?, None),
        Algo::Ipu => {
            let rep = run_ipu(&a, &args.iter, args.input.seed)?;
            (rep.estimate.clone(), Some(rep))
        }
    };
    let objective = w.objective(&a).map_err(CliError::solve)?;
    let nev = normalized_explained_variance(&a, &w, m).map_err(CliError::solve)?;
    let low_rank = numerical_rank(&a, RANK_REL_TOL).map_err(CliError::solve)? <= m;
    let iterations = report.as_ref().map_or(0, |r| r.iterations);

    let mut out = open_out(&args.out)?;
    match args.format {
        Format::Json => {
            let mut doc = json!({
                "algo": format!("{:?}", args.algo).to_lowercase(),
                "m": m,
                "k": k,
                "d": a.dim(),
                "support": w.support().indices(),
                "block": block_rows(&w),
                "objective": objective,
                "nev": nev,
                "iterations": iterations,
                "globally_optimal_by_rank": low_rank && args.algo == Algo::Go,
            });
            if let Some(rep) = &report {
                doc["converged_by"] = json!(rep.converged_by.as_str());
                doc["initial_objective"] = json!(rep.initial_objective());
                doc["objective_trace"] = json!(rep.objective_trace);
            }
            let text = serde_json::to_string_pretty(&doc).map_err(CliError::output)?;
            writeln!(out, "{text}").map_err(CliError::output)?;
        }
        Format::Csv => write_matrix_csv(&mut out, &w.dense()).map_err(CliError::output)?,
        Format::Pretty => {
            let mut text = format!(
                "support: {}\nobjective: {}\nnev: {}\niterations: {}\n",
                w.support(),
                format_f64(objective),
                format_f64(nev),
                iterations
            );
            if let Some(rep) = &report {
                text.push_str(&format!(
                    "initial_objective: {}\nconverged_by: {}\n",
                    format_f64(rep.initial_objective()),
                    rep.converged_by.as_str()
                ));
            }
            if low_rank && args.algo == Algo::Go {
                text.push_str("note: rank(A) <= m, so this solution is globally optimal\n");
            }
            text.push_str("block:\n");
            for row in block_rows(&w) {
                let cells: Vec<String> = row.into_iter().map(format_f64).collect();
                text.push_str(&format!("  {}\n", cells.join(",")));
            }
            out.write_all(text.as_bytes()).map_err(CliError::output)?;
        }
    }
    out.flush().map_err(CliError::output)
}

fn cmd_oracle(args: &OracleArgs) -> CliResult<()> {
    let a = load_input(&args.input)?;
    let res = brute_force_with_cap(&a, args.m, args.k, args.max_supports).map_err(CliError::solve)?;
    let mut out = open_out(&args.out)?;
    match args.format {
        Format::Json => {
            let doc = json!({
                "m": args.m,
                "k": args.k,
                "d": a.dim(),
                "support": res.optimal_support.indices(),
                "objective": res.optimal_objective,
                "supports_examined": res.num_supports_examined,
                "ties": res.ties.iter().map(|s| s.indices().to_vec()).collect::<Vec<_>>(),
            });
            let text = serde_json::to_string_pretty(&doc).map_err(CliError::output)?;
            writeln!(out, "{text}").map_err(CliError::output)?;
        }
        Format::Pretty | Format::Csv => {
            let ties: Vec<String> = res.ties.iter().map(|s| format!("[{s}]")).collect();
            write!(
                out,
                "support: {}\nobjective: {}\nsupports_examined: {}\nties: {}\n",
                res.optimal_support,
                format_f64(res.optimal_objective),
                res.num_supports_examined,
                ties.join(" ")
            )
            .map_err(CliError::output)?;
        }
    }
    out.flush().map_err(CliError::output)
}

fn cmd_generate(args: &GenerateArgs) -> CliResult<()> {
    let scheme = parse_scheme(&args.scheme)?;
    let spec = scheme_spec(scheme, args.d, args.n, args.c, args.t, args.seed);
    let a = make_covariance(&spec).map_err(CliError::input)?;
    let mut out = open_out(&args.out)?;
    write_matrix_csv(&mut out, a.as_matrix()).map_err(CliError::output)?;
    out.flush().map_err(CliError::output)
}

fn cmd_campaign(args: &CampaignArgs) -> CliResult<()> {
    let scheme = parse_scheme(&args.scheme)?;
    let solver = match args.solver {
        Algo::Go => SolverKind::Go,
        Algo::Ipu => SolverKind::Ipu,
        Algo::GoLowrank => SolverKind::GoLowrank,
    };
    let initializer = match args.init {
        InitKind::Random => Initializer::RandomSubspace {
            restarts: args.restarts as usize,
        },
        InitKind::Lowrank => Initializer::LowRankApprox,
    };
    let mut spec = CampaignSpec::new(
        scheme_spec(scheme, args.d, args.n, args.c, args.t, args.seed),
        args.m,
        args.k,
        solver,
        initializer,
    );
    spec.trials = args.trials as usize;
    spec.seed_base = args.seed;
    spec.oracle = !args.no_oracle;
    spec.ridge_eps = args.eps;
    spec.max_iter = args.max_iter as usize;
    spec.oracle_cap = args.max_supports;
    if args.format == Format::Pretty {
        return Err(CliError::usage("campaign output format must be csv or json"));
    }

    let table = run_campaign_with_jobs(&spec, args.jobs).map_err(CliError::solve)?;
    let mut out = open_out(&args.out)?;
    match args.format {
        Format::Json => {
            let text = table.to_json().map_err(CliError::output)?;
            writeln!(out, "{text}").map_err(CliError::output)?;
        }
        _ => table.write_csv(&mut out).map_err(CliError::output)?,
    }
    out.flush().map_err(CliError::output)?;
    eprintln!("{}", table.aggregates.summary_line());
    if table.aggregates.failures > 0 {
        eprintln!("{} trial(s) failed", table.aggregates.failures);
    }
    Ok(())
}

fn cmd_trace(args: &TraceArgs) -> CliResult<()> {
    let a = load_input(&args.input)?;
    let report = run_ipu(&a, &args.iter, args.input.seed)?;
    let mut out = open_out(&args.out)?;
    write_trace_csv(&mut out, &report).map_err(CliError::output)?;
    out.flush().map_err(CliError::output)
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Campaign(a) => cmd_campaign(a),
        Command::Trace(a) => cmd_trace(a),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
