//! Monte-Carlo experiment harness.
//!
//! Trial `i` of a campaign uses seed `seed_base + i`. The covariance is drawn
//! from stream 0 of `ChaCha8Rng::seed_from_u64(seed)` and random initial
//! subspaces from stream 1 of the same seed, restart after restart, so a
//! campaign with `R` restarts sees a prefix of the draws of one with `R + 1`.
//! Trials run in parallel and are merged in trial order.

use std::fmt;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FspcaError, Result};
use crate::matcore::SymMat;
use crate::metrics::{best_intersection_ratio, normalized_explained_variance, relative_error, HIT_THRESHOLD};
use crate::oracle::{binomial, brute_force_with_cap, DEFAULT_SUPPORT_CAP};
use crate::solver::{
    check_sizes, go, go_lowrank_init, ipu, random_subspace_init, SolveReport, SolverConfig,
    SubspaceEstimate,
};
use crate::synth::{format_f64, make_covariance, SchemeSpec};

pub const TRIALS_SCHEMA: &str = "fspca-trials/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Diagonal selection on `A` itself; takes no initial estimate.
    Go,
    /// Iterative proxy update from the chosen initializer.
    Ipu,
    /// Diagonal selection on the best rank-`m` approximation.
    GoLowrank,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Initializer {
    RandomSubspace { restarts: usize },
    LowRankApprox,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec {
    /// The scheme's own seed is ignored; each trial reseeds it.
    pub scheme: SchemeSpec,
    pub m: usize,
    pub k: usize,
    pub solver: SolverKind,
    pub initializer: Initializer,
    pub trials: usize,
    pub seed_base: u64,
    pub oracle: bool,
    pub ridge_eps: f64,
    pub max_iter: usize,
    pub oracle_cap: u128,
}

impl CampaignSpec {
    pub fn new(scheme: SchemeSpec, m: usize, k: usize, solver: SolverKind, initializer: Initializer) -> Self {
        Self {
            scheme,
            m,
            k,
            solver,
            initializer,
            trials: 100,
            seed_base: 0,
            oracle: true,
            ridge_eps: 0.1,
            max_iter: 100,
            oracle_cap: DEFAULT_SUPPORT_CAP,
        }
    }

    pub fn d(&self) -> usize {
        self.scheme.d
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        check_sizes(self.d(), self.m, self.k)?;
        if self.trials == 0 {
            return Err(FspcaError::InvalidInput("trials must be at least 1".into()));
        }
        if let Initializer::RandomSubspace { restarts: 0 } = self.initializer {
            return Err(FspcaError::InvalidInput("restarts must be at least 1".into()));
        }
        if self.oracle {
            let count = binomial(self.d(), self.k);
            if count > self.oracle_cap {
                return Err(FspcaError::CombinatorialCap {
                    d: self.d(),
                    k: self.k,
                    count,
                    cap: self.oracle_cap,
                });
            }
        }
        Ok(())
    }

    fn solver_config(&self, seed: u64) -> SolverConfig {
        SolverConfig::new(self.m, self.k)
            .with_ridge(self.ridge_eps)
            .with_max_iter(self.max_iter)
            .with_seed(seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub objective: Option<f64>,
    pub nev: Option<f64>,
    pub iterations: Option<usize>,
    pub oracle_objective: Option<f64>,
    pub ir: Option<f64>,
    pub re: Option<f64>,
    pub hit: Option<bool>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub std_err: f64,
}

impl Stat {
    /// Sample mean, sample standard deviation (n - 1) and `std_dev / sqrt(n)`.
    pub fn from_values(values: &[f64]) -> Option<Stat> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std_dev = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Stat {
            n,
            mean,
            std_dev,
            std_err: std_dev / (n as f64).sqrt(),
        })
    }
}

impl fmt::Display for Stat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}({:.2})", self.mean, self.std_err)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub ir: Option<Stat>,
    pub re: Option<Stat>,
    pub hf: Option<Stat>,
    pub objective: Option<Stat>,
    pub nev: Option<Stat>,
    pub failures: usize,
}

impl Aggregates {
    pub fn from_rows(rows: &[TrialRecord]) -> Self {
        let collect = |f: &dyn Fn(&TrialRecord) -> Option<f64>| -> Vec<f64> {
            rows.iter().filter_map(f).collect()
        };
        Aggregates {
            ir: Stat::from_values(&collect(&|r| r.ir)),
            re: Stat::from_values(&collect(&|r| r.re)),
            hf: Stat::from_values(&collect(&|r| r.hit.map(|h| if h { 1.0 } else { 0.0 }))),
            objective: Stat::from_values(&collect(&|r| r.objective)),
            nev: Stat::from_values(&collect(&|r| r.nev)),
            failures: rows.iter().filter(|r| r.error.is_some()).count(),
        }
    }

    /// `IR mean(se) | RE mean(se) | HF mean`.
    pub fn summary_line(&self) -> String {
        let show = |s: &Option<Stat>| s.as_ref().map_or("n/a".to_string(), |s| s.to_string());
        let hf = self
            .hf
            .as_ref()
            .map_or("n/a".to_string(), |s| format!("{:.2}", s.mean));
        format!("IR {} | RE {} | HF {}", show(&self.ir), show(&self.re), hf)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialTable {
    pub schema: String,
    pub spec: CampaignSpec,
    pub rows: Vec<TrialRecord>,
    pub aggregates: Aggregates,
}

impl TrialTable {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| FspcaError::InvalidInput(format!("serialization failed: {e}")))
    }

    /// One row per trial, then `mean`, `std_err`, `std_dev` and `failures` footer rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        let io = |e: csv::Error| FspcaError::Io(std::io::Error::other(e));
        w.write_record([
            "trial",
            "seed",
            "objective",
            "nev",
            "iterations",
            "oracle_objective",
            "ir",
            "re",
            "hit",
            "error",
        ])
        .map_err(io)?;
        let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.trial.to_string(),
                r.seed.to_string(),
                opt(r.objective),
                opt(r.nev),
                r.iterations.map(|i| i.to_string()).unwrap_or_default(),
                opt(r.oracle_objective),
                opt(r.ir),
                opt(r.re),
                r.hit.map(|h| u8::from(h).to_string()).unwrap_or_default(),
                r.error.clone().unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        let a = &self.aggregates;
        let pick = |s: &Option<Stat>, f: fn(&Stat) -> f64| s.as_ref().map(|s| format_f64(f(s))).unwrap_or_default();
        for (label, f) in [
            ("mean", (|s: &Stat| s.mean) as fn(&Stat) -> f64),
            ("std_err", |s: &Stat| s.std_err),
            ("std_dev", |s: &Stat| s.std_dev),
        ] {
            w.write_record([
                label.to_string(),
                String::new(),
                pick(&a.objective, f),
                pick(&a.nev, f),
                String::new(),
                String::new(),
                pick(&a.ir, f),
                pick(&a.re, f),
                pick(&a.hf, f),
                String::new(),
            ])
            .map_err(io)?;
        }
        w.write_record(["failures".to_string(), a.failures.to_string()])
            .map_err(io)?;
        w.flush()?;
        Ok(())
    }
}

fn init_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Runs the configured solver on `a` and returns the estimate and iteration count.
pub fn run_solver(a: &SymMat, spec: &CampaignSpec, seed: u64) -> Result<(SubspaceEstimate, usize)> {
    let (m, k) = (spec.m, spec.k);
    match spec.solver {
        SolverKind::Go => Ok((go(a, m, k)?, 0)),
        SolverKind::GoLowrank => Ok((go_lowrank_init(a, m, k)?, 0)),
        SolverKind::Ipu => {
            let cfg = spec.solver_config(seed);
            match spec.initializer {
                Initializer::LowRankApprox => {
                    let rep = ipu(a, &cfg, &go_lowrank_init(a, m, k)?)?;
                    Ok((rep.estimate, rep.iterations))
                }
                Initializer::RandomSubspace { restarts } => {
                    let rep = best_of_restarts(a, &cfg, restarts, seed)?;
                    Ok((rep.estimate, rep.iterations))
                }
            }
        }
    }
}

/// Best (first maximal) final objective over `restarts` random starts.
pub fn best_of_restarts(a: &SymMat, cfg: &SolverConfig, restarts: usize, seed: u64) -> Result<SolveReport> {
    let mut rng = init_rng(seed);
    let mut best: Option<SolveReport> = None;
    for _ in 0..restarts {
        let w0 = random_subspace_init(a.dim(), cfg.m, cfg.k, &mut rng)?;
        let rep = ipu(a, cfg, &w0)?;
        if best.as_ref().is_none_or(|b| rep.objective() > b.objective()) {
            best = Some(rep);
        }
    }
    best.ok_or_else(|| FspcaError::InvalidInput("restarts must be at least 1".into()))
}

fn run_trial(spec: &CampaignSpec, trial: usize) -> TrialRecord {
    let seed = spec.seed_base.wrapping_add(trial as u64);
    let mut rec = TrialRecord {
        trial,
        seed,
        objective: None,
        nev: None,
        iterations: None,
        oracle_objective: None,
        ir: None,
        re: None,
        hit: None,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let a = make_covariance(&spec.scheme.with_seed(seed))?;
        let (w, iters) = run_solver(&a, spec, seed)?;
        let obj = w.objective(&a)?;
        rec.objective = Some(obj);
        rec.nev = Some(normalized_explained_variance(&a, &w, spec.m)?);
        rec.iterations = Some(iters);
        if spec.oracle {
            let orc = brute_force_with_cap(&a, spec.m, spec.k, spec.oracle_cap)?;
            rec.oracle_objective = Some(orc.optimal_objective);
            rec.ir = Some(best_intersection_ratio(w.support(), &orc.ties)?);
            let re = relative_error(obj, orc.optimal_objective)?;
            rec.re = Some(re);
            rec.hit = Some(re <= HIT_THRESHOLD);
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        rec.error = Some(e.to_string());
    }
    rec
}

/// Runs every trial on the current rayon pool.
pub fn run_campaign(spec: &CampaignSpec) -> Result<TrialTable> {
    spec.validate()?;
    let rows: Vec<TrialRecord> = (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(spec, t))
        .collect();
    let aggregates = Aggregates::from_rows(&rows);
    Ok(TrialTable {
        schema: TRIALS_SCHEMA.to_string(),
        spec: spec.clone(),
        rows,
        aggregates,
    })
}

/// [`run_campaign`] on a dedicated pool of `jobs` threads.
pub fn run_campaign_with_jobs(spec: &CampaignSpec, jobs: usize) -> Result<TrialTable> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| FspcaError::InvalidInput(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_campaign(spec))
}

/// Full [`ipu`] report for convergence-trace export.
pub fn capture_trace(a: &SymMat, cfg: &SolverConfig, init: &SubspaceEstimate) -> Result<SolveReport> {
    ipu(a, cfg, init)
}

/// `iter,objective,support_changed`; row 0 is the initial estimate.
pub fn write_trace_csv<W: Write>(out: &mut W, report: &SolveReport) -> Result<()> {
    writeln!(out, "iter,objective,support_changed")?;
    for (t, obj) in report.objective_trace.iter().enumerate() {
        let changed = t > 0 && report.support_history[t] != report.support_history[t - 1];
        writeln!(out, "{t},{},{}", format_f64(*obj), u8::from(changed))?;
    }
    Ok(())
}
