//! Subcommands. Each one validates its flags, runs, writes its outputs and
//! returns a JSON summary for stdout.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use kernel_envelope::{
    fit_interpolant_with, fit_krr_with, fit_svr_with, rkhs_norm_estimate, separation_distance, solve_delta,
    thin_indices, BoundContext, BoundKind, Dataset, FittedModel, GramFactorization, QpOptions, QpSolution,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::experiments;
use crate::io::{self, GridSpec};
use crate::parallel;

#[derive(Debug, Parser)]
#[command(
    name = "kenv",
    version,
    about = "Deterministic error envelopes for kernel regression"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit an interpolant, KRR or SVR model and save it as JSON.
    Fit(FitArgs),
    /// Evaluate an error envelope of a saved model on a query grid.
    Envelope(EnvelopeArgs),
    /// Solve the worst-case noise program for Δ.
    Delta(DeltaArgs),
    /// Estimate Γ from noiseless samples of the ground truth.
    NormEstimate(NormArgs),
    /// Replicate the 1-D three-bound comparison.
    Exp1(ExpArgs),
    /// Replicate the 2-D KRR study on grid and random designs.
    Exp2(ExpArgs),
    /// Drop samples until every pair is at least a given distance apart.
    Thin(ThinArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset CSV with header x1,...,xm,y[,delta_bar].
    #[arg(long)]
    pub data: PathBuf,
    /// Uniform noise bound; replaces or supplies the delta_bar column.
    #[arg(long)]
    pub delta_bar: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitKind {
    Interpolant,
    Krr,
    Svr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundArg {
    NoiseFree,
    Krr,
    Svr,
    Comparison,
}

impl From<BoundArg> for BoundKind {
    fn from(b: BoundArg) -> Self {
        match b {
            BoundArg::NoiseFree => Self::NoiseFree,
            BoundArg::Krr => Self::Krr,
            BoundArg::Svr => Self::Svr,
            BoundArg::Comparison => Self::Comparison,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Kernel JSON file, or an inline JSON object.
    #[arg(long)]
    pub kernel: String,
    #[arg(long, value_enum)]
    pub kind: FitKind,
    /// Ridge parameter, required for KRR.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub tol_qp: Option<f64>,
    /// Model JSON to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnvelopeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Model JSON written by `fit`.
    #[arg(long)]
    pub model: PathBuf,
    /// Upper bound on the RKHS norm of the ground truth.
    #[arg(long)]
    pub gamma: f64,
    /// Query grid, `lo:hi:n` per axis separated by commas.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: GridSpec,
    #[arg(long, value_enum)]
    pub bound: BoundArg,
    /// KRR only: use `P(x)·Γ` as the first term instead of solving for Δ.
    #[arg(long)]
    pub simplified: bool,
    /// Second bound to compare against pointwise.
    #[arg(long, value_enum)]
    pub against: Option<BoundArg>,
    #[arg(long)]
    pub tol_qp: Option<f64>,
    /// Envelope CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DeltaArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub kernel: String,
    #[arg(long)]
    pub tol_qp: Option<f64>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    /// Dataset CSV whose labels are noiseless values of the ground truth.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub kernel: String,
    #[arg(long, default_value_t = 1.0)]
    pub safety_factor: f64,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExpArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Directory for dataset and envelope CSVs.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ThinArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub min_separation: f64,
    /// Thinned dataset CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::input(format!("--{name} must be finite and > 0, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(CliError::input(format!("--{name} must be finite and >= 0, got {v}")))
    }
}

fn qp_options(tol: Option<f64>) -> Result<QpOptions> {
    match tol {
        Some(t) => positive("tol-qp", t).map(|_| QpOptions::with_tol(t)),
        None => Ok(QpOptions::default()),
    }
}

impl RunConfig {
    /// Argument checks that need no file access.
    pub fn validate(&self) -> Result<()> {
        let delta_bar = |d: &DataArgs| d.delta_bar.map_or(Ok(()), |b| non_negative("delta-bar", b));
        match &self.command {
            Command::Fit(a) => {
                delta_bar(&a.data)?;
                qp_options(a.tol_qp)?;
                match (a.kind, a.lambda) {
                    (FitKind::Krr, Some(l)) => positive("lambda", l),
                    (FitKind::Krr, None) => Err(CliError::input("--kind krr requires --lambda")),
                    (_, Some(_)) => Err(CliError::input("--lambda only applies to --kind krr")),
                    (_, None) => Ok(()),
                }
            }
            Command::Envelope(a) => {
                delta_bar(&a.data)?;
                positive("gamma", a.gamma)?;
                qp_options(a.tol_qp)?;
                if a.simplified && a.bound != BoundArg::Krr {
                    return Err(CliError::input("--simplified only applies to --bound krr"));
                }
                if a.against == Some(a.bound) {
                    return Err(CliError::input("--against must name a different bound"));
                }
                Ok(())
            }
            Command::Delta(a) => {
                delta_bar(&a.data)?;
                qp_options(a.tol_qp).map(|_| ())
            }
            Command::NormEstimate(a) => {
                if a.safety_factor.is_finite() && a.safety_factor >= 1.0 {
                    Ok(())
                } else {
                    Err(CliError::input(format!(
                        "--safety-factor must be finite and >= 1, got {}",
                        a.safety_factor
                    )))
                }
            }
            Command::Exp1(_) | Command::Exp2(_) => Ok(()),
            Command::Thin(a) => {
                delta_bar(&a.data)?;
                positive("min-separation", a.min_separation)
            }
        }
    }
}

/// Validates, runs, writes the optional summary file and returns the summary.
pub fn run(config: &RunConfig) -> Result<Value> {
    config.validate()?;
    let (summary, path) = match &config.command {
        Command::Fit(a) => (fit(a)?, &a.summary),
        Command::Envelope(a) => (envelope(a)?, &a.summary),
        Command::Delta(a) => (delta(a)?, &a.summary),
        Command::NormEstimate(a) => (norm_estimate(a)?, &a.summary),
        Command::Exp1(a) => (exp1(a)?, &a.summary),
        Command::Exp2(a) => (exp2(a)?, &a.summary),
        Command::Thin(a) => (thin(a)?, &a.summary),
    };
    if let Some(p) = path {
        io::write_json(p, &summary)?;
    }
    Ok(summary)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("summaries serialize")
}

fn model_summary(model: &FittedModel) -> Value {
    json!({
        "kind": model.kind().name(),
        "n": model.centers().len(),
        "dim": model.centers().dim(),
        "lambda": model.lambda(),
        "rkhs_norm": model.rkhs_norm(),
        "rkhs_norm_sq": model.rkhs_norm_sq(),
        "min_pivot": model.factorization().min_pivot(),
    })
}

fn fit(a: &FitArgs) -> Result<Value> {
    let kernel = io::read_kernel(&a.kernel)?;
    let data = io::read_dataset(&a.data.data, a.data.delta_bar)?;
    let f = data.factorize(&kernel)?;
    let model = match a.kind {
        FitKind::Interpolant => fit_interpolant_with(&data, f)?,
        FitKind::Krr => fit_krr_with(&data, f, a.lambda.expect("validated"))?,
        FitKind::Svr => fit_svr_with(&data, f, qp_options(a.tol_qp)?)?,
    };
    io::write_model(&a.out, &model)?;
    Ok(model_summary(&model))
}

fn delta_solution(data: &Dataset, f: &GramFactorization, tol: Option<f64>) -> Result<QpSolution> {
    let sol = solve_delta(f, data.labels(), data.noise_bounds(), qp_options(tol)?)?;
    if !sol.converged() {
        return Err(kernel_envelope::Error::NotConverged {
            solver: "Δ quadratic program",
            solution: Box::new(sol),
        }
        .into());
    }
    Ok(sol)
}

#[derive(Serialize)]
struct Dominance {
    against: &'static str,
    /// Points where the primary bound is strictly narrower.
    narrower: usize,
    wider: usize,
    ties: usize,
    against_mean_half_width: f64,
}

fn envelope(a: &EnvelopeArgs) -> Result<Value> {
    let data = io::read_dataset(&a.data.data, a.data.delta_bar)?;
    let model = io::read_model(&a.model)?;
    let queries = a.grid.sites()?;
    let kind = BoundKind::from(a.bound);
    let base = BoundContext::new(&data, &model, a.gamma)?;
    let needs_delta = |k: BoundKind| k == BoundKind::Krr && !a.simplified;
    let delta = if needs_delta(kind) || a.against.map(BoundKind::from).is_some_and(needs_delta) {
        Some(delta_solution(&data, model.factorization(), a.tol_qp)?)
    } else {
        None
    };
    let ctx = match &delta {
        Some(sol) => base.with_delta_solution(sol)?,
        None => base,
    };
    let env = parallel::envelope(&ctx, kind, &queries)?;
    io::write_envelope(&a.out, &env)?;

    let dominance = match a.against {
        Some(other) => {
            let other_env = parallel::envelope(&ctx, other.into(), &queries)?;
            let pairs = env.half_width.iter().zip(&other_env.half_width);
            Some(Dominance {
                against: BoundKind::from(other).name(),
                narrower: pairs.clone().filter(|(p, o)| p < o).count(),
                wider: pairs.clone().filter(|(p, o)| p > o).count(),
                ties: pairs.filter(|(p, o)| p == o).count(),
                against_mean_half_width: other_env.mean_half_width(),
            })
        }
        None => None,
    };
    Ok(json!({
        "bound": kind.name(),
        "simplified": a.simplified,
        "n": data.len(),
        "queries": env.len(),
        "gamma": a.gamma,
        "delta": ctx.delta(),
        "model": model_summary(&model),
        "mean_half_width": env.mean_half_width(),
        "mean_thickness": env.mean_thickness(),
        "max_half_width": env.max_half_width(),
        "term_means": env.term_means(),
        "clamped": env.clamped,
        "dominance": dominance.as_ref().map(to_value),
    }))
}

fn delta(a: &DeltaArgs) -> Result<Value> {
    let kernel = io::read_kernel(&a.kernel)?;
    let data = io::read_dataset(&a.data.data, a.data.delta_bar)?;
    let f = data.factorize(&kernel)?;
    let sol = delta_solution(&data, &f, a.tol_qp)?;
    let saturated = sol
        .point
        .iter()
        .zip(data.noise_bounds())
        .filter(|(d, b)| **b > 0.0 && d.abs() == **b)
        .count();
    Ok(json!({
        "delta": sol.objective,
        "iterations": sol.iterations,
        "residual": sol.residual,
        "saturated": saturated,
        "n": data.len(),
        "noise": sol.point,
    }))
}

fn norm_estimate(a: &NormArgs) -> Result<Value> {
    let kernel = io::read_kernel(&a.kernel)?;
    // only the values matter; any delta_bar column is ignored
    let data = io::read_dataset(&a.data, Some(0.0))?;
    let f = data.factorize(&kernel)?;
    let norm = rkhs_norm_estimate(data.labels(), &f, 1.0)?;
    Ok(json!({
        "n": data.len(),
        "interpolant_norm": norm,
        "safety_factor": a.safety_factor,
        "gamma": norm * a.safety_factor,
    }))
}

fn out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.into(),
        source,
    })
}

fn exp1(a: &ExpArgs) -> Result<Value> {
    let (report, envelopes) = experiments::exp1(a.seed)?;
    if let Some(dir) = &a.out {
        out_dir(dir)?;
        for e in &envelopes {
            io::write_dataset(&dir.join(format!("exp1_n{}_data.csv", e.n)), &e.data)?;
            for env in [&e.krr, &e.svr, &e.comparison] {
                io::write_envelope(&dir.join(format!("exp1_n{}_{}.csv", e.n, env.kind.name())), env)?;
            }
        }
    }
    Ok(to_value(&report))
}

fn exp2(a: &ExpArgs) -> Result<Value> {
    let (report, envelopes) = experiments::exp2(a.seed)?;
    if let Some(dir) = &a.out {
        out_dir(dir)?;
        for e in &envelopes {
            io::write_dataset(&dir.join(format!("exp2_{}_data.csv", e.name)), &e.data)?;
            io::write_envelope(&dir.join(format!("exp2_{}_krr.csv", e.name)), &e.krr)?;
        }
    }
    Ok(to_value(&report))
}

fn thin(a: &ThinArgs) -> Result<Value> {
    let data = io::read_dataset(&a.data.data, a.data.delta_bar)?;
    let keep = thin_indices(data.sites(), a.min_separation)?;
    let thinned = data.subset(&keep);
    io::write_dataset(&a.out, &thinned)?;
    let separation = |d: &Dataset| {
        if d.len() < 2 {
            Ok(None)
        } else {
            separation_distance(d.sites()).map(Some)
        }
    };
    Ok(json!({
        "input": data.len(),
        "kept": thinned.len(),
        "removed": data.len() - thinned.len(),
        "separation_before": separation(&data)?,
        "separation_after": separation(&thinned)?,
    }))
}
