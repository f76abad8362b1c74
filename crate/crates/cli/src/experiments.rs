//! Scripted replications of the two reference experiments.
//!
//! * `exp1`: 1-D ground truth `−k(·,0) + 3.5k(·,2) + 1.6k(·,3) + 6k(·,5)` with
//!   the squared-exponential kernel (ℓ = 1) on `[−4, 10]`, `|δ| ≤ 0.15`,
//!   `Γ = 9`, `λ = 0.001`, `N ∈ {20, 100}`. Compares the KRR, SVR and
//!   comparison envelopes.
//! * `exp2`: `f(x) = x₁² − x₂² + 0.8x₁ − 0.6x₂` on `[−5, 5]²`, ℓ = 5.27,
//!   `Γ = 196.1`, `λ = 1e−4`, `|δ| ≤ 0.5`, on a 25×25 grid, 625 uniform
//!   random sites, and the random sites plus 36 boundary points. Reports the
//!   KRR envelope.
//!
//! Noise is uniform on `[−δ̄, δ̄]`. Sites for `exp1` are stratified: one site
//! per equal-width cell, displaced from the cell centre by at most a quarter
//! cell. Every random stream is derived from the user seed.

use std::sync::Arc;

use kernel_envelope::{
    boundary_points, fit_interpolant_with, fit_krr_with, fit_svr_with, rkhs_norm_estimate, sample_grid,
    sample_jittered, sample_uniform, solve_delta, BoundContext, BoundKind, Dataset, DomainBox, ErrorEnvelope,
    FittedModel, GramFactorization, KernelSpec, QpOptions, SampleRng, Sites,
};
use serde::Serialize;

use crate::error::Result;

/// Containment is checked with this floating-point slack relative to `1 + |f|`.
pub const CONTAINMENT_SLACK: f64 = 1e-9;

pub const EXP1_CENTERS: [f64; 4] = [0.0, 2.0, 3.0, 5.0];
pub const EXP1_WEIGHTS: [f64; 4] = [-1.0, 3.5, 1.6, 6.0];
pub const EXP1_GAMMA: f64 = 9.0;
pub const EXP1_LAMBDA: f64 = 1e-3;
pub const EXP1_NOISE: f64 = 0.15;
pub const EXP1_DOMAIN: (f64, f64) = (-4.0, 10.0);
pub const EXP1_SIZES: [usize; 2] = [20, 100];
pub const EXP1_JITTER: f64 = 0.25;
pub const EXP1_QUERIES: usize = 1401;

pub const EXP2_LENGTHSCALE: f64 = 5.27;
pub const EXP2_GAMMA: f64 = 196.1;
pub const EXP2_LAMBDA: f64 = 1e-4;
pub const EXP2_NOISE: f64 = 0.5;
pub const EXP2_DOMAIN: (f64, f64) = (-5.0, 5.0);
pub const EXP2_GRID: usize = 25;
pub const EXP2_EDGE: usize = 10;
pub const EXP2_QUERIES: usize = 41;

/// Distinct stream per experiment component.
fn sub_seed(seed: u64, tag: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ tag.wrapping_mul(0xBF58_476D_1CE4_E5B9)
}

pub fn exp1_truth(x: f64) -> f64 {
    let k = exp1_kernel();
    EXP1_CENTERS
        .iter()
        .zip(EXP1_WEIGHTS)
        .map(|(c, w)| w * kernel_envelope::eval_kernel(&k, &[x], &[*c]).expect("1-D evaluation"))
        .sum()
}

pub fn exp1_kernel() -> KernelSpec {
    KernelSpec::squared_exponential(1.0).expect("positive lengthscale")
}

pub fn exp2_truth(x: &[f64]) -> f64 {
    x[0] * x[0] - x[1] * x[1] + 0.8 * x[0] - 0.6 * x[1]
}

pub fn exp2_kernel() -> KernelSpec {
    KernelSpec::squared_exponential(EXP2_LENGTHSCALE).expect("positive lengthscale")
}

fn noisy(sites: Sites, truth: impl Fn(&[f64]) -> f64, noise: f64, rng: &mut SampleRng) -> Result<Dataset> {
    let labels = sites.iter().map(|x| truth(x) + rng.symmetric(noise)).collect();
    Ok(Dataset::with_uniform_noise(sites, labels, noise)?)
}

/// Mean thickness, containment and dominance of one envelope.
#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeStats {
    pub mean_half_width: f64,
    pub mean_thickness: f64,
    pub max_half_width: f64,
    pub term_means: [f64; 3],
    pub violations: usize,
    pub clamped: usize,
}

impl EnvelopeStats {
    fn new(env: &ErrorEnvelope, truth: &[f64]) -> Self {
        let violations = (0..env.len())
            .filter(|&i| {
                let slack = CONTAINMENT_SLACK * (1.0 + truth[i].abs());
                truth[i] < env.lower[i] - slack || truth[i] > env.upper[i] + slack
            })
            .count();
        Self {
            mean_half_width: env.mean_half_width(),
            mean_thickness: env.mean_thickness(),
            max_half_width: env.max_half_width(),
            term_means: env.term_means(),
            violations,
            clamped: env.clamped,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Exp1Run {
    pub n: usize,
    pub delta: f64,
    pub krr_norm: f64,
    pub svr_norm: f64,
    pub noisy_interpolant_norm: f64,
    pub krr: EnvelopeStats,
    pub svr: EnvelopeStats,
    pub comparison: EnvelopeStats,
    /// Fraction of queries where the comparison half-width exceeds both others.
    pub comparison_dominates: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Exp1Report {
    pub seed: u64,
    pub truth_norm: f64,
    pub runs: Vec<Exp1Run>,
}

/// Envelopes of one `exp1` run, for export.
pub struct Exp1Envelopes {
    pub n: usize,
    pub data: Dataset,
    pub krr: ErrorEnvelope,
    pub svr: ErrorEnvelope,
    pub comparison: ErrorEnvelope,
}

fn exp1_queries() -> Result<Sites> {
    Ok(sample_grid(
        &DomainBox::new(vec![EXP1_DOMAIN.0], vec![EXP1_DOMAIN.1])?,
        &[EXP1_QUERIES],
    )?)
}

pub fn exp1(seed: u64) -> Result<(Exp1Report, Vec<Exp1Envelopes>)> {
    let kernel = exp1_kernel();
    let centers = Sites::from_scalars(&EXP1_CENTERS)?;
    let center_values: Vec<f64> = EXP1_CENTERS.iter().map(|&c| exp1_truth(c)).collect();
    let truth_norm = rkhs_norm_estimate(&center_values, &GramFactorization::from_sites(&kernel, &centers)?, 1.0)?;

    let domain = DomainBox::new(vec![EXP1_DOMAIN.0], vec![EXP1_DOMAIN.1])?;
    let queries = exp1_queries()?;
    let truth: Vec<f64> = queries.iter().map(|x| exp1_truth(x[0])).collect();
    let mut runs = Vec::new();
    let mut envelopes = Vec::new();
    for &n in &EXP1_SIZES {
        let sites = sample_jittered(&domain, &[n], EXP1_JITTER, sub_seed(seed, n as u64))?;
        let mut rng = SampleRng::new(sub_seed(seed, 1000 + n as u64));
        let data = noisy(sites, |x| exp1_truth(x[0]), EXP1_NOISE, &mut rng)?;
        let f = data.factorize(&kernel)?;
        let out = run_noisy(&data, &f, EXP1_GAMMA, EXP1_LAMBDA, &queries, true)?;
        let svr = out.svr.expect("requested");
        let comparison = out.comparison.expect("requested");
        let dominates = (0..queries.len())
            .filter(|&i| {
                comparison.half_width[i] > out.krr.half_width[i] && comparison.half_width[i] > svr.half_width[i]
            })
            .count() as f64
            / queries.len() as f64;
        runs.push(Exp1Run {
            n,
            delta: out.delta,
            krr_norm: out.krr_model.rkhs_norm(),
            svr_norm: out.svr_model.as_ref().map_or(0.0, FittedModel::rkhs_norm),
            noisy_interpolant_norm: out.noisy_norm,
            krr: EnvelopeStats::new(&out.krr, &truth),
            svr: EnvelopeStats::new(&svr, &truth),
            comparison: EnvelopeStats::new(&comparison, &truth),
            comparison_dominates: dominates,
        });
        envelopes.push(Exp1Envelopes {
            n,
            data,
            krr: out.krr,
            svr,
            comparison,
        });
    }
    Ok((Exp1Report { seed, truth_norm, runs }, envelopes))
}

struct NoisyRun {
    delta: f64,
    delta_certified: bool,
    noisy_norm: f64,
    krr_model: FittedModel,
    svr_model: Option<FittedModel>,
    krr: ErrorEnvelope,
    svr: Option<ErrorEnvelope>,
    comparison: Option<ErrorEnvelope>,
}

/// KRR envelope with `Δ` (falling back to the `P·Γ` first term if the Δ
/// program does not certify), plus optionally SVR and comparison envelopes.
fn run_noisy(
    data: &Dataset,
    f: &Arc<GramFactorization>,
    gamma: f64,
    lambda: f64,
    queries: &Sites,
    all: bool,
) -> Result<NoisyRun> {
    let interp = fit_interpolant_with(data, f.clone())?;
    let krr_model = fit_krr_with(data, f.clone(), lambda)?;
    let sol = solve_delta(f, data.labels(), data.noise_bounds(), QpOptions::default())?;
    let base = BoundContext::new(data, &krr_model, gamma)?;
    let ctx = if sol.converged() {
        base.with_delta_solution(&sol)?
    } else {
        base
    };
    let krr = crate::parallel::envelope(&ctx, BoundKind::Krr, queries)?;
    let (svr_model, svr, comparison) = if all {
        let svr_model = fit_svr_with(data, f.clone(), QpOptions::default())?;
        let svr = crate::parallel::envelope(&BoundContext::new(data, &svr_model, gamma)?, BoundKind::Svr, queries)?;
        let comparison = crate::parallel::envelope(
            &BoundContext::new(data, &krr_model, gamma)?,
            BoundKind::Comparison,
            queries,
        )?;
        (Some(svr_model), Some(svr), Some(comparison))
    } else {
        (None, None, None)
    };
    Ok(NoisyRun {
        delta: sol.objective,
        delta_certified: sol.converged(),
        noisy_norm: interp.rkhs_norm(),
        krr_model,
        svr_model,
        krr,
        svr,
        comparison,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Exp2Run {
    pub name: &'static str,
    pub n: usize,
    pub min_pivot: f64,
    pub delta: f64,
    pub delta_certified: bool,
    /// `safety · ‖interpolant of noiseless f_X‖` with safety factor 1.
    pub norm_estimate: f64,
    pub krr_norm: f64,
    pub krr: EnvelopeStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct Exp2Report {
    pub seed: u64,
    pub runs: Vec<Exp2Run>,
}

pub struct Exp2Envelope {
    pub name: &'static str,
    pub data: Dataset,
    pub krr: ErrorEnvelope,
}

pub fn exp2(seed: u64) -> Result<(Exp2Report, Vec<Exp2Envelope>)> {
    let kernel = exp2_kernel();
    let domain = DomainBox::cube(EXP2_DOMAIN.0, EXP2_DOMAIN.1, 2)?;
    let queries = sample_grid(&domain, &[EXP2_QUERIES, EXP2_QUERIES])?;
    let truth: Vec<f64> = queries.iter().map(exp2_truth).collect();

    let grid = sample_grid(&domain, &[EXP2_GRID, EXP2_GRID])?;
    let random = sample_uniform(&domain, EXP2_GRID * EXP2_GRID, sub_seed(seed, 1))?;
    let mut augmented = random.clone();
    for p in boundary_points(&domain, EXP2_EDGE)?.iter() {
        augmented.push(p)?;
    }
    let designs = [("grid", grid), ("random", random), ("random+boundary", augmented)];

    let mut runs = Vec::new();
    let mut envelopes = Vec::new();
    for (k, (name, sites)) in designs.into_iter().enumerate() {
        // the same noise stream for the shared random sites
        let mut rng = SampleRng::new(sub_seed(seed, 100 + k.min(1) as u64));
        let data = noisy(sites, exp2_truth, EXP2_NOISE, &mut rng)?;
        let f = data.factorize(&kernel)?;
        let clean: Vec<f64> = data.sites().iter().map(exp2_truth).collect();
        let norm_estimate = rkhs_norm_estimate(&clean, &f, 1.0)?;
        let out = run_noisy(&data, &f, EXP2_GAMMA, EXP2_LAMBDA, &queries, false)?;
        runs.push(Exp2Run {
            name,
            n: data.len(),
            min_pivot: f.min_pivot(),
            delta: out.delta,
            delta_certified: out.delta_certified,
            norm_estimate,
            krr_norm: out.krr_model.rkhs_norm(),
            krr: EnvelopeStats::new(&out.krr, &truth),
        });
        envelopes.push(Exp2Envelope {
            name,
            data,
            krr: out.krr,
        });
    }
    Ok((Exp2Report { seed, runs }, envelopes))
}
