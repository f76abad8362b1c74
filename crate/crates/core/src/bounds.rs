//! Deterministic error envelopes `[s(x) − e(x), s(x) + e(x)]`.
//!
//! Every half-width has the shape
//!
//! ```text
//! e(x) = P(x)·√R  +  δ̄ᵀ|K⁻¹K_{Xx}|  +  residual(x)
//! ```
//!
//! with a model-specific radicand `R` and residual term:
//!
//! | bound        | radicand `R`              | residual                 |
//! |--------------|---------------------------|--------------------------|
//! | noise-free   | `Γ² − ‖s̄‖²`               | 0                        |
//! | KRR          | `Γ² + Δ − ‖s̃‖²` (or `Γ²`) | `|yᵀ(K + KK/(Nλ))⁻¹K_{Xx}|` |
//! | SVR          | `Γ² − ‖s⋆‖²`              | `|(d − y)ᵀK⁻¹K_{Xx}|`      |
//!
//! `s̄` is the interpolant of noiseless values and `s̃` the interpolant of the
//! noisy labels. The comparison bound `σ(x)·√(Γ² − yᵀ(K + δ̃²I)⁻¹y + N)` around
//! the regularized interpolant `yᵀ(K + δ̃²I)⁻¹K_{Xx}` uses a uniform noise
//! level and carries its whole width in the first term.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gram::{clamp_power, GramFactorization, RidgedFactorization};
use crate::kernel::{gram, KernelSpec, Sites};
use crate::models::{Dataset, FittedModel, ModelKind};
use crate::qp::QpSolution;
use crate::wide::{dot, lift, to_f64, wide, Wide, ZERO};

/// Negative radicands down to `−RADICAND_SLACK · Γ²` are roundoff and clamp
/// to zero; anything lower falsifies the norm bound.
pub const RADICAND_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    NoiseFree,
    Krr,
    Svr,
    Comparison,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::NoiseFree => "noise-free",
            Self::Krr => "krr",
            Self::Svr => "svr",
            Self::Comparison => "comparison",
        }
    }

    fn model_kind(self) -> Option<ModelKind> {
        match self {
            Self::NoiseFree => Some(ModelKind::Interpolant),
            Self::Krr => Some(ModelKind::Krr),
            Self::Svr => Some(ModelKind::Svr),
            Self::Comparison => None,
        }
    }
}

/// Everything a bound needs besides the query point.
///
/// Without `Δ` the KRR bound uses the simplified first term `P(x)·Γ`.
#[derive(Debug, Clone, Copy)]
pub struct BoundContext<'a> {
    pub data: &'a Dataset,
    pub model: &'a FittedModel,
    gamma: f64,
    delta: Option<Wide>,
    noise_level: Option<f64>,
}

impl<'a> BoundContext<'a> {
    pub fn new(data: &'a Dataset, model: &'a FittedModel, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if data.sites() != model.centers() {
            return Err(Error::InvalidParameter {
                name: "model",
                reason: "fitted on a different site set than the dataset".into(),
            });
        }
        Ok(Self {
            data,
            model,
            gamma,
            delta: None,
            noise_level: None,
        })
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "Δ",
                reason: alloc::format!("must be finite and ≥ 0, got {delta}"),
            });
        }
        self.delta = Some(wide(delta));
        Ok(self)
    }

    /// Takes `Δ` from a solver result, refusing uncertified ones.
    pub fn with_delta_solution(mut self, sol: &QpSolution) -> Result<Self> {
        if !sol.converged() {
            return Err(Error::NotConverged {
                solver: "Δ quadratic program",
                solution: alloc::boxed::Box::new(sol.clone()),
            });
        }
        match &sol.exact {
            Some(exact) => {
                self.delta = Some(exact.objective);
                Ok(self)
            }
            None => self.with_delta(sol.objective),
        }
    }

    /// Uniform noise level `δ̃` for the comparison bound; defaults to the
    /// largest per-sample bound.
    pub fn with_noise_level(mut self, level: f64) -> Result<Self> {
        check_noise_level(level)?;
        self.noise_level = Some(level);
        Ok(self)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> Option<f64> {
        self.delta.map(to_f64)
    }

    pub fn noise_level(&self) -> f64 {
        self.noise_level.unwrap_or_else(|| self.data.max_noise())
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "Γ",
            reason: alloc::format!("must be finite and > 0, got {gamma}"),
        });
    }
    Ok(())
}

fn check_noise_level(level: f64) -> Result<()> {
    if !(level.is_finite() && level > 0.0) {
        return Err(Error::InvalidParameter {
            name: "noise level",
            reason: alloc::format!("must be finite and > 0, got {level}"),
        });
    }
    Ok(())
}

/// One evaluation with its per-term breakdown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointBound {
    pub nominal: f64,
    pub half_width: f64,
    pub term_power: f64,
    pub term_lebesgue: f64,
    pub term_residual: f64,
    /// A small negative power-function radicand was clamped to zero.
    pub clamped: bool,
}

/// `√R` with roundoff clamping. Returns the root and whether it clamped.
fn radicand_root(r: f64, gamma: f64) -> Result<(f64, bool)> {
    if r >= 0.0 {
        Ok((libm::sqrt(r), false))
    } else if r >= -RADICAND_SLACK * gamma * gamma {
        Ok((0.0, true))
    } else {
        Err(Error::NormBoundViolated { radicand: r })
    }
}

enum Residual {
    None,
    /// `Nλ · |α*ᵀ K⁻¹K_{Xx}|`
    Ridge {
        scale: Wide,
    },
    /// `|(d − y)ᵀ K⁻¹K_{Xx}|`
    Margin {
        offsets: Vec<Wide>,
    },
}

enum Width<'a> {
    Power {
        f: &'a GramFactorization,
        noise: Vec<Wide>,
        residual: Residual,
    },
    Deviation {
        ridged: RidgedFactorization,
        weights: Vec<Wide>,
    },
}

/// A bound with all query-independent work done. Evaluation is read-only,
/// so one prepared bound can serve several threads.
pub struct PreparedBound<'a> {
    kind: BoundKind,
    model: &'a FittedModel,
    width: Width<'a>,
    root: f64,
    root_clamped: bool,
}

impl<'a> PreparedBound<'a> {
    pub fn new(ctx: &BoundContext<'a>, kind: BoundKind) -> Result<Self> {
        if let Some(expected) = kind.model_kind() {
            if ctx.model.kind() != expected {
                return Err(Error::WrongModelKind {
                    expected: kind.name(),
                    found: ctx.model.kind().name(),
                });
            }
        }
        let gamma = ctx.gamma;
        let g2 = gamma * gamma;
        let f = ctx.model.factorization().as_ref();
        let noise = lift(ctx.data.noise_bounds());
        let require_positive_noise = || {
            if ctx.data.noise_bounds().iter().any(|&b| b <= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "noise bound",
                    reason: alloc::format!("the {} bound needs δ̄ > 0 on every sample", kind.name()),
                });
            }
            Ok(())
        };
        let (width, radicand) = match kind {
            BoundKind::NoiseFree => (
                Width::Power {
                    f,
                    noise: alloc::vec![ZERO; noise.len()],
                    residual: Residual::None,
                },
                g2 - ctx.model.rkhs_norm_sq(),
            ),
            BoundKind::Krr => {
                require_positive_noise()?;
                let lambda = ctx.model.lambda().unwrap_or(0.0);
                let radicand = match ctx.delta {
                    None => g2,
                    Some(delta) => {
                        // ‖s̃‖² and Δ can both exceed Γ² by many orders of magnitude
                        let noisy_sq = f.inv_quad_wide(&lift(ctx.data.labels()));
                        to_f64(wide(gamma) * wide(gamma) + delta - noisy_sq)
                    }
                };
                let scale = wide(ctx.data.len() as f64) * wide(lambda);
                (
                    Width::Power {
                        f,
                        noise,
                        residual: Residual::Ridge { scale },
                    },
                    radicand,
                )
            }
            BoundKind::Svr => {
                require_positive_noise()?;
                let offsets = ctx
                    .model
                    .values_wide()
                    .iter()
                    .zip(ctx.data.labels())
                    .map(|(&d, &y)| d - wide(y))
                    .collect();
                (
                    Width::Power {
                        f,
                        noise,
                        residual: Residual::Margin { offsets },
                    },
                    g2 - ctx.model.rkhs_norm_sq(),
                )
            }
            BoundKind::Comparison => {
                let level = ctx.noise_level();
                check_noise_level(level)?;
                let ridged = RidgedFactorization::with_noise(f.gram(), level)?;
                let y = lift(ctx.data.labels());
                let quad = to_f64(ridged.inv_quad_wide(&y));
                let weights = ridged.solve_wide(y);
                let radicand = g2 - quad + ctx.data.len() as f64;
                (Width::Deviation { ridged, weights }, radicand)
            }
        };
        let (root, root_clamped) = radicand_root(radicand, gamma)?;
        Ok(Self {
            kind,
            model: ctx.model,
            width,
            root,
            root_clamped,
        })
    }

    pub fn kind(&self) -> BoundKind {
        self.kind
    }

    pub fn eval(&self, x: &[f64]) -> Result<PointBound> {
        match &self.width {
            Width::Power { f, noise, residual } => {
                let q = f.query(x)?;
                let p = clamp_power(q.power_sq, to_f64(f.kernel().diag()))?;
                let term_power = p.value * self.root;
                let term_lebesgue = to_f64(
                    noise
                        .iter()
                        .zip(&q.weights)
                        .fold(ZERO, |acc, (&b, &w)| acc + b * w.abs()),
                );
                let term_residual = match residual {
                    Residual::None => 0.0,
                    Residual::Ridge { scale } => to_f64((*scale * dot(self.model.alpha_wide(), &q.weights)).abs()),
                    Residual::Margin { offsets } => to_f64(dot(offsets, &q.weights).abs()),
                };
                Ok(PointBound {
                    nominal: self.model.predict_with(&q.kx),
                    half_width: term_power + term_lebesgue + term_residual,
                    term_power,
                    term_lebesgue,
                    term_residual,
                    clamped: p.clamped || self.root_clamped,
                })
            }
            Width::Deviation { ridged, weights } => {
                let (s2, kx) = ridged.deviation_sq(x)?;
                let sigma = clamp_power(s2, 1.0)?;
                let term_power = sigma.value * self.root;
                Ok(PointBound {
                    nominal: to_f64(dot(weights, &kx)),
                    half_width: term_power,
                    term_power,
                    term_lebesgue: 0.0,
                    term_residual: 0.0,
                    clamped: sigma.clamped || self.root_clamped,
                })
            }
        }
    }
}

/// Bound of the selected kind at one point, with its breakdown.
pub fn point_bound(ctx: &BoundContext, kind: BoundKind, x: &[f64]) -> Result<PointBound> {
    PreparedBound::new(ctx, kind)?.eval(x)
}

/// `P(x)·√(Γ² − ‖s̄‖²)` for an interpolant of noiseless values.
pub fn bound_noise_free(model: &FittedModel, gamma: f64, x: &[f64]) -> Result<f64> {
    check_gamma(gamma)?;
    if model.kind() != ModelKind::Interpolant {
        return Err(Error::WrongModelKind {
            expected: BoundKind::NoiseFree.name(),
            found: model.kind().name(),
        });
    }
    let (root, _) = radicand_root(gamma * gamma - model.rkhs_norm_sq(), gamma)?;
    Ok(model.factorization().power_function(x)? * root)
}

/// KRR half-width; the simplified `P(x)·Γ` first term when `Δ` is absent.
pub fn bound_krr(ctx: &BoundContext, x: &[f64]) -> Result<PointBound> {
    point_bound(ctx, BoundKind::Krr, x)
}

/// SVR half-width.
pub fn bound_svr(ctx: &BoundContext, x: &[f64]) -> Result<PointBound> {
    point_bound(ctx, BoundKind::Svr, x)
}

/// `σ(x)·√(Γ² − yᵀ(K + δ̃²I)⁻¹y + N)` for a uniform noise level `δ̃ > 0`.
pub fn bound_comparison(data: &Dataset, kernel: &KernelSpec, gamma: f64, noise_level: f64, x: &[f64]) -> Result<f64> {
    check_gamma(gamma)?;
    check_noise_level(noise_level)?;
    let g = gram(kernel, data.sites())?;
    let ridged = RidgedFactorization::with_noise(&g, noise_level)?;
    let quad = to_f64(ridged.inv_quad_wide(&lift(data.labels())));
    let (root, _) = radicand_root(gamma * gamma - quad + data.len() as f64, gamma)?;
    Ok(ridged.deviation(x)? * root)
}

/// A bound evaluated over a list of query points.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorEnvelope {
    pub kind: BoundKind,
    pub queries: Sites,
    pub nominal: Vec<f64>,
    pub half_width: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub term_power: Vec<f64>,
    pub term_lebesgue: Vec<f64>,
    pub term_residual: Vec<f64>,
    /// Number of points where a small negative radicand was clamped.
    pub clamped: usize,
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

impl ErrorEnvelope {
    pub fn len(&self) -> usize {
        self.nominal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nominal.is_empty()
    }

    pub fn mean_half_width(&self) -> f64 {
        mean(&self.half_width)
    }

    /// Mean of `upper − lower`.
    pub fn mean_thickness(&self) -> f64 {
        2.0 * self.mean_half_width()
    }

    pub fn max_half_width(&self) -> f64 {
        self.half_width.iter().fold(0.0, |m: f64, v| m.max(*v))
    }

    /// Means of the power, Lebesgue and residual terms.
    pub fn term_means(&self) -> [f64; 3] {
        [
            mean(&self.term_power),
            mean(&self.term_lebesgue),
            mean(&self.term_residual),
        ]
    }

    /// Assembles an envelope from per-point evaluations in query order.
    pub fn from_points(kind: BoundKind, queries: Sites, points: &[PointBound]) -> Self {
        Self {
            kind,
            queries,
            nominal: points.iter().map(|b| b.nominal).collect(),
            half_width: points.iter().map(|b| b.half_width).collect(),
            lower: points.iter().map(|b| b.nominal - b.half_width).collect(),
            upper: points.iter().map(|b| b.nominal + b.half_width).collect(),
            term_power: points.iter().map(|b| b.term_power).collect(),
            term_lebesgue: points.iter().map(|b| b.term_lebesgue).collect(),
            term_residual: points.iter().map(|b| b.term_residual).collect(),
            clamped: points.iter().filter(|b| b.clamped).count(),
        }
    }

    /// Indices where `values` falls outside `[lower, upper]` by more than `slack`.
    pub fn violations(&self, values: &[f64], slack: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| values[i] < self.lower[i] - slack || values[i] > self.upper[i] + slack)
            .collect()
    }
}

/// Evaluates `kind` at every query point.
pub fn envelope(ctx: &BoundContext, kind: BoundKind, queries: &Sites) -> Result<ErrorEnvelope> {
    if queries.dim() != ctx.data.dim() {
        return Err(Error::DimensionMismatch {
            expected: ctx.data.dim(),
            found: queries.dim(),
        });
    }
    let prepared = PreparedBound::new(ctx, kind)?;
    let points = queries.iter().map(|x| prepared.eval(x)).collect::<Result<Vec<_>>>()?;
    Ok(ErrorEnvelope::from_points(kind, queries.clone(), &points))
}

/// Pointwise intersection of two envelopes on the same query points.
#[derive(Debug, Clone, PartialEq)]
pub struct Intersection {
    pub queries: Sites,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// `[max(lowers), min(uppers)]`. An empty interval proves `Γ` or `δ̄` wrong
/// and is reported as [`Error::EmptyIntersection`] naming the first such
/// point.
pub fn intersect_envelopes(a: &ErrorEnvelope, b: &ErrorEnvelope) -> Result<Intersection> {
    if a.queries != b.queries {
        return Err(Error::InvalidParameter {
            name: "query grid",
            reason: "envelopes must share identical query points".into(),
        });
    }
    let lower: Vec<f64> = a.lower.iter().zip(&b.lower).map(|(x, y)| x.max(*y)).collect();
    let upper: Vec<f64> = a.upper.iter().zip(&b.upper).map(|(x, y)| x.min(*y)).collect();
    if let Some(index) = (0..lower.len()).find(|&i| lower[i] > upper[i]) {
        return Err(Error::EmptyIntersection {
            index,
            lower: lower[index],
            upper: upper[index],
        });
    }
    Ok(Intersection {
        queries: a.queries.clone(),
        lower,
        upper,
    })
}
