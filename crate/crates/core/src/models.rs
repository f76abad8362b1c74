//! The three regressors: minimum-norm interpolant, kernel ridge regression
//! and hard-margin SVR. Every model is a kernel expansion `s(x) = αᵀK_{Xx}`
//! over the data sites.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gram::{GramFactorization, RidgedFactorization};
use crate::kernel::{gram, kernel_vector_wide, KernelSpec, Sites};
use crate::qp::{solve_svr, QpOptions};
use crate::wide::{dot, from_limbs, lift, limbs, lower, to_f64, wide, Wide};

/// Sites, noisy labels and per-sample noise bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    sites: Sites,
    labels: Vec<f64>,
    noise: Vec<f64>,
}

impl Dataset {
    /// Checks lengths, finiteness, `δ̄ ≥ 0` and pairwise distinct sites.
    pub fn new(sites: Sites, labels: Vec<f64>, noise: Vec<f64>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        let n = sites.len();
        for (what, len) in [("labels", labels.len()), ("noise bounds", noise.len())] {
            if len != n {
                return Err(Error::LengthMismatch {
                    what,
                    expected: n,
                    found: len,
                });
            }
        }
        if let Some(bad) = labels.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "label",
                reason: alloc::format!("non-finite value {bad}"),
            });
        }
        if let Some(bad) = noise.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "noise bound",
                reason: alloc::format!("must be finite and ≥ 0, got {bad}"),
            });
        }
        if let Some((first, second, distance)) = sites.find_duplicate() {
            return Err(Error::DuplicateSites {
                first,
                second,
                distance,
            });
        }
        Ok(Self { sites, labels, noise })
    }

    /// Same bound `δ̄` on every sample.
    pub fn with_uniform_noise(sites: Sites, labels: Vec<f64>, noise: f64) -> Result<Self> {
        let n = sites.len();
        Self::new(sites, labels, alloc::vec![noise; n])
    }

    pub fn sites(&self) -> &Sites {
        &self.sites
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn noise_bounds(&self) -> &[f64] {
        &self.noise
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.sites.dim()
    }

    /// Largest noise bound, the uniform level implied by per-sample bounds.
    pub fn max_noise(&self) -> f64 {
        self.noise.iter().fold(0.0, |m: f64, v| m.max(*v))
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            sites: self.sites.subset(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            noise: idx.iter().map(|&i| self.noise[i]).collect(),
        }
    }

    /// Appends one sample, re-checking distinctness.
    pub fn push(&mut self, x: &[f64], label: f64, noise: f64) -> Result<()> {
        let mut sites = self.sites.clone();
        sites.push(x)?;
        let mut labels = self.labels.clone();
        labels.push(label);
        let mut bounds = self.noise.clone();
        bounds.push(noise);
        *self = Self::new(sites, labels, bounds)?;
        Ok(())
    }

    /// Factorizes the Gram matrix of the sites.
    pub fn factorize(&self, kernel: &KernelSpec) -> Result<Arc<GramFactorization>> {
        Ok(Arc::new(GramFactorization::new(gram(kernel, &self.sites)?)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ModelKind {
    Interpolant,
    Krr,
    Svr,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Interpolant => "interpolant",
            Self::Krr => "krr",
            Self::Svr => "svr",
        }
    }
}

/// A fitted kernel expansion.
///
/// Weights and attained values are kept at the working precision of the
/// factorization; [`FittedModel::weights`] and [`FittedModel::attained`]
/// round them to `f64`.
#[derive(Debug, Clone)]
pub struct FittedModel {
    kind: ModelKind,
    alpha: Vec<Wide>,
    values: Vec<Wide>,
    rkhs_norm_sq: f64,
    lambda: Option<f64>,
    factorization: Arc<GramFactorization>,
}

/// Plain-data form of a [`FittedModel`]. Weights and attained values are
/// stored as a leading `f64` plus trailing `f64` corrections (empty when the
/// value is exactly representable) so that a round trip reproduces the model
/// at full working precision.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParts {
    pub kind: ModelKind,
    pub kernel: KernelSpec,
    pub centers: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub weights_tail: Vec<Vec<f64>>,
    pub attained: Vec<f64>,
    pub attained_tail: Vec<Vec<f64>>,
    pub rkhs_norm_sq: f64,
    pub lambda: Option<f64>,
}

fn split(v: &[Wide]) -> (Vec<f64>, Vec<Vec<f64>>) {
    v.iter()
        .map(|&x| {
            let l = limbs(x);
            let used = l.iter().rposition(|&t| t != 0.0).map_or(1, |p| p + 1);
            (l[0], l[1..used.max(1)].to_vec())
        })
        .unzip()
}

fn join(head: &[f64], tail: &[Vec<f64>], what: &'static str) -> Result<Vec<Wide>> {
    if head.len() != tail.len() {
        return Err(Error::LengthMismatch {
            what,
            expected: head.len(),
            found: tail.len(),
        });
    }
    Ok(head.iter().zip(tail).map(|(&h, t)| wide(h) + from_limbs(t)).collect())
}

impl FittedModel {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn weights(&self) -> Vec<f64> {
        lower(&self.alpha)
    }

    /// Model values at the sites: `y` (interpolant), `c` (KRR) or `d` (SVR).
    pub fn attained(&self) -> Vec<f64> {
        lower(&self.values)
    }

    /// `αᵀKα`.
    pub fn rkhs_norm_sq(&self) -> f64 {
        self.rkhs_norm_sq
    }

    pub fn rkhs_norm(&self) -> f64 {
        libm::sqrt(self.rkhs_norm_sq)
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn kernel(&self) -> &KernelSpec {
        self.factorization.kernel()
    }

    pub fn centers(&self) -> &Sites {
        self.factorization.sites()
    }

    pub fn factorization(&self) -> &Arc<GramFactorization> {
        &self.factorization
    }

    pub(crate) fn alpha_wide(&self) -> &[Wide] {
        &self.alpha
    }

    pub(crate) fn values_wide(&self) -> &[Wide] {
        &self.values
    }

    pub(crate) fn predict_with(&self, kx: &[Wide]) -> f64 {
        to_f64(dot(&self.alpha, kx))
    }

    /// `s(x) = αᵀK_{Xx}`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let kx = kernel_vector_wide(self.kernel(), self.centers(), x)?;
        Ok(self.predict_with(&kx))
    }

    pub fn to_parts(&self) -> ModelParts {
        let (weights, weights_tail) = split(&self.alpha);
        let (attained, attained_tail) = split(&self.values);
        ModelParts {
            kind: self.kind,
            kernel: *self.kernel(),
            centers: self.centers().iter().map(|p| p.to_vec()).collect(),
            weights,
            weights_tail,
            attained,
            attained_tail,
            rkhs_norm_sq: self.rkhs_norm_sq,
            lambda: self.lambda,
        }
    }

    /// Rebuilds a model, refactorizing the Gram matrix of its centers.
    pub fn from_parts(parts: ModelParts) -> Result<Self> {
        parts.kernel.validate()?;
        let sites = Sites::from_points(&parts.centers)?;
        let n = sites.len();
        let alpha = join(&parts.weights, &parts.weights_tail, "weight corrections")?;
        let values = join(&parts.attained, &parts.attained_tail, "attained-value corrections")?;
        for (what, len) in [("weights", alpha.len()), ("attained values", values.len())] {
            if len != n {
                return Err(Error::LengthMismatch {
                    what,
                    expected: n,
                    found: len,
                });
            }
        }
        match (parts.kind, parts.lambda) {
            (ModelKind::Krr, Some(l)) if l.is_finite() && l > 0.0 => {}
            (ModelKind::Krr, _) => {
                return Err(Error::InvalidParameter {
                    name: "lambda",
                    reason: "a KRR model needs a finite λ > 0".into(),
                })
            }
            (_, None) => {}
            (_, Some(_)) => {
                return Err(Error::InvalidParameter {
                    name: "lambda",
                    reason: alloc::format!("a {} model has no λ", parts.kind.name()),
                })
            }
        }
        let factorization = Arc::new(GramFactorization::new(gram(&parts.kernel, &sites)?)?);
        Ok(Self {
            kind: parts.kind,
            alpha,
            values,
            rkhs_norm_sq: parts.rkhs_norm_sq,
            lambda: parts.lambda,
            factorization,
        })
    }
}

/// `s(x) = αᵀK_{Xx}`.
pub fn predict(model: &FittedModel, x: &[f64]) -> Result<f64> {
    model.predict(x)
}

fn check_factorization(data: &Dataset, f: &GramFactorization) -> Result<()> {
    if f.sites() != data.sites() {
        return Err(Error::InvalidParameter {
            name: "factorization",
            reason: "built for a different site set".into(),
        });
    }
    Ok(())
}

/// Minimum-norm interpolant `α = K⁻¹y`.
pub fn fit_interpolant(data: &Dataset, kernel: &KernelSpec) -> Result<FittedModel> {
    fit_interpolant_with(data, data.factorize(kernel)?)
}

/// [`fit_interpolant`] reusing an existing factorization of the data sites.
pub fn fit_interpolant_with(data: &Dataset, f: Arc<GramFactorization>) -> Result<FittedModel> {
    check_factorization(data, &f)?;
    let y = lift(data.labels());
    let alpha = f.solve_wide(y.clone());
    let rkhs_norm_sq = to_f64(f.inv_quad_wide(&y));
    Ok(FittedModel {
        kind: ModelKind::Interpolant,
        alpha,
        values: y,
        rkhs_norm_sq,
        lambda: None,
        factorization: f,
    })
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: alloc::format!("must be finite and > 0 (use the interpolant for λ = 0), got {lambda}"),
        });
    }
    Ok(())
}

/// Kernel ridge regression `α* = (K + NλI)⁻¹y`.
pub fn fit_krr(data: &Dataset, kernel: &KernelSpec, lambda: f64) -> Result<FittedModel> {
    check_lambda(lambda)?;
    fit_krr_with(data, data.factorize(kernel)?, lambda)
}

/// [`fit_krr`] reusing an existing factorization of the data sites.
pub fn fit_krr_with(data: &Dataset, f: Arc<GramFactorization>, lambda: f64) -> Result<FittedModel> {
    check_lambda(lambda)?;
    check_factorization(data, &f)?;
    let ridged = RidgedFactorization::new(f.gram(), data.len() as f64 * lambda)?;
    let alpha = ridged.solve_wide(lift(data.labels()));
    let values = f.gram_mul(&alpha);
    let rkhs_norm_sq = to_f64(dot(&alpha, &values)).max(0.0);
    Ok(FittedModel {
        kind: ModelKind::Krr,
        alpha,
        values,
        rkhs_norm_sq,
        lambda: Some(lambda),
        factorization: f,
    })
}

/// Hard-margin SVR: the minimum-norm expansion with `|Kα − y| ≤ δ̄`.
///
/// Requires `δ̄ > 0` on every sample. A solve that does not certify
/// optimality is returned as [`Error::NotConverged`] carrying the flagged
/// solution.
pub fn fit_svr(data: &Dataset, kernel: &KernelSpec, opts: QpOptions) -> Result<FittedModel> {
    fit_svr_with(data, data.factorize(kernel)?, opts)
}

/// [`fit_svr`] reusing an existing factorization of the data sites.
pub fn fit_svr_with(data: &Dataset, f: Arc<GramFactorization>, opts: QpOptions) -> Result<FittedModel> {
    check_factorization(data, &f)?;
    let sol = solve_svr(&f, data.labels(), data.noise_bounds(), opts)?;
    let exact = match (sol.converged(), &sol.exact) {
        (true, Some(exact)) => exact.clone(),
        _ => {
            return Err(Error::NotConverged {
                solver: "SVR quadratic program",
                solution: Box::new(sol),
            })
        }
    };
    let (alpha, values) = (exact.alpha, exact.values);
    let rkhs_norm_sq = to_f64(exact.objective).max(0.0);
    Ok(FittedModel {
        kind: ModelKind::Svr,
        alpha,
        values,
        rkhs_norm_sq,
        lambda: None,
        factorization: f,
    })
}

/// `safety_factor · √(f_Xᵀ K⁻¹ f_X)` from noiseless values `f_X`.
///
/// Without the factor this is the norm of the interpolant of `f_X`, which
/// never exceeds the norm of `f` itself.
pub fn rkhs_norm_estimate(values: &[f64], f: &GramFactorization, safety_factor: f64) -> Result<f64> {
    if !(safety_factor.is_finite() && safety_factor >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "safety factor",
            reason: alloc::format!("must be finite and ≥ 1, got {safety_factor}"),
        });
    }
    let q = f.inv_quad(values)?;
    Ok(safety_factor * libm::sqrt(q.max(0.0)))
}
