//! Cholesky factorization of the Gram matrix and the geometric quantities
//! built on it: the power function, the Lebesgue function and the posterior
//! deviation of a noise-regularized interpolant.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernel::{kernel_vector_wide, GramMatrix, KernelSpec, Sites};
use crate::linalg::{CholF64, CholWide};
use crate::wide::{dot, lift, lower, to_f64, wide, Wide, EPS, ZERO};

/// A negative power-function radicand below `−CLAMP_LIMIT · k(x, x)` is a
/// conditioning failure rather than roundoff.
pub const CLAMP_LIMIT: f64 = 1e-6;

fn pivot_floor(g: &GramMatrix) -> f64 {
    EPS * g.entries.max_abs()
}

fn checked_cholesky(g: &GramMatrix, shift: Wide) -> Result<CholWide> {
    let a = if shift == ZERO {
        g.entries.clone()
    } else {
        g.entries.shifted(shift)
    };
    let chol = CholWide::new(&a)?;
    let floor = pivot_floor(g);
    // a pivot below one unit of working precision carries no information
    for i in 0..chol.n() {
        let p = to_f64(chol.get(i, i));
        if p * p <= floor {
            return Err(Error::SingularGram { pivot: i, value: p * p });
        }
    }
    Ok(chol)
}

/// Per-query quantities shared by every bound: `K_{Xx}`, the Lagrange weights
/// `K⁻¹K_{Xx}` and the squared power function.
#[derive(Debug, Clone)]
pub(crate) struct Query {
    pub kx: Vec<Wide>,
    pub weights: Vec<Wide>,
    pub power_sq: Wide,
}

/// Power-function value plus whether a small negative radicand was clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerValue {
    pub value: f64,
    pub clamped: bool,
}

/// `K = L Lᵀ` for a fixed site set and kernel.
#[derive(Debug, Clone)]
pub struct GramFactorization {
    gram: GramMatrix,
    chol: CholWide,
}

/// Factorizes `K`; fails instead of regularizing.
pub fn factorize(k: &GramMatrix) -> Result<GramFactorization> {
    GramFactorization::new(k.clone())
}

impl GramFactorization {
    pub fn new(gram: GramMatrix) -> Result<Self> {
        let chol = checked_cholesky(&gram, ZERO)?;
        Ok(Self { gram, chol })
    }

    /// Builds the Gram matrix on `sites` and factorizes it.
    pub fn from_sites(kernel: &KernelSpec, sites: &Sites) -> Result<Self> {
        Self::new(crate::kernel::gram(kernel, sites)?)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.gram.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.gram.is_empty()
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.gram.kernel
    }

    pub fn sites(&self) -> &Sites {
        &self.gram.sites
    }

    /// `L[i][j]` for `j ≤ i`.
    pub fn factor_entry(&self, i: usize, j: usize) -> f64 {
        to_f64(self.chol.get(i, j))
    }

    pub fn min_pivot(&self) -> f64 {
        self.chol.min_diag()
    }

    fn check_len(&self, what: &'static str, n: usize) -> Result<()> {
        if n == self.len() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                what,
                expected: self.len(),
                found: n,
            })
        }
    }

    pub(crate) fn solve_wide(&self, mut b: Vec<Wide>) -> Vec<Wide> {
        self.chol.solve_in_place(&mut b);
        b
    }

    pub(crate) fn gram_wide(&self, i: usize, j: usize) -> Wide {
        self.gram.entries.get(i, j)
    }

    pub(crate) fn gram_mul(&self, x: &[Wide]) -> Vec<Wide> {
        self.gram.entries.mul_vec(x)
    }

    /// `K⁻¹ b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check_len("right-hand side", b.len())?;
        Ok(lower(&self.solve_wide(lift(b))))
    }

    pub(crate) fn inv_quad_wide(&self, y: &[Wide]) -> Wide {
        let mut z = y.to_vec();
        self.chol.forward(&mut z);
        dot(&z, &z)
    }

    /// `yᵀ K⁻¹ y`, the squared RKHS norm of the interpolant of `y`.
    pub fn inv_quad(&self, y: &[f64]) -> Result<f64> {
        self.check_len("values", y.len())?;
        Ok(to_f64(self.inv_quad_wide(&lift(y))))
    }

    pub(crate) fn query(&self, x: &[f64]) -> Result<Query> {
        let kx = kernel_vector_wide(self.kernel(), self.sites(), x)?;
        let mut z = kx.clone();
        self.chol.forward(&mut z);
        let power_sq = self.kernel().diag() - dot(&z, &z);
        self.chol.backward(&mut z);
        Ok(Query {
            kx,
            weights: z,
            power_sq,
        })
    }

    /// `P(x)` with the clamping flag.
    pub fn power_value(&self, x: &[f64]) -> Result<PowerValue> {
        let q = self.query(x)?;
        clamp_power(q.power_sq, to_f64(self.kernel().diag()))
    }

    /// `P(x) = √(k(x,x) − K_{xX} K⁻¹ K_{Xx})`.
    pub fn power_function(&self, x: &[f64]) -> Result<f64> {
        Ok(self.power_value(x)?.value)
    }

    /// `L(x) = ‖K⁻¹ K_{Xx}‖₁`.
    pub fn lebesgue_function(&self, x: &[f64]) -> Result<f64> {
        let q = self.query(x)?;
        Ok(to_f64(l1(&q.weights)))
    }

    /// Lagrange weights `K⁻¹ K_{Xx}`.
    pub fn lagrange_weights(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(lower(&self.query(x)?.weights))
    }
}

pub(crate) fn l1(v: &[Wide]) -> Wide {
    v.iter().fold(ZERO, |acc, w| acc + w.abs())
}

pub(crate) fn clamp_power(power_sq: Wide, diag: f64) -> Result<PowerValue> {
    let r = to_f64(power_sq);
    if r >= 0.0 {
        return Ok(PowerValue {
            value: to_f64(power_sq.sqrt()),
            clamped: false,
        });
    }
    let threshold = CLAMP_LIMIT * diag;
    if r < -threshold {
        return Err(Error::Conditioning {
            what: "power function",
            radicand: r,
            threshold,
        });
    }
    Ok(PowerValue {
        value: 0.0,
        clamped: true,
    })
}

/// Factorization of `K + s·I` for a shift `s > 0`.
///
/// With `s = δ̃²` this gives the posterior deviation of the noise-regularized
/// interpolant; with `s = Nλ` it gives the kernel ridge regression weights.
#[derive(Debug, Clone)]
pub struct RidgedFactorization {
    gram: GramMatrix,
    shift: f64,
    solver: RidgeSolver,
}

/// Above this size a well-conditioned shifted system is factored in `f64`
/// and solved by iterative refinement with extended-precision residuals.
const REFINE_MIN_LEN: usize = 256;
/// Largest `trace(K)/s` accepted for the `f64` factor.
const REFINE_MAX_RATIO: f64 = 1e10;
const REFINE_MAX_SWEEPS: usize = 40;
const REFINE_FLOOR: f64 = 1e3 * EPS;
const REFINE_STALL: f64 = 1e-50;

#[derive(Debug, Clone)]
enum RidgeSolver {
    Wide(CholWide),
    Refined(CholF64),
}

impl RidgedFactorization {
    pub fn new(gram: &GramMatrix, shift: f64) -> Result<Self> {
        if !(shift.is_finite() && shift > 0.0) {
            return Err(Error::InvalidParameter {
                name: "shift",
                reason: alloc::format!("must be finite and > 0, got {shift}"),
            });
        }
        let n = gram.len();
        let trace: f64 = (0..n).map(|i| gram.get(i, i)).sum();
        let refined = if n > REFINE_MIN_LEN && trace <= REFINE_MAX_RATIO * shift {
            CholF64::new(n, |i, j| gram.get(i, j) + if i == j { shift } else { 0.0 }).ok()
        } else {
            None
        };
        let solver = match refined {
            Some(c) => RidgeSolver::Refined(c),
            None => RidgeSolver::Wide(checked_cholesky(gram, wide(shift))?),
        };
        Ok(Self {
            gram: gram.clone(),
            shift,
            solver,
        })
    }

    fn shifted_mul(&self, x: &[Wide]) -> Vec<Wide> {
        let s = wide(self.shift);
        let mut out = self.gram.entries.mul_vec(x);
        for (o, xi) in out.iter_mut().zip(x) {
            *o = xi.mul_add(s, *o);
        }
        out
    }

    fn refine(&self, chol: &CholF64, b: &[Wide]) -> Vec<Wide> {
        let mut x = alloc::vec![ZERO; b.len()];
        let mut r = b.to_vec();
        let mut last = f64::INFINITY;
        for _ in 0..REFINE_MAX_SWEEPS {
            let mut d = lower(&r);
            chol.solve_in_place(&mut d);
            let step = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (xi, di) in x.iter_mut().zip(&d) {
                *xi += wide(*di);
            }
            let size = x.iter().fold(0.0f64, |m, v| m.max(to_f64(*v).abs()));
            // converged to working precision, or to the limit set by the
            // residual's own rounding
            if step <= REFINE_FLOOR * size || (step > 0.5 * last && step <= REFINE_STALL * size) {
                return x;
            }
            last = step;
            let ax = self.shifted_mul(&x);
            for ((ri, bi), ai) in r.iter_mut().zip(b).zip(&ax) {
                *ri = *bi - *ai;
            }
        }
        // refinement stalls only if the f64 factor is far worse than its
        // condition estimate suggested
        let mut y = b.to_vec();
        match checked_cholesky(&self.gram, wide(self.shift)) {
            Ok(c) => c.solve_in_place(&mut y),
            Err(_) => return x,
        }
        y
    }

    /// Shift `δ̃²` from a uniform noise level `δ̃ > 0`.
    pub fn with_noise(gram: &GramMatrix, noise: f64) -> Result<Self> {
        if !(noise.is_finite() && noise > 0.0) {
            return Err(Error::InvalidParameter {
                name: "noise level",
                reason: alloc::format!("must be finite and > 0, got {noise}"),
            });
        }
        Self::new(gram, noise * noise)
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn len(&self) -> usize {
        self.gram.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gram.is_empty()
    }

    pub(crate) fn solve_wide(&self, mut b: Vec<Wide>) -> Vec<Wide> {
        match &self.solver {
            RidgeSolver::Wide(c) => {
                c.solve_in_place(&mut b);
                b
            }
            RidgeSolver::Refined(c) => self.refine(c, &b),
        }
    }

    /// `(K + sI)⁻¹ b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.len() {
            return Err(Error::LengthMismatch {
                what: "right-hand side",
                expected: self.len(),
                found: b.len(),
            });
        }
        Ok(lower(&self.solve_wide(lift(b))))
    }

    pub(crate) fn inv_quad_wide(&self, y: &[Wide]) -> Wide {
        match &self.solver {
            RidgeSolver::Wide(c) => {
                let mut z = y.to_vec();
                c.forward(&mut z);
                dot(&z, &z)
            }
            RidgeSolver::Refined(_) => dot(y, &self.solve_wide(y.to_vec())),
        }
    }

    /// `(k(x,x) − K_{xX}(K + sI)⁻¹K_{Xx})` and `K_{Xx}`.
    pub(crate) fn deviation_sq(&self, x: &[f64]) -> Result<(Wide, Vec<Wide>)> {
        let kx = kernel_vector_wide(&self.gram.kernel, &self.gram.sites, x)?;
        Ok((self.gram.kernel.diag() - self.inv_quad_wide(&kx), kx))
    }

    /// `σ(x)`.
    pub fn deviation(&self, x: &[f64]) -> Result<f64> {
        let (s2, _) = self.deviation_sq(x)?;
        Ok(clamp_power(s2, 1.0)?.value)
    }
}

/// `σ(x) = (k(x,x) − K_{xX}(K + δ̃²I)⁻¹K_{Xx})^{1/2}` for a uniform noise level.
pub fn posterior_deviation(gram: &GramMatrix, noise: f64, x: &[f64]) -> Result<f64> {
    RidgedFactorization::with_noise(gram, noise)?.deviation(x)
}
