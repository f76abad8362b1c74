//! Positive-definite kernels and the matrices built from them.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::SymWide;
use crate::wide::{exp, sq_dist, to_f64, wide, Wide, ONE};

/// Kernel family together with its hyperparameter.
///
/// * `SquaredExponential`: `k(x, x') = exp(−‖x − x'‖² / ℓ)`. Note the
///   lengthscale divides the *squared* distance directly.
/// * `InverseMultiquadric`: `k(x, x') = (1 + ‖x − x'‖² / c²)^(−1/2)`,
///   normalized so that `k(x, x) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(
        tag = "family",
        rename_all = "snake_case",
        try_from = "RawKernel",
        into = "RawKernel"
    )
)]
pub enum KernelSpec {
    SquaredExponential { lengthscale: f64 },
    InverseMultiquadric { shape: f64 },
}

/// Family tag without parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    SquaredExponential,
    InverseMultiquadric,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum RawKernel {
    SquaredExponential { lengthscale: f64 },
    InverseMultiquadric { shape: f64 },
}

#[cfg(feature = "serde")]
impl TryFrom<RawKernel> for KernelSpec {
    type Error = Error;

    fn try_from(raw: RawKernel) -> Result<Self> {
        match raw {
            RawKernel::SquaredExponential { lengthscale } => Self::squared_exponential(lengthscale),
            RawKernel::InverseMultiquadric { shape } => Self::inverse_multiquadric(shape),
        }
    }
}

#[cfg(feature = "serde")]
impl From<KernelSpec> for RawKernel {
    fn from(k: KernelSpec) -> Self {
        match k {
            KernelSpec::SquaredExponential { lengthscale } => Self::SquaredExponential { lengthscale },
            KernelSpec::InverseMultiquadric { shape } => Self::InverseMultiquadric { shape },
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: alloc::format!("must be finite and > 0, got {v}"),
        })
    }
}

impl KernelSpec {
    pub fn squared_exponential(lengthscale: f64) -> Result<Self> {
        Ok(Self::SquaredExponential {
            lengthscale: positive("lengthscale", lengthscale)?,
        })
    }

    pub fn inverse_multiquadric(shape: f64) -> Result<Self> {
        Ok(Self::InverseMultiquadric {
            shape: positive("shape", shape)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::SquaredExponential { lengthscale } => positive("lengthscale", lengthscale).map(drop),
            Self::InverseMultiquadric { shape } => positive("shape", shape).map(drop),
        }
    }

    pub fn family(&self) -> KernelFamily {
        match self {
            Self::SquaredExponential { .. } => KernelFamily::SquaredExponential,
            Self::InverseMultiquadric { .. } => KernelFamily::InverseMultiquadric,
        }
    }

    /// Kernel as a function of the squared distance.
    #[inline]
    pub(crate) fn profile(&self, r2: Wide) -> Wide {
        match *self {
            Self::SquaredExponential { lengthscale } => exp(-(r2 / wide(lengthscale))),
            Self::InverseMultiquadric { shape } => {
                let c2 = wide(shape) * wide(shape);
                (ONE + r2 / c2).sqrt().recip()
            }
        }
    }

    #[inline]
    pub(crate) fn eval_wide(&self, x: &[f64], y: &[f64]) -> Wide {
        self.profile(sq_dist(x, y))
    }

    /// `k(x, x)`; both shipped families are normalized to one on the diagonal.
    #[inline]
    pub(crate) fn diag(&self) -> Wide {
        ONE
    }
}

/// `N` points of a common dimension `m ≥ 1`, stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct Sites {
    dim: usize,
    coords: Vec<f64>,
}

impl Sites {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dimension",
                reason: "must be at least 1".to_string(),
            });
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "coordinate",
                reason: alloc::format!("non-finite value {bad}"),
            });
        }
        Ok(Self { dim, coords })
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let first = points.first().ok_or(Error::Empty("site list"))?;
        let dim = first.as_ref().len();
        let mut coords = Vec::with_capacity(dim * points.len());
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::new(dim, coords)
    }

    /// Scalar sites `x_n ∈ R`.
    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::new(1, xs.to_vec())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            coords.extend_from_slice(self.point(i));
        }
        Self { dim: self.dim, coords }
    }

    /// Appends one point; dimension must match.
    pub fn push(&mut self, p: &[f64]) -> Result<()> {
        self.check_dim(p)?;
        self.coords.extend_from_slice(p);
        Ok(())
    }

    pub fn check_dim(&self, p: &[f64]) -> Result<()> {
        if p.len() == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.len(),
            })
        }
    }

    /// Sites closer than `1e−9 · (1 + max |coordinate|)` count as duplicates.
    pub fn distinctness_tolerance(&self) -> f64 {
        let scale = self.coords.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        1e-9 * (1.0 + scale)
    }

    /// First pair of sites closer than the distinctness tolerance.
    pub fn find_duplicate(&self) -> Option<(usize, usize, f64)> {
        let tol = self.distinctness_tolerance();
        let tol2 = tol * tol;
        for i in 0..self.len() {
            for j in 0..i {
                let d2 = to_f64(sq_dist(self.point(i), self.point(j)));
                if d2 < tol2 {
                    return Some((j, i, libm::sqrt(d2)));
                }
            }
        }
        None
    }
}

/// Symmetric matrix `K[i][j] = k(x_i, x_j)` over pairwise-distinct sites.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub(crate) kernel: KernelSpec,
    pub(crate) sites: Sites,
    pub(crate) entries: SymWide,
}

impl GramMatrix {
    #[inline]
    pub fn len(&self) -> usize {
        self.entries.n()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.n() == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        to_f64(self.entries.get(i, j))
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn sites(&self) -> &Sites {
        &self.sites
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|i| (0..self.len()).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Gram matrix whose entries are rounded to `f64`, skipping the
    /// distinctness check. Used to probe the factorization on matrices that
    /// are singular at working precision.
    pub fn rounded_unchecked(kernel: KernelSpec, sites: Sites) -> Self {
        let entries = SymWide::from_fn(sites.len(), |i, j| {
            wide(to_f64(kernel.eval_wide(sites.point(i), sites.point(j))))
        });
        Self { kernel, sites, entries }
    }
}

/// `k(x, x')` rounded to `f64`.
pub fn eval_kernel(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::Empty("point"));
    }
    Ok(to_f64(spec.eval_wide(x, y)))
}

/// Builds the Gram matrix, rejecting coincident sites.
pub fn gram(spec: &KernelSpec, sites: &Sites) -> Result<GramMatrix> {
    spec.validate()?;
    if sites.is_empty() {
        return Err(Error::Empty("site list"));
    }
    if let Some((first, second, distance)) = sites.find_duplicate() {
        return Err(Error::DuplicateSites {
            first,
            second,
            distance,
        });
    }
    let entries = SymWide::from_fn(sites.len(), |i, j| {
        if i == j {
            spec.diag()
        } else {
            spec.eval_wide(sites.point(i), sites.point(j))
        }
    });
    Ok(GramMatrix {
        kernel: *spec,
        sites: sites.clone(),
        entries,
    })
}

pub(crate) fn kernel_vector_wide(spec: &KernelSpec, sites: &Sites, x: &[f64]) -> Result<Vec<Wide>> {
    sites.check_dim(x)?;
    Ok(sites.iter().map(|s| spec.eval_wide(s, x)).collect())
}

/// `K_{Xx}`: the n-th entry is `k(x_n, x)`.
pub fn kernel_vector(spec: &KernelSpec, sites: &Sites, x: &[f64]) -> Result<Vec<f64>> {
    Ok(kernel_vector_wide(spec, sites, x)?.into_iter().map(to_f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn se(l: f64) -> KernelSpec {
        KernelSpec::squared_exponential(l).unwrap()
    }

    #[test]
    fn se_values() {
        assert_eq!(eval_kernel(&se(1.0), &[0.3], &[0.3]).unwrap(), 1.0);
        assert_relative_eq!(
            eval_kernel(&se(1.0), &[0.0], &[1.0]).unwrap(),
            0.36787944117144233,
            max_relative = 1e-15
        );
        let v = eval_kernel(&se(5.27), &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_relative_eq!(v, libm::exp(-1.0 / 5.27), max_relative = 1e-15);
        assert!((v - 0.82713).abs() < 1e-4);
    }

    #[test]
    fn imq_values() {
        let k = KernelSpec::inverse_multiquadric(2.0).unwrap();
        assert_relative_eq!(
            eval_kernel(&k, &[0.0], &[2.0]).unwrap(),
            1.0 / libm::sqrt(2.0),
            max_relative = 1e-15
        );
    }

    #[test]
    fn rejects_bad_parameters_and_dimensions() {
        assert!(KernelSpec::squared_exponential(0.0).is_err());
        assert!(KernelSpec::inverse_multiquadric(-1.0).is_err());
        assert!(KernelSpec::squared_exponential(f64::NAN).is_err());
        assert!(matches!(
            eval_kernel(&se(1.0), &[0.0], &[0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        let sites = Sites::from_scalars(&[0.0, 1.0]).unwrap();
        assert!(kernel_vector(&se(1.0), &sites, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn gram_small_cases() {
        let g = gram(&se(1.0), &Sites::from_scalars(&[0.0]).unwrap()).unwrap();
        assert_eq!(g.to_rows(), alloc::vec![alloc::vec![1.0]]);
        let g = gram(&se(1.0), &Sites::from_scalars(&[0.0, 2.0]).unwrap()).unwrap();
        assert_eq!(g.get(0, 0), 1.0);
        assert_relative_eq!(g.get(0, 1), libm::exp(-4.0), max_relative = 1e-15);
        assert_eq!(g.get(0, 1), g.get(1, 0));
    }

    #[test]
    fn gram_rejects_duplicates() {
        let err = gram(&se(1.0), &Sites::from_scalars(&[0.0, 3.0, 0.0]).unwrap()).unwrap_err();
        assert!(matches!(
            err,
            Error::DuplicateSites {
                first: 0,
                second: 2,
                ..
            }
        ));
        let err = gram(&se(1.0), &Sites::from_scalars(&[1.0, 1.0 + 1e-12]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::DuplicateSites { .. }));
    }

    #[test]
    fn kernel_vector_cases() {
        let sites = Sites::from_scalars(&[0.0, 2.0]).unwrap();
        let v = kernel_vector(&se(1.0), &sites, &[1.0]).unwrap();
        assert_relative_eq!(v[0], libm::exp(-1.0), max_relative = 1e-15);
        assert_relative_eq!(v[1], libm::exp(-1.0), max_relative = 1e-15);
        let v = kernel_vector(&se(1.0), &sites, &[0.0]).unwrap();
        assert_eq!(v[0], 1.0);
        let far = kernel_vector(&se(1.0), &Sites::from_scalars(&[0.0]).unwrap(), &[40.0]).unwrap();
        assert!(far[0] < 1e-300);
    }
}
