//! Dense symmetric kernels: packed lower-triangular Cholesky in extended precision
//! and a plain `f64` variant for well-conditioned shifted systems.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::wide::{dot, to_f64, Wide, ZERO};

#[inline]
fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

/// Symmetric matrix stored as its packed lower triangle.
#[derive(Debug, Clone)]
pub(crate) struct SymWide {
    n: usize,
    data: Vec<Wide>,
}

impl SymWide {
    pub(crate) fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Wide) -> Self {
        let mut data = Vec::with_capacity(row_start(n));
        for i in 0..n {
            for j in 0..=i {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    #[inline]
    pub(crate) fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub(crate) fn get(&self, i: usize, j: usize) -> Wide {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        self.data[row_start(i) + j]
    }

    pub(crate) fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| f64::max(m, to_f64(*v).abs()))
    }

    pub(crate) fn mul_vec(&self, x: &[Wide]) -> Vec<Wide> {
        let n = self.n;
        let mut out = vec![ZERO; n];
        for i in 0..n {
            let row = &self.data[row_start(i)..row_start(i) + i + 1];
            out[i] += dot(&row[..i], &x[..i]) + row[i] * x[i];
            for j in 0..i {
                out[j] += row[j] * x[i];
            }
        }
        out
    }

    /// Principal submatrix on `idx`.
    pub(crate) fn select(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    pub(crate) fn shifted(&self, shift: Wide) -> Self {
        Self::from_fn(
            self.n,
            |i, j| {
                if i == j {
                    self.get(i, j) + shift
                } else {
                    self.get(i, j)
                }
            },
        )
    }
}

/// Lower Cholesky factor `A = L Lᵀ`, packed by rows.
#[derive(Debug, Clone)]
pub(crate) struct CholWide {
    n: usize,
    data: Vec<Wide>,
}

impl CholWide {
    /// Fails on the first non-positive pivot; never adds jitter.
    pub(crate) fn new(a: &SymWide) -> Result<Self> {
        let n = a.n;
        let mut data = vec![ZERO; row_start(n)];
        for i in 0..n {
            let ri = row_start(i);
            for j in 0..=i {
                let rj = row_start(j);
                let s = a.get(i, j) - dot(&data[ri..ri + j], &data[rj..rj + j]);
                if i == j {
                    if !(s > ZERO) {
                        return Err(Error::SingularGram {
                            pivot: i,
                            value: to_f64(s),
                        });
                    }
                    data[ri + i] = s.sqrt();
                } else {
                    data[ri + j] = s / data[rj + j];
                }
            }
        }
        Ok(Self { n, data })
    }

    #[inline]
    pub(crate) fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub(crate) fn get(&self, i: usize, j: usize) -> Wide {
        debug_assert!(j <= i);
        self.data[row_start(i) + j]
    }

    /// Solves `L z = b` in place.
    pub(crate) fn forward(&self, b: &mut [Wide]) {
        for i in 0..self.n {
            let r = row_start(i);
            let s = b[i] - dot(&self.data[r..r + i], &b[..i]);
            b[i] = s / self.data[r + i];
        }
    }

    /// Solves `Lᵀ x = z` in place.
    pub(crate) fn backward(&self, z: &mut [Wide]) {
        for i in (0..self.n).rev() {
            let r = row_start(i);
            let xi = z[i] / self.data[r + i];
            z[i] = xi;
            for j in 0..i {
                z[j] -= self.data[r + j] * xi;
            }
        }
    }

    pub(crate) fn solve_in_place(&self, b: &mut [Wide]) {
        self.forward(b);
        self.backward(b);
    }

    pub(crate) fn min_diag(&self) -> f64 {
        (0..self.n)
            .map(|i| to_f64(self.data[row_start(i) + i]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `f64` Cholesky for systems known to be well conditioned (e.g. `2I + ρK`).
#[derive(Debug, Clone)]
pub(crate) struct CholF64 {
    n: usize,
    data: Vec<f64>,
}

impl CholF64 {
    pub(crate) fn new(n: usize, a: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; row_start(n)];
        for i in 0..n {
            let ri = row_start(i);
            for j in 0..=i {
                let rj = row_start(j);
                let mut s = a(i, j);
                for k in 0..j {
                    s -= data[ri + k] * data[rj + k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::SingularGram { pivot: i, value: s });
                    }
                    data[ri + i] = libm::sqrt(s);
                } else {
                    data[ri + j] = s / data[rj + j];
                }
            }
        }
        Ok(Self { n, data })
    }

    pub(crate) fn solve_in_place(&self, b: &mut [f64]) {
        for i in 0..self.n {
            let r = row_start(i);
            let mut s = b[i];
            for k in 0..i {
                s -= self.data[r + k] * b[k];
            }
            b[i] = s / self.data[r + i];
        }
        for i in (0..self.n).rev() {
            let r = row_start(i);
            let xi = b[i] / self.data[r + i];
            b[i] = xi;
            for j in 0..i {
                b[j] -= self.data[r + j] * xi;
            }
        }
    }
}

/// Cholesky factor of a principal submatrix that grows by one index at a
/// time and shrinks by Givens re-triangularization.
#[derive(Debug, Clone, Default)]
pub(crate) struct GrowingChol {
    rows: Vec<Vec<Wide>>,
}

impl GrowingChol {
    pub(crate) fn len(&self) -> usize {
        self.rows.len()
    }

    /// Solves `L z = b` in place.
    pub(crate) fn forward(&self, b: &mut [Wide]) {
        for (i, row) in self.rows.iter().enumerate() {
            let s = b[i] - dot(&row[..i], &b[..i]);
            b[i] = s / row[i];
        }
    }

    /// Solves `Lᵀ x = z` in place.
    pub(crate) fn backward(&self, z: &mut [Wide]) {
        for i in (0..self.rows.len()).rev() {
            let row = &self.rows[i];
            let xi = z[i] / row[i];
            z[i] = xi;
            for j in 0..i {
                z[j] -= row[j] * xi;
            }
        }
    }

    /// Appends the index whose coupling to the current ones is `l = L⁻¹ a`
    /// and whose squared pivot is `d2 > 0`.
    pub(crate) fn push(&mut self, mut l: Vec<Wide>, d2: Wide) {
        debug_assert_eq!(l.len(), self.len());
        l.push(d2.sqrt());
        self.rows.push(l);
    }

    /// Deletes index `k`.
    pub(crate) fn remove(&mut self, k: usize) {
        self.rows.remove(k);
        let m = self.rows.len();
        for j in k..m {
            let (a, b) = (self.rows[j][j], self.rows[j][j + 1]);
            let r = a.hypot(b);
            let (c, s) = (a / r, b / r);
            for row in &mut self.rows[j..] {
                let (x, y) = (row[j], row[j + 1]);
                row[j] = c * x + s * y;
                row[j + 1] = c * y - s * x;
            }
            self.rows[j].truncate(j + 1);
        }
    }
}
