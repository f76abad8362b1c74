//! Site-set diagnostics and samplers: fill and separation distances,
//! greedy thinning, grids, uniform, jittered and boundary designs.
//!
//! Random designs use Xoshiro256++ seeded through `rand_core`'s
//! `seed_from_u64` (PCG32 seed expansion); a uniform draw is
//! `(next_u64() >> 11) · 2⁻⁵³`.

use alloc::vec::Vec;

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::kernel::Sites;
use crate::models::Dataset;

/// Largest number of points any sampler will produce.
pub const MAX_SAMPLES: usize = 10_000_000;

/// Default probe count per dimension for [`fill_distance`].
pub const PROBES_PER_DIM: usize = 10_000;

/// Axis-aligned box `[lower, upper]` with `lower < upper` on every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DomainBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::Empty("domain"));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (a, b) in lower.iter().zip(&upper) {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidParameter {
                    name: "domain",
                    reason: alloc::format!("need finite lower < upper, got [{a}, {b}]"),
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[lo, hi]^dim`.
    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        Self::new(alloc::vec![lo; dim], alloc::vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.lower)
                .zip(&self.upper)
                .all(|((v, a), b)| a <= v && v <= b)
    }

    /// All `2^m` corners.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let m = self.dim();
        (0..1usize << m)
            .map(|mask| {
                (0..m)
                    .map(|k| {
                        if mask >> k & 1 == 1 {
                            self.upper[k]
                        } else {
                            self.lower[k]
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Portable seeded generator for the random designs.
#[derive(Debug, Clone)]
pub struct SampleRng(Xoshiro256PlusPlus);

impl SampleRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform in `[−b, b]`.
    pub fn symmetric(&mut self, b: f64) -> f64 {
        b * (2.0 * self.next_f64() - 1.0)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
}

fn nearest(sites: &Sites, x: &[f64]) -> f64 {
    sites.iter().map(|s| dist(s, x)).fold(f64::INFINITY, f64::min)
}

fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut c = 2u64;
    while out.len() < count {
        if out.iter().all(|p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// `h = sup_x min_n ‖x − x_n‖₂`, estimated over `probes` Halton points of the
/// domain plus its corners.
pub fn fill_distance(sites: &Sites, domain: &DomainBox, probes: usize) -> Result<f64> {
    if sites.is_empty() {
        return Err(Error::Empty("site set"));
    }
    sites.check_dim(domain.lower())?;
    if probes == 0 {
        return Err(Error::InvalidParameter {
            name: "probe count",
            reason: "must be ≥ 1".into(),
        });
    }
    let m = domain.dim();
    let bases = primes(m);
    let mut worst = 0.0f64;
    let mut x = alloc::vec![0.0; m];
    for i in 1..=probes as u64 {
        for k in 0..m {
            let u = radical_inverse(i, bases[k]);
            x[k] = domain.lower[k] + u * (domain.upper[k] - domain.lower[k]);
        }
        worst = worst.max(nearest(sites, &x));
    }
    if m <= 20 {
        for c in domain.corners() {
            worst = worst.max(nearest(sites, &c));
        }
    }
    Ok(worst)
}

/// `q = ½ min_{i≠j} ‖x_i − x_j‖₂` by pairwise scan.
pub fn separation_distance(sites: &Sites) -> Result<f64> {
    if sites.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "site set",
            reason: alloc::format!("separation needs at least 2 sites, got {}", sites.len()),
        });
    }
    let mut best = f64::INFINITY;
    for i in 0..sites.len() {
        for j in 0..i {
            best = best.min(dist(sites.point(i), sites.point(j)));
        }
    }
    Ok(0.5 * best)
}

/// Greedy farthest-point thinning: starting from the site nearest the
/// centroid, repeatedly keep the site farthest from those kept so far until no
/// remaining site is at least `min_separation` away. Returns the kept indices
/// in increasing order. Works on raw site lists, duplicates included.
pub fn thin_indices(sites: &Sites, min_separation: f64) -> Result<Vec<usize>> {
    if !(min_separation.is_finite() && min_separation > 0.0) {
        return Err(Error::InvalidParameter {
            name: "minimum separation",
            reason: alloc::format!("must be finite and > 0, got {min_separation}"),
        });
    }
    let n = sites.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = sites.dim();
    let mut centroid = alloc::vec![0.0; m];
    for p in sites.iter() {
        for (c, v) in centroid.iter_mut().zip(p) {
            *c += v / n as f64;
        }
    }
    let mut first = 0;
    let mut best = f64::INFINITY;
    for (i, p) in sites.iter().enumerate() {
        let d = dist(p, &centroid);
        if d < best {
            best = d;
            first = i;
        }
    }
    // distance to the kept set; negative marks kept sites
    let mut gap: Vec<f64> = sites.iter().map(|p| dist(p, sites.point(first))).collect();
    let mut keep = alloc::vec![first];
    gap[first] = -1.0;
    loop {
        let mut next = None;
        let mut far = min_separation;
        for (i, &g) in gap.iter().enumerate() {
            if g > far || (g == far && next.is_none()) {
                next = Some(i);
                far = g;
            }
        }
        let Some(k) = next else { break };
        keep.push(k);
        gap[k] = -1.0;
        for i in 0..n {
            if gap[i] >= 0.0 {
                gap[i] = gap[i].min(dist(sites.point(i), sites.point(k)));
            }
        }
    }
    keep.sort_unstable();
    Ok(keep)
}

/// [`thin_indices`] applied to a dataset; labels and noise bounds follow
/// their sites.
pub fn thin(data: &Dataset, min_separation: f64) -> Result<Dataset> {
    Ok(data.subset(&thin_indices(data.sites(), min_separation)?))
}

fn check_counts(counts: &[usize], domain: &DomainBox) -> Result<usize> {
    if counts.len() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            found: counts.len(),
        });
    }
    let mut total = 1usize;
    for &c in counts {
        total = total
            .checked_mul(c)
            .filter(|&t| t <= MAX_SAMPLES)
            .ok_or(Error::InvalidParameter {
                name: "grid size",
                reason: alloc::format!("more than {MAX_SAMPLES} points"),
            })?;
    }
    Ok(total)
}

/// Row-major multi-index (last axis fastest) of the `index`-th grid point.
fn grid_index(mut index: usize, counts: &[usize], out: &mut [usize]) {
    for k in (0..counts.len()).rev() {
        out[k] = index % counts[k];
        index /= counts[k];
    }
}

fn grid_coord(domain: &DomainBox, k: usize, i: usize, count: usize) -> f64 {
    if i + 1 == count {
        domain.upper[k]
    } else {
        domain.lower[k] + (domain.upper[k] - domain.lower[k]) * i as f64 / (count - 1) as f64
    }
}

/// Tensor-product equispaced grid including the corners, last axis fastest.
pub fn sample_grid(domain: &DomainBox, counts: &[usize]) -> Result<Sites> {
    if let Some(c) = counts.iter().find(|&&c| c < 2) {
        return Err(Error::InvalidParameter {
            name: "grid count",
            reason: alloc::format!("each axis needs ≥ 2 points, got {c}"),
        });
    }
    let total = check_counts(counts, domain)?;
    let m = domain.dim();
    let mut coords = Vec::with_capacity(total * m);
    let mut idx = alloc::vec![0; m];
    for t in 0..total {
        grid_index(t, counts, &mut idx);
        for k in 0..m {
            coords.push(grid_coord(domain, k, idx[k], counts[k]));
        }
    }
    Sites::new(m, coords)
}

/// `n` independent uniform draws from the box.
pub fn sample_uniform(domain: &DomainBox, n: usize, seed: u64) -> Result<Sites> {
    if n == 0 || n > MAX_SAMPLES {
        return Err(Error::InvalidParameter {
            name: "sample count",
            reason: alloc::format!("must be in 1..={MAX_SAMPLES}, got {n}"),
        });
    }
    let mut rng = SampleRng::new(seed);
    let m = domain.dim();
    let mut coords = Vec::with_capacity(n * m);
    for _ in 0..n {
        for k in 0..m {
            coords.push(rng.uniform(domain.lower[k], domain.upper[k]));
        }
    }
    Sites::new(m, coords)
}

/// Stratified design: one point per cell of a `counts` partition of the box,
/// displaced from the cell centre by up to `jitter` cell widths per axis
/// (`0 ≤ jitter ≤ 0.5`).
pub fn sample_jittered(domain: &DomainBox, counts: &[usize], jitter: f64, seed: u64) -> Result<Sites> {
    if !(0.0..=0.5).contains(&jitter) {
        return Err(Error::InvalidParameter {
            name: "jitter",
            reason: alloc::format!("must lie in [0, 0.5], got {jitter}"),
        });
    }
    if let Some(c) = counts.iter().find(|&&c| c == 0) {
        return Err(Error::InvalidParameter {
            name: "cell count",
            reason: alloc::format!("each axis needs ≥ 1 cell, got {c}"),
        });
    }
    let total = check_counts(counts, domain)?;
    let m = domain.dim();
    let mut rng = SampleRng::new(seed);
    let mut coords = Vec::with_capacity(total * m);
    let mut idx = alloc::vec![0; m];
    for t in 0..total {
        grid_index(t, counts, &mut idx);
        for k in 0..m {
            let pitch = (domain.upper[k] - domain.lower[k]) / counts[k] as f64;
            let centre = domain.lower[k] + (idx[k] as f64 + 0.5) * pitch;
            coords.push(centre + rng.symmetric(jitter) * pitch);
        }
    }
    Sites::new(m, coords)
}

/// Points of the `per_edge`-per-axis grid that lie on the box boundary, each
/// corner once. A 2-D box with 10 per edge gives 36 points.
pub fn boundary_points(domain: &DomainBox, per_edge: usize) -> Result<Sites> {
    let m = domain.dim();
    let counts = alloc::vec![per_edge; m];
    let grid = sample_grid(domain, &counts)?;
    let mut coords = Vec::new();
    let mut idx = alloc::vec![0; m];
    for (t, p) in grid.iter().enumerate() {
        grid_index(t, &counts, &mut idx);
        if idx.iter().any(|&i| i == 0 || i + 1 == per_edge) {
            coords.extend_from_slice(p);
        }
    }
    Sites::new(m, coords)
}
