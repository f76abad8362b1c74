//! Random instances shared by the property tests.
#![allow(dead_code)]

use kernel_envelope::{
    eval_kernel, sample_uniform, thin, Dataset, DomainBox, GramFactorization, KernelSpec, SampleRng, Sites,
};

/// Smallest pairwise distance between generated sites. Keeps the Gram
/// matrices far from singular so that `f64` oracles stay meaningful.
pub const MIN_GAP: f64 = 0.35;

/// Finite kernel expansion `f = Σ c_j k(·, z_j)`.
pub struct Expansion {
    pub kernel: KernelSpec,
    pub centers: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl Expansion {
    pub fn random(kernel: KernelSpec, domain: &DomainBox, terms: usize, rng: &mut SampleRng) -> Self {
        let centers = (0..terms)
            .map(|_| {
                domain
                    .lower()
                    .iter()
                    .zip(domain.upper())
                    .map(|(&lo, &hi)| rng.uniform(lo, hi))
                    .collect()
            })
            .collect();
        let weights = (0..terms).map(|_| rng.uniform(-2.0, 2.0)).collect();
        Self {
            kernel,
            centers,
            weights,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.centers
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * eval_kernel(&self.kernel, x, c).unwrap())
            .sum()
    }

    /// `‖f‖_H = √(cᵀ K_ZZ c)`, evaluated in `f64`.
    pub fn norm(&self) -> f64 {
        let mut q = 0.0;
        for (a, wa) in self.centers.iter().zip(&self.weights) {
            for (b, wb) in self.centers.iter().zip(&self.weights) {
                q += wa * wb * eval_kernel(&self.kernel, a, b).unwrap();
            }
        }
        q.max(0.0).sqrt()
    }
}

pub struct Instance {
    pub domain: DomainBox,
    pub truth: Expansion,
    pub data: Dataset,
    /// Noiseless labels at the same sites.
    pub clean: Dataset,
    pub noise: f64,
}

pub fn kernel(rng: &mut SampleRng) -> KernelSpec {
    KernelSpec::squared_exponential(rng.uniform(0.5, 2.0)).unwrap()
}

/// Random truth, up to `max_n` well-separated sites in `[-3, 3]^dim` and
/// uniform noise in `[−δ̄, δ̄]`.
pub fn instance(seed: u64, dim: usize, max_n: usize, noise: f64) -> Instance {
    let mut rng = SampleRng::new(seed);
    let domain = DomainBox::cube(-3.0, 3.0, dim).unwrap();
    let k = kernel(&mut rng);
    let terms = 1 + (rng.next_f64() * 4.0) as usize;
    let truth = Expansion::random(k, &domain, terms, &mut rng);
    let n = 2 + (rng.next_f64() * (max_n - 1) as f64) as usize;
    let raw = sample_uniform(&domain, n.min(max_n), seed ^ 0x5eed).unwrap();
    let labels: Vec<f64> = raw.iter().map(|x| truth.eval(x)).collect();
    let clean = thin(&Dataset::with_uniform_noise(raw, labels, 0.0).unwrap(), MIN_GAP).unwrap();
    let noisy: Vec<f64> = clean.labels().iter().map(|y| y + rng.symmetric(noise)).collect();
    let data = Dataset::with_uniform_noise(clean.sites().clone(), noisy, noise).unwrap();
    Instance {
        domain,
        truth,
        data,
        clean,
        noise,
    }
}

pub fn factor(data: &Dataset, kernel: &KernelSpec) -> GramFactorization {
    GramFactorization::from_sites(kernel, data.sites()).unwrap()
}

pub fn random_points(domain: &DomainBox, n: usize, seed: u64) -> Sites {
    sample_uniform(domain, n, seed).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(a.abs()).max(1e-300)
}
