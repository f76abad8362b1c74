mod common;

use common::{factor, instance, random_points};
use kernel_envelope::{posterior_deviation, sample_uniform, Dataset, GramFactorization};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn power_function_is_nonnegative_and_vanishes_at_sites(seed in any::<u64>(), dim in 1usize..3) {
        let inst = instance(seed, dim, 15, 0.0);
        let f = factor(&inst.data, &inst.truth.kernel);
        for x in random_points(&inst.domain, 40, seed ^ 1).iter() {
            prop_assert!(f.power_function(x).unwrap() >= 0.0);
        }
        for x in inst.data.sites().iter() {
            prop_assert!(f.power_function(x).unwrap() <= 1e-7);
        }
    }

    #[test]
    fn adding_sites_never_raises_the_power_function(seed in any::<u64>(), dim in 1usize..3) {
        let inst = instance(seed, dim, 14, 0.0);
        let sites = inst.data.sites();
        let sub: Vec<usize> = (0..sites.len()).filter(|i| i % 3 != 0).collect();
        prop_assume!(!sub.is_empty());
        let small = GramFactorization::from_sites(&inst.truth.kernel, &sites.subset(&sub)).unwrap();
        let large = factor(&inst.data, &inst.truth.kernel);
        for x in random_points(&inst.domain, 40, seed ^ 2).iter() {
            prop_assert!(large.power_function(x).unwrap() <= small.power_function(x).unwrap() + 1e-9);
        }
    }

    #[test]
    fn posterior_deviation_dominates_power_function(seed in any::<u64>(), noise in 0.01f64..1.0) {
        let inst = instance(seed, 2, 15, noise);
        let f = factor(&inst.data, &inst.truth.kernel);
        let g = f.gram();
        for x in random_points(&inst.domain, 30, seed ^ 3).iter() {
            let sigma = posterior_deviation(g, noise, x).unwrap();
            prop_assert!(sigma >= f.power_function(x).unwrap());
        }
    }

    /// `(K + NλI)⁻¹ = K⁻¹ − (K + KK/(Nλ))⁻¹`, checked with an independent
    /// `f64` dense solver.
    #[test]
    fn ridge_inverse_identity(seed in any::<u64>(), lambda in 1e-3f64..1.0) {
        let inst = instance(seed, 2, 12, 0.0);
        let f = factor(&inst.data, &inst.truth.kernel);
        let n = f.len();
        let k = DMatrix::from_fn(n, n, |i, j| f.gram().get(i, j));
        prop_assume!(k.clone().symmetric_eigenvalues().min() > 1e-4);
        let s = n as f64 * lambda;
        let lhs = (k.clone() + DMatrix::identity(n, n) * s).try_inverse().unwrap();
        let rhs = k.clone().try_inverse().unwrap() - (k.clone() + &k * &k / s).try_inverse().unwrap();
        prop_assert!((&lhs - &rhs).norm() <= 1e-8 * lhs.norm(), "{}", (&lhs - &rhs).norm() / lhs.norm());
    }
}

#[test]
fn solves_agree_with_dense_oracle() {
    for seed in 0..20u64 {
        let inst = instance(seed, 2, 12, 0.0);
        let f = factor(&inst.data, &inst.truth.kernel);
        let n = f.len();
        let k = DMatrix::from_fn(n, n, |i, j| f.gram().get(i, j));
        let y = DVector::from_column_slice(inst.data.labels());
        let oracle = k.clone().cholesky().unwrap().solve(&y);
        let ours = f.solve(inst.data.labels()).unwrap();
        let cond = {
            let e = k.symmetric_eigenvalues();
            e.max() / e.min()
        };
        for i in 0..n {
            assert!(
                (ours[i] - oracle[i]).abs() <= 1e-13 * cond * (1.0 + oracle.amax()),
                "seed {seed}"
            );
        }
    }
}

#[test]
fn lebesgue_function_is_one_at_sites() {
    let domain = kernel_envelope::DomainBox::cube(0.0, 1.0, 1).unwrap();
    let sites = sample_uniform(&domain, 6, 4).unwrap();
    let data = Dataset::with_uniform_noise(sites, vec![0.0; 6], 0.0).unwrap();
    let f = factor(&data, &kernel_envelope::KernelSpec::squared_exponential(0.05).unwrap());
    for x in data.sites().iter() {
        assert!((f.lebesgue_function(x).unwrap() - 1.0).abs() < 1e-9);
    }
}
