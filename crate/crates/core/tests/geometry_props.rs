use kernel_envelope::{
    fill_distance, sample_grid, sample_uniform, separation_distance, thin_indices, DomainBox, Sites,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn thinned_sites_respect_the_separation(seed in any::<u64>(), r in 0.05f64..1.5, dim in 1usize..4) {
        let domain = DomainBox::cube(-1.0, 1.0, dim).unwrap();
        let sites = sample_uniform(&domain, 80, seed).unwrap();
        let keep = thin_indices(&sites, r).unwrap();
        prop_assert!(!keep.is_empty());
        let kept = sites.subset(&keep);
        if kept.len() > 1 {
            prop_assert!(2.0 * separation_distance(&kept).unwrap() >= r);
        }
        // every dropped site lies within r of a kept one
        for x in sites.iter() {
            let near = kept.iter().any(|k| {
                k.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() < r
            });
            prop_assert!(near);
        }
    }

    #[test]
    fn separation_ignores_site_order(seed in any::<u64>(), shift in 1usize..30) {
        let domain = DomainBox::cube(0.0, 1.0, 2).unwrap();
        let sites = sample_uniform(&domain, 30, seed).unwrap();
        let perm: Vec<usize> = (0..30).map(|i| (i * 7 + shift) % 30).collect();
        prop_assert_eq!(separation_distance(&sites).unwrap(), separation_distance(&sites.subset(&perm)).unwrap());
    }

    #[test]
    fn grid_fill_distance_matches_half_diagonal(n in 3usize..9, dim in 1usize..4) {
        let domain = DomainBox::cube(0.0, 1.0, dim).unwrap();
        let grid = sample_grid(&domain, &vec![n; dim]).unwrap();
        let pitch = 1.0 / (n - 1) as f64;
        let exact = pitch * (dim as f64).sqrt() / 2.0;
        let h = fill_distance(&grid, &domain, 4000).unwrap();
        prop_assert!(h <= exact + 1e-12);
        prop_assert!(h >= 0.75 * exact, "h = {h}, exact = {exact}");
    }
}

#[test]
fn duplicates_are_dropped_by_thinning() {
    let sites = Sites::from_scalars(&[0.0, 0.0, 1.0, 1.0 + 1e-15, 2.0]).unwrap();
    let keep = thin_indices(&sites, 0.5).unwrap();
    assert_eq!(keep.len(), 3);
}
