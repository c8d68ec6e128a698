use isocache::bounds::Regime;
use isocache::fft::{
    bfs_partition, build_fft, chunked_partition, delta, layered_partition, verify_isoperimetric,
    verify_partition_bound, SubsetStrategy,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_subsets_satisfy_isoperimetry(n in 1u32..7, seed in 0u64..10_000) {
        let g = build_fft(n).unwrap();
        let report = verify_isoperimetric(&g, SubsetStrategy::Random { count: 200, seed }).unwrap();
        prop_assert!(report.violations.is_empty());
        prop_assert_eq!(report.checked, 200);
    }

    #[test]
    fn delta_is_additive_over_complement(n in 1u32..6, mask in any::<u64>()) {
        let g = build_fft(n).unwrap();
        let nv = g.vertex_count();
        let a: Vec<usize> = (0..nv).filter(|&v| mask >> (v % 64) & 1 == 1).collect();
        let b: Vec<usize> = (0..nv).filter(|&v| mask >> (v % 64) & 1 == 0).collect();
        prop_assume!(!a.is_empty() && !b.is_empty());
        let (da, db) = (delta(&g, &a).unwrap(), delta(&g, &b).unwrap());
        // Every crossing edge is counted once from each side.
        prop_assert_eq!(da.boundary_edges, db.boundary_edges);
        prop_assert_eq!(da.boundary_nodes + db.boundary_nodes, 2 * g.width());
    }

    #[test]
    fn partitions_meet_boundary_bound(n in 3u32..9, log_s in 1u32..4, seed in 0u64..1000) {
        let g = build_fft(n).unwrap();
        let size = 1usize << log_s;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for parts in [
            chunked_partition(&g, size, &mut rng),
            bfs_partition(&g, size, &mut rng),
            layered_partition(&g, size),
        ] {
            let report = verify_partition_bound(&g, &parts, size as u64).unwrap();
            prop_assert!(report.holds(), "{:?}", report);
        }
    }
}

#[test]
fn exhaustive_small_graphs() {
    for n in 1..=2 {
        let report = verify_isoperimetric(&build_fft(n).unwrap(), SubsetStrategy::Exhaustive).unwrap();
        assert_eq!(report.checked, (1 << build_fft(n).unwrap().vertex_count()) - 1);
        assert!(report.violations.is_empty());
    }
}

#[test]
fn regime_thresholds() {
    assert_eq!(Regime::for_fft(24, 2), Regime::AtBoundary);
    assert_eq!(Regime::for_fft(48, 2), Regime::Inside);
    assert_eq!(Regime::for_fft(8, 2), Regime::Outside);
}
