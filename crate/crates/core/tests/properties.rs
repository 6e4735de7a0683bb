use genshift_core::fort::{eventual_image, FortSystem, PointSet};
use genshift_core::index_maps::{decide_injective, decide_periodic_free};
use genshift_core::oracle::{exhaustive_tracer_search, literal_eventual_image, relevant_support};
use genshift_core::specification::{build_tracing_point, gap_bound, window_checks};
use genshift_core::strobo::{build_rho, congruence_refine, gap_refine, has_growing_gaps, verify_uniform_convergence};
use genshift_core::{idx, Alphabet, Configuration, Error, FunctionalMap, SequenceSpec, SpecInstance, Window};
use proptest::prelude::*;

fn table() -> impl Strategy<Value = Vec<usize>> {
    (1usize..=5).prop_flat_map(|n| prop::collection::vec(0..n, n))
}

fn increasing() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(1u64..6, 1..400).prop_map(|steps| {
        steps
            .iter()
            .scan(0u64, |acc, s| {
                *acc += s;
                Some(*acc)
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn finite_tables_always_have_periodic_points(images in table()) {
        let m = FunctionalMap::table(&images).unwrap();
        let v = decide_periodic_free(&m);
        prop_assert!(v.is_no() && v.check(&m));
    }

    #[test]
    fn injectivity_is_bijectivity(images in table()) {
        let m = FunctionalMap::table(&images).unwrap();
        let mut sorted = images.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let v = decide_injective(&m);
        prop_assert_eq!(v.is_yes(), sorted.len() == images.len());
        prop_assert!(v.check(&m));
    }

    #[test]
    fn congruence_refinement_holds_or_reports_budget(terms in increasing(), bound in 1u64..8) {
        match congruence_refine(&terms, bound) {
            Ok(t) => {
                prop_assert!(t.check());
                prop_assert!(t.subsequence.iter().all(|n| terms.contains(n)));
            }
            Err(Error::Budget(_)) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn gap_refinement_grows(terms in increasing()) {
        let g = gap_refine(&terms, usize::MAX);
        prop_assert!(has_growing_gaps(&g));
        prop_assert_eq!(g.first(), terms.first());
    }

    #[test]
    fn fort_eventual_image_is_literal(images in table()) {
        let sys = FortSystem::finite(&images, 0).unwrap();
        let ev = eventual_image(&sys).unwrap();
        let expected: Vec<_> = literal_eventual_image(&images).into_iter().map(genshift_core::Index::from).collect();
        prop_assert_eq!(ev.set, PointSet::Finite(expected));
    }

    #[test]
    fn rho_on_random_permutations(perm in Just((0..5usize).collect::<Vec<_>>()).prop_shuffle(), start in 0u64..10, step in 1u64..4, seed in any::<u64>()) {
        let m = FunctionalMap::table(&perm).unwrap();
        let a = SequenceSpec::arithmetic(start, step, 400).unwrap();
        let h = Window::from_ints(&[0, 1, 2, 3, 4]).unwrap();
        let rho = build_rho(&m, &a, &h).unwrap();
        prop_assert!(rho.check_guarantee(&m).unwrap());
        let out = verify_uniform_convergence(&m, &rho, &a, &h, 10, seed, Alphabet::binary()).unwrap();
        prop_assert!(out.passed());
    }

    #[test]
    fn translation_tracers(b in 1i64..4, coords in prop::collection::btree_set(-4i64..5, 1..3), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let m = FunctionalMap::affine(1, b);
        let coords: Vec<i64> = coords.into_iter().collect();
        let h = Window::from_ints(&coords).unwrap();
        let gap = gap_bound(&m, &h).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let bin = Alphabet::binary();
        let mut segs = Vec::new();
        let mut windows = Vec::new();
        let mut l = 0;
        for _ in 0..3 {
            let k = l + rng.gen_range(0..3u64);
            let overrides: Vec<_> = (-6..40).map(|c| (idx(c), rng.gen_range(0..2))).collect();
            segs.push(Configuration::new(bin, rng.gen_range(0..2), overrides).unwrap());
            windows.push((l, k));
            l = k + gap;
        }
        let inst = SpecInstance::new(segs, windows, h).unwrap();
        let report = build_tracing_point(&m, &inst, 0).unwrap();
        prop_assert!(report.passed());
        prop_assert!(window_checks(&m, &inst, &report.tracer).unwrap().iter().all(|c| c.agrees));
        let support = relevant_support(&m, &inst).unwrap();
        if support.len() <= 12 {
            prop_assert!(exhaustive_tracer_search(&m, &inst, &support, 0).unwrap().is_some());
        }
    }
}
