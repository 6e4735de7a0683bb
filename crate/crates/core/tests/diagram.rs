use genshift_core::catalog::{builtin, builtins, classify, discrepancy, mixed_piecewise, System};
use genshift_core::fort::{build_fort_rho, fort_gap_constant, FortSystem, FortWindow};
use genshift_core::specification::refute_weak_spec;
use genshift_core::strobo::{build_rho, decide_strobo, RhoKind};
use genshift_core::{idx, Alphabet, Certificate, Decision, FunctionalMap, SequenceSpec, Window};

#[test]
fn every_builtin_is_decided() {
    for b in builtins() {
        let c = classify(&b.system);
        assert!(!c.any_unknown(), "{}: {:?}", b.name, c.decisions());
        for v in [&c.weak_spec, &c.spec, &c.strobo, &c.strong_strobo] {
            let map = match &b.system {
                System::Shift(m) => m.clone(),
                System::Fort(s) => s.map().clone(),
            };
            assert!(v.check(&map), "{}: {v}", b.name);
        }
    }
}

#[test]
fn only_d1_departs_from_the_drawing() {
    let odd: Vec<_> = builtins().iter().filter_map(|b| discrepancy(b, &classify(&b.system))).map(|d| d.name).collect();
    assert_eq!(odd, vec!["D1".to_string()]);
}

#[test]
fn c1_collision_is_one_and_minus_one() {
    let c = classify(&builtin("C1").unwrap().system);
    assert_eq!(c.strobo.certificate, Certificate::InjectivityCollision { first: idx(1), second: idx(-1) });
}

#[test]
fn c2_refutation_verifies() {
    let m = FunctionalMap::affine(-1, 0);
    let c = classify(&System::Shift(m.clone()));
    assert_eq!(c.weak_spec.decision, Decision::No);
    let r = refute_weak_spec(&m, &c.weak_spec.certificate, Alphabet::binary(), 5).unwrap();
    assert!(r.verify(&m));
}

#[test]
fn mixed_map_builds_a_product() {
    let m = mixed_piecewise();
    assert!(decide_strobo(&m).is_yes());
    let rho = build_rho(&m, &SequenceSpec::naturals(2000), &Window::from_ints(&[0, -2, 3]).unwrap()).unwrap();
    assert_eq!(rho.kind, RhoKind::Product);
    assert!(rho.check_guarantee(&m).unwrap());
}

#[test]
fn fort_witnesses() {
    let System::Fort(d3) = builtin("D3").unwrap().system else { panic!("D3 is a Fort system") };
    let h = FortWindow::from_ints(&d3, &[1, -1, 4]).unwrap();
    let rho = build_fort_rho(&d3, &SequenceSpec::naturals(300), &h).unwrap();
    assert!(rho.verify_exact(&d3).unwrap());
    assert!(fort_gap_constant(&d3, &h).is_err());
    let drain = FortSystem::finite(&[0, 0, 1, 2], 0).unwrap();
    let w = FortWindow::from_ints(&drain, &[1, 2, 3]).unwrap();
    let g = fort_gap_constant(&drain, &w).unwrap();
    assert_eq!(g.m, 3 + 2 + 1);
    assert!(g.verify(&drain, &w).unwrap());
}
