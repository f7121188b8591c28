//! The named instances through the public pipeline: towers, verdicts and
//! the region each verdict rests on.

use lorenz_core::classify::{classify, AttractorKind, ClassifyParams};
use lorenz_core::orbits::periodic_orbits;
use lorenz_core::renorm::build_tower;
use lorenz_core::scan::instances;
use lorenz_core::{MapParams, StandardLorenzMap};

fn map(p: MapParams) -> StandardLorenzMap {
    StandardLorenzMap::new(p).unwrap()
}

#[test]
fn tower_depths() {
    let cases = [
        (instances::FULL, 0),
        (instances::ONCE_RENORMALIZABLE, 1),
        (instances::TWICE_RENORMALIZABLE, 2),
        (instances::SOLENOID, 4),
    ];
    for (p, depth) in cases {
        let t = build_tower(&map(p), 4, 8).unwrap();
        assert_eq!(t.depth(), depth, "{p:?}");
        assert_eq!(t.depth_limit_hit, depth == 4, "{p:?}");
    }
}

#[test]
fn verdicts() {
    let params = ClassifyParams::default();
    let cases = [
        (instances::FULL, "ChaoticCycleOfIntervals"),
        (instances::CONTRACTING, "PeriodicAttractors"),
        (instances::ONCE_RENORMALIZABLE, "ChaoticCycleOfIntervals"),
        (instances::SOLENOID, "SolenoidEvidence"),
        (instances::CHERRY, "CherryEvidence"),
        (instances::PERIOD_TWO, "PeriodicAttractors"),
    ];
    for (p, kind) in cases {
        let r = classify(&map(p), &params);
        assert_eq!(r.kind.name(), kind, "{p:?}");
        assert!(r.invariant_violations.is_empty(), "{p:?}: {:?}", r.invariant_violations);
        if !matches!(r.kind, AttractorKind::PeriodicAttractors(_)) {
            let u = r.trapping.as_ref().expect("non-periodic verdicts carry a trapping region");
            assert!(u.check_invariance(&map(p), 2000, 1e-9).passed(), "{p:?}");
        }
    }
}

#[test]
fn period_two_attractor() {
    let f = map(instances::PERIOD_TWO);
    let attractors: Vec<_> = periodic_orbits(&f, 12).into_iter().filter(|o| o.stability.is_attractor()).collect();
    assert_eq!(attractors.len(), 1);
    assert_eq!(attractors[0].period, 2);
    let r = classify(&f, &ClassifyParams::default());
    assert!(r.basin_coverage.unwrap() >= 0.999);
}

#[test]
fn cherry_rotation_is_irrational_looking() {
    let r = classify(&map(instances::CHERRY), &ClassifyParams::default());
    let rho = r.rotation.expect("Cherry verdicts carry a rotation estimate");
    assert_eq!(rho.rational_lock, None);
    assert!((rho.value - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-5, "{}", rho.value);
}
