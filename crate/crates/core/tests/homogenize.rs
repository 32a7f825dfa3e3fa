use std::f64::consts::SQRT_2;

use proptest::prelude::*;

use pulsefront::fronts::{FrontConfig, ProfileLattice, RunBudget};
use pulsefront::homogenize::{
    align_profiles, homogenization_sweep, homogenized_decay_rates, solve_homogenized_front,
    write_sweep_csv, HomogenizeError, ShootingConfig,
};
use pulsefront::model::{
    CoefficientProfile, HomogenizedData, ProblemInstance, ReactionProfile, ThetaMap,
};

fn cubic(theta: ThetaMap, coeff: CoefficientProfile, l: f64) -> ProblemInstance {
    ProblemInstance::new(coeff, ReactionProfile::cubic_auto(theta, 1.0).unwrap(), l).unwrap()
}

fn averaged(theta: f64, a_h: f64) -> HomogenizedData {
    let r = ReactionProfile::cubic_auto(ThetaMap::Constant(theta), 1.0).unwrap();
    HomogenizedData::from_parts(a_h, &r, 512).unwrap()
}

#[test]
fn averaged_speed_from_the_instance() {
    let inst = cubic(
        ThetaMap::Constant(0.3),
        CoefficientProfile::cosine(2.0, 1.0).unwrap(),
        1.0,
    );
    let homog = inst.homogenized(2048).unwrap();
    let f = solve_homogenized_front(&homog, &ShootingConfig::default()).unwrap();
    assert!((f.c0 - (2.0 * 3f64.sqrt()).sqrt() * 0.2).abs() < 1e-6);
    assert!((f.phi0(0.0) - 0.5).abs() < 1e-9);
    let (lo, hi) = f.xi_range();
    let s = f.samples();
    assert!(s.windows(2).all(|w| w[1][1] < w[0][1]));
    assert!(f.phi0(lo) > 1.0 - 1e-4 && f.phi0(hi) < 1e-4);
}

#[test]
fn oscillating_threshold_averages_to_a_balanced_wave() {
    let inst = cubic(
        ThetaMap::Cosine {
            mean: 0.5,
            amplitude: 0.2,
        },
        CoefficientProfile::constant(1.0).unwrap(),
        1.0,
    );
    let f = solve_homogenized_front(&inst.homogenized(512).unwrap(), &ShootingConfig::default())
        .unwrap();
    assert_eq!(f.c0, 0.0);
}

#[test]
fn characteristic_roots() {
    let h = averaged(0.3, 1.0);
    let f = solve_homogenized_front(&h, &ShootingConfig::default()).unwrap();
    let (l1, l2) = homogenized_decay_rates(&f, &h);
    let c = f.c0;
    assert!((l1 - (c + (c * c + 1.2).sqrt()) / 2.0).abs() < 1e-9);
    assert!((l2 - (-c + (c * c + 2.8).sqrt()) / 2.0).abs() < 1e-9);
    assert!((l1 - 1.0 / SQRT_2).abs() < 1e-6 && (l2 - 1.0 / SQRT_2).abs() < 1e-6);

    let still = averaged(0.5, 1.0);
    let f = solve_homogenized_front(&still, &ShootingConfig::default()).unwrap();
    let (l1, _) = homogenized_decay_rates(&f, &still);
    assert!((l1 - 0.5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn alignment_recovers_translates() {
    let f = solve_homogenized_front(&averaged(0.3, 1.0), &ShootingConfig::default()).unwrap();
    let same = ProfileLattice::from_fn(0.05, -400, 800, 4, |xi, _| f.phi0(xi));
    let a = align_profiles(&same, &f);
    assert!(a.shift.abs() < 1e-6 && a.gap < 1e-8);
    let moved = ProfileLattice::from_fn(0.05, -400, 800, 4, |xi, _| f.phi0(xi - 1.0));
    assert!((align_profiles(&moved, &f).shift - 1.0).abs() < 0.05);
}

#[test]
fn sweep_on_a_homogeneous_family_is_flat() {
    let family = |l: f64| {
        Ok(cubic(
            ThetaMap::Constant(0.3),
            CoefficientProfile::constant(1.0).unwrap(),
            l,
        ))
    };
    let report = homogenization_sweep(
        family,
        &[1.0, 0.5],
        &FrontConfig::default(),
        &RunBudget::time(3000.0),
        512,
    )
    .unwrap();
    for r in &report.records {
        assert!(r.error.is_none());
        assert!(r.c_gap_rel.unwrap() < 2e-3, "{:?}", r.c_gap_rel);
        assert!(r.alignment.unwrap().gap < 0.05);
    }
    let mut csv = Vec::new();
    write_sweep_csv(&report, &mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 3);
}

#[test]
fn sweep_refuses_a_zero_averaged_speed() {
    let family = |l: f64| {
        Ok(cubic(
            ThetaMap::Constant(0.5),
            CoefficientProfile::constant(1.0).unwrap(),
            l,
        ))
    };
    let out = homogenization_sweep(
        family,
        &[0.5, 0.25],
        &FrontConfig::default(),
        &RunBudget::time(10.0),
        512,
    );
    assert!(matches!(out, Err(HomogenizeError::ZeroSpeed)));
    let out = homogenization_sweep(
        family,
        &[0.25, 0.5],
        &FrontConfig::default(),
        &RunBudget::time(10.0),
        512,
    );
    assert!(out.is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn speed_decreases_with_the_threshold(t1 in 0.05f64..0.85, dt in 0.02f64..0.1) {
        let cfg = ShootingConfig::default();
        let c1 = solve_homogenized_front(&averaged(t1, 1.0), &cfg).unwrap().c0;
        let c2 = solve_homogenized_front(&averaged(t1 + dt, 1.0), &cfg).unwrap().c0;
        prop_assert!(c2 < c1);
        prop_assert!((c1 - (1.0 - 2.0 * t1) / SQRT_2).abs() < 1e-6);
    }
}
