use std::f64::consts::PI;

use pulsefront::model::{CoefficientProfile, ProblemInstance, ReactionProfile, ThetaMap};
use pulsefront::spectral::{
    decay_root_mu, default_seeds, dirichlet_principal_eigen, find_periodic_steady_states,
    periodic_principal_eigen, stability_limit, DecayBranch, DecayRootConfig, NewtonConfig, Seed,
    StabilityClass,
};

fn cubic(theta: ThetaMap, coeff: CoefficientProfile, l: f64) -> ProblemInstance {
    ProblemInstance::new(coeff, ReactionProfile::cubic_auto(theta, 1.0).unwrap(), l).unwrap()
}

fn decay(rate: f64) -> ProblemInstance {
    ProblemInstance::new(
        CoefficientProfile::constant(1.0).unwrap(),
        ReactionProfile::linear_decay(rate),
        1.0,
    )
    .unwrap()
}

#[test]
fn dirichlet_constant_case() {
    let r = PI / 2.0;
    let p = dirichlet_principal_eigen(&decay(1.0), |_| 0.0, r, 4000, "0").unwrap();
    assert!((p.lambda + 2.0).abs() < 1e-5);
    assert!(p.residual <= 1e-8);
    assert!(p.psi.iter().all(|&v| v > 0.0));
    let wide = dirichlet_principal_eigen(&decay(1.0), |_| 0.0, 2.0 * r, 4000, "0").unwrap();
    assert!(wide.lambda > p.lambda && wide.lambda < -1.0);
    let h = 2.0 * r / 4001.0;
    let l2: f64 =
        p.x.iter()
            .zip(&p.psi)
            .map(|(x, s)| (s - (PI * x / (2.0 * r)).cos()).powi(2) * h)
            .sum();
    assert!(l2.sqrt() < 1e-6);
}

#[test]
fn periodic_constant_potentials() {
    let inst = cubic(
        ThetaMap::Constant(0.3),
        CoefficientProfile::constant(1.0).unwrap(),
        1.0,
    );
    let at_theta = periodic_principal_eigen(&inst, &[0.3; 64], "theta").unwrap();
    assert!((at_theta.lambda - 0.21).abs() < 1e-10);
    assert!(at_theta.psi.iter().all(|&v| (v - 1.0).abs() < 1e-8));
    let at_zero = periodic_principal_eigen(&inst, &[0.0; 64], "0").unwrap();
    assert!((at_zero.lambda + 0.3).abs() < 1e-10);
}

#[test]
fn eigenvalue_lies_between_potential_extremes() {
    let inst = cubic(
        ThetaMap::Cosine {
            mean: 0.4,
            amplitude: 0.1,
        },
        CoefficientProfile::cosine(2.0, 1.0).unwrap(),
        1.5,
    );
    let n = 128;
    let u: Vec<f64> = (0..n)
        .map(|j| 0.5 + 0.3 * (2.0 * PI * j as f64 / n as f64).cos())
        .collect();
    let p = periodic_principal_eigen(&inst, &u, "u").unwrap();
    let q: Vec<f64> = (0..n)
        .map(|j| inst.reaction.df(j as f64 / n as f64, u[j]))
        .collect();
    let lo = q.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(p.lambda >= lo - 1e-12 && p.lambda <= hi + 1e-12);
    assert!(p.psi.iter().all(|&v| v > 0.0));
    assert!(p.residual <= 1e-8);
}

#[test]
fn traces_increase_towards_the_limit() {
    let radii: Vec<f64> = (1..=10).map(|k| 2.0 * k as f64).collect();
    let t = stability_limit(&decay(1.0), |_| 0.0, &radii, 0.01, None).unwrap();
    assert!(t.lambda.windows(2).all(|w| w[1] > w[0] - 1e-10));
    for (r, l) in t.r.iter().zip(&t.lambda) {
        assert!((l - (-1.0 - (PI / (2.0 * r)).powi(2))).abs() < 1e-4);
    }
    let inst = cubic(
        ThetaMap::Constant(0.3),
        CoefficientProfile::constant(1.0).unwrap(),
        1.0,
    );
    let t = stability_limit(
        &inst,
        |_| 0.3,
        &[5.0, 10.0, 20.0, 80.0],
        1.0 / 64.0,
        Some(&[0.3; 64]),
    )
    .unwrap();
    assert!(t.lambda.windows(2).all(|w| w[1] > w[0]));
    assert!((t.lambda1 - 0.21).abs() < 1e-10 && t.unstable);
    assert!(stability_limit(&inst, |_| 0.3, &[5.0, 2.0], 0.1, None).is_err());
}

#[test]
fn constant_threshold_has_one_unstable_state() {
    let inst = cubic(
        ThetaMap::Constant(0.3),
        CoefficientProfile::cosine(2.0, 1.0).unwrap(),
        1.0,
    );
    let homog = inst.homogenized(512).unwrap();
    let mut seeds = default_seeds(&homog);
    seeds.push(Seed::Constant { value: 0.33 });
    let found = find_periodic_steady_states(&inst, &seeds, &NewtonConfig::default()).unwrap();
    assert_eq!(found.states.len(), 1);
    let s = &found.states[0];
    assert!(s.values.iter().all(|v| (v - 0.3).abs() < 1e-9));
    assert_eq!(s.class, StabilityClass::Unstable);
}

#[test]
fn short_period_state_near_the_mean_threshold_is_unstable() {
    let inst = cubic(
        ThetaMap::Cosine {
            mean: 0.5,
            amplitude: 0.1,
        },
        CoefficientProfile::constant(1.0).unwrap(),
        0.1,
    );
    let homog = inst.homogenized(512).unwrap();
    let found =
        find_periodic_steady_states(&inst, &default_seeds(&homog), &NewtonConfig::default())
            .unwrap();
    assert!(!found.states.is_empty());
    for s in &found.states {
        assert!(s.values.iter().all(|v| (v - 0.5).abs() < 0.05));
        assert!(s.lambda1 > 0.0);
    }
}

#[test]
fn seeds_outside_the_unit_interval_fail() {
    let inst = cubic(
        ThetaMap::Constant(0.3),
        CoefficientProfile::constant(1.0).unwrap(),
        1.0,
    );
    let seeds = [
        Seed::Constant { value: -0.2 },
        Seed::Constant { value: 1.4 },
    ];
    let found = find_periodic_steady_states(&inst, &seeds, &NewtonConfig::default()).unwrap();
    assert!(found.states.is_empty());
    assert_eq!(found.failures.len(), 2);
}

#[test]
fn decay_roots_constant_coefficients() {
    let cfg = DecayRootConfig::default();
    let d = 2.5;
    let inst = cubic(
        ThetaMap::Constant(0.3),
        CoefficientProfile::constant(d).unwrap(),
        1.0,
    );
    let r = decay_root_mu(&inst, 0.0, DecayBranch::Right, &cfg).unwrap();
    assert!((r.mu - (0.3 / d).sqrt()).abs() < 1e-6);
    let inst = cubic(
        ThetaMap::Constant(0.3),
        CoefficientProfile::constant(1.0).unwrap(),
        1.0,
    );
    let c = 0.4 / 2f64.sqrt();
    let right = decay_root_mu(&inst, c, DecayBranch::Right, &cfg).unwrap();
    assert!((right.mu - (c + (c * c + 1.2).sqrt()) / 2.0).abs() < 1e-8);
    let left = decay_root_mu(&inst, c, DecayBranch::Left, &cfg).unwrap();
    assert!((left.mu - (-c + (c * c + 2.8).sqrt()) / 2.0).abs() < 1e-8);
}

#[test]
fn decay_eigenvalue_grid_is_continuous() {
    let inst = cubic(
        ThetaMap::Constant(0.3),
        CoefficientProfile::cosine(2.0, 1.0).unwrap(),
        1.0,
    );
    let r = decay_root_mu(&inst, 0.3, DecayBranch::Right, &DecayRootConfig::default()).unwrap();
    assert!(r.mu > 0.0);
    assert!(r.grid.windows(2).all(|w| (w[1].1 - w[0].1).abs() < 0.1));
}
