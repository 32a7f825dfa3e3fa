//! End-to-end acceptance checks. Each test prints one `criterion N: PASS|FAIL`
//! line (written past the harness capture) and then asserts it.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pulsefront::fronts::{
    classify_quenching, compute_pulsating_front, fit_decay_rates, quench_scan,
    verify_speed_identity, Classification, FrontConfig, FrontOutcome, FrontSolution, RunBudget,
};
use pulsefront::homogenize::{homogenization_sweep, solve_homogenized_front, ShootingConfig};
use pulsefront::model::{CoefficientProfile, ProblemInstance, ReactionProfile, ThetaMap};
use pulsefront::pde::{evolve, Field, Grid1D, SolverConfig};
use pulsefront::spectral::{
    decay_root_mu, default_seeds, dirichlet_principal_eigen, find_periodic_steady_states,
    periodic_principal_eigen, stability_limit, DecayBranch, DecayRootConfig, NewtonConfig,
};
use pulsefront::stability::{
    build_supersub, global_stability_experiment, initialv2_experiment, poincare_spectrum,
    ComovingFrame, FrameConfig, StabilityConfig, SuperSubKind,
};

const QUAD_N: usize = 2048;

fn report(n: u32, pass: bool, detail: String) -> bool {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "criterion {n:>2}: {verdict}  {detail}").unwrap();
    out.flush().unwrap();
    pass
}

fn cubic(theta: ThetaMap, coeff: CoefficientProfile, l: f64) -> ProblemInstance {
    ProblemInstance::new(coeff, ReactionProfile::cubic_auto(theta, 1.0).unwrap(), l).unwrap()
}

fn homogeneous() -> ProblemInstance {
    cubic(
        ThetaMap::Constant(0.3),
        CoefficientProfile::constant(1.0).unwrap(),
        1.0,
    )
}

fn oscillating(l: f64) -> ProblemInstance {
    cubic(
        ThetaMap::Constant(0.3),
        CoefficientProfile::cosine(2.0, 1.0).unwrap(),
        l,
    )
}

fn budget() -> RunBudget {
    RunBudget::time(3000.0)
}

fn converged(inst: &ProblemInstance) -> FrontSolution {
    match compute_pulsating_front(inst, &FrontConfig::default(), &budget()).unwrap() {
        FrontOutcome::Converged(s) => *s,
        FrontOutcome::Inconclusive(d) => panic!("front inconclusive: {}", d.reason),
    }
}

fn homogeneous_front() -> &'static FrontSolution {
    static FRONT: OnceLock<FrontSolution> = OnceLock::new();
    FRONT.get_or_init(|| converged(&homogeneous()))
}

fn oscillating_front() -> &'static FrontSolution {
    static FRONT: OnceLock<FrontSolution> = OnceLock::new();
    FRONT.get_or_init(|| converged(&oscillating(0.5)))
}

const C_EXACT: f64 = 0.4 / SQRT_2;

#[test]
fn criterion_01_homogeneous_speed() {
    let front = homogeneous_front();
    let est = front.estimate.expect("speed estimate");
    let homog = homogeneous().homogenized(QUAD_N).unwrap();
    let c0 = solve_homogenized_front(&homog, &ShootingConfig::default())
        .unwrap()
        .c0;
    let pass = (est.c_level - C_EXACT).abs() < 1e-2
        && (est.c_period - C_EXACT).abs() < 1e-2
        && (c0 - C_EXACT).abs() < 1e-3;
    assert!(report(
        1,
        pass,
        format!(
            "c_level={:.6} c_period={:.6} c0={:.8} exact={C_EXACT:.8}",
            est.c_level, est.c_period, c0
        )
    ));
}

#[test]
fn criterion_02_sign_law() {
    let mut pass = true;
    let mut cells = Vec::new();
    for theta in [0.3, 0.5, 0.7] {
        for (name, coeff) in [
            ("1", CoefficientProfile::constant(1.0).unwrap()),
            ("2+cos", CoefficientProfile::cosine(2.0, 1.0).unwrap()),
        ] {
            let inst = cubic(ThetaMap::Constant(theta), coeff, 1.0);
            let i_fbar = inst.homogenized(QUAD_N).unwrap().i_fbar;
            let q = classify_quenching(&inst, &FrontConfig::default(), &budget()).unwrap();
            let ok = match q.classification {
                Classification::Propagating { c } => theta != 0.5 && c.signum() == i_fbar.signum(),
                Classification::Stationary => theta == 0.5,
                Classification::Inconclusive => false,
            };
            pass &= ok;
            let c = match q.classification {
                Classification::Propagating { c } => format!("{c:.4}"),
                _ => q.classification.label().to_string(),
            };
            cells.push(format!("theta={theta},a={name}:{c}"));
        }
    }
    assert!(report(2, pass, cells.join(" ")));
}

#[test]
fn criterion_03_homogenization_limit() {
    let periods = [0.8, 0.4, 0.2, 0.1];
    let sweep = homogenization_sweep(
        |l| Ok(oscillating(l)),
        &periods,
        &FrontConfig::default(),
        &budget(),
        QUAD_N,
    )
    .unwrap();
    let closed = (2.0 * 3f64.sqrt()).sqrt() * 0.2;
    let gaps = sweep.speed_gaps();
    let last = gaps.last().copied().flatten().unwrap_or(f64::INFINITY);
    let pass = (sweep.c0 - closed).abs() < 1e-3
        && sweep.speed_gap_decreasing()
        && last < 0.05
        && sweep.profile_gap_decreasing();
    let fmt = |v: Vec<Option<f64>>| {
        v.iter()
            .map(|g| g.map_or("-".into(), |g| format!("{g:.2e}")))
            .collect::<Vec<_>>()
            .join(",")
    };
    assert!(report(
        3,
        pass,
        format!(
            "c0={:.6} closed={closed:.6} speed_gaps=[{}] profile_gaps=[{}]",
            sweep.c0,
            fmt(gaps),
            fmt(sweep.profile_gaps())
        )
    ));
}

#[test]
fn criterion_04_speed_identity() {
    let hom = verify_speed_identity(
        homogeneous_front(),
        &homogeneous().homogenized(QUAD_N).unwrap(),
    )
    .unwrap();
    let het = verify_speed_identity(
        oscillating_front(),
        &oscillating(0.5).homogenized(QUAD_N).unwrap(),
    )
    .unwrap();
    let rel = |r: &pulsefront::fronts::IdentityReport| {
        ((r.c_identity - r.c_measured) / r.c_measured).abs()
    };
    let pass = rel(&hom) < 0.02 && rel(&het) < 0.05;
    assert!(report(
        4,
        pass,
        format!(
            "homogeneous {:.3}% oscillating L=0.5 {:.3}%",
            100.0 * rel(&hom),
            100.0 * rel(&het)
        )
    ));
}

#[test]
fn criterion_05_pulsating_relation() {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, f) in [
        ("homogeneous", homogeneous_front()),
        ("oscillating", oscillating_front()),
    ] {
        let d = &f.pulsating_defects;
        let ok = d.len() >= 2 && d[d.len() - 2..].iter().all(|&(_, e)| e < 1e-3);
        pass &= ok;
        let tail: Vec<String> = d
            .iter()
            .rev()
            .take(2)
            .map(|(_, e)| format!("{e:.2e}"))
            .collect();
        parts.push(format!("{name}=[{}]", tail.join(",")));
    }
    assert!(report(5, pass, parts.join(" ")));
}

#[test]
fn criterion_06_eigen_closed_forms() {
    let d = 1.5;
    let inst = cubic(
        ThetaMap::Constant(0.3),
        CoefficientProfile::constant(d).unwrap(),
        1.0,
    );
    let r = 5.0;
    let dir = dirichlet_principal_eigen(&inst, |_| 0.0, r, 4001, "0").unwrap();
    let dir_exact = -0.3 - d * (PI / (2.0 * r)).powi(2);
    let per = periodic_principal_eigen(&inst, &[0.0; 64], "0").unwrap();
    let per_theta = periodic_principal_eigen(&oscillating(1.0), &[0.3; 64], "theta").unwrap();
    let radii = [2.0, 4.0, 8.0, 16.0, 32.0];
    let traces = [
        stability_limit(&inst, |_| 0.3, &radii, 1.0 / 64.0, None).unwrap(),
        stability_limit(&oscillating(1.0), |_| 0.0, &radii, 1.0 / 64.0, None).unwrap(),
        stability_limit(&oscillating(0.5), |_| 0.3, &radii, 1.0 / 128.0, None).unwrap(),
    ];
    let increasing = traces
        .iter()
        .all(|t| t.lambda.windows(2).all(|w| w[1] > w[0]));
    let pass = (dir.lambda - dir_exact).abs() < 1e-6
        && (per.lambda + 0.3).abs() < 1e-10
        && (per_theta.lambda - 0.21).abs() < 1e-10
        && increasing;
    assert!(report(
        6,
        pass,
        format!(
            "dirichlet err={:.2e} periodic err={:.2e},{:.2e} traces increasing={increasing}",
            (dir.lambda - dir_exact).abs(),
            (per.lambda + 0.3).abs(),
            (per_theta.lambda - 0.21).abs()
        )
    ));
}

#[test]
fn criterion_07_intermediate_states_unstable() {
    let cases = [
        (
            "theta=0.5+0.1cos L=0.1",
            cubic(
                ThetaMap::Cosine {
                    mean: 0.5,
                    amplitude: 0.1,
                },
                CoefficientProfile::constant(1.0).unwrap(),
                0.1,
            ),
        ),
        ("theta=0.3 a=2+cos L=10", oscillating(10.0)),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, inst) in cases {
        let homog = inst.homogenized(QUAD_N).unwrap();
        let fp = homog
            .theta_bar
            .iter()
            .map(|&t| homog.fbar_prime(t))
            .fold(f64::INFINITY, f64::min);
        let search =
            find_periodic_steady_states(&inst, &default_seeds(&homog), &NewtonConfig::default())
                .unwrap();
        let ok =
            fp > 0.0 && !search.states.is_empty() && search.states.iter().all(|s| s.lambda1 > 0.0);
        pass &= ok;
        let l: Vec<String> = search
            .states
            .iter()
            .map(|s| format!("{:.4}", s.lambda1))
            .collect();
        parts.push(format!("{name}: lambda1=[{}]", l.join(",")));
    }
    assert!(report(7, pass, parts.join("; ")));
}

#[test]
fn criterion_08_decay_rates() {
    let cfg = DecayRootConfig::default();
    let front = homogeneous_front();
    let fit = front
        .decay
        .or_else(|| fit_decay_rates(&front.profile).ok())
        .expect("tail fit");
    let inst = homogeneous();
    let mu1 = decay_root_mu(&inst, front.speed, DecayBranch::Right, &cfg)
        .unwrap()
        .mu;
    let mu2 = decay_root_mu(&inst, front.speed, DecayBranch::Left, &cfg)
        .unwrap()
        .mu;
    let d = 1.7;
    let still = cubic(
        ThetaMap::Constant(0.3),
        CoefficientProfile::constant(d).unwrap(),
        1.0,
    );
    let mu0 = decay_root_mu(&still, 0.0, DecayBranch::Right, &cfg)
        .unwrap()
        .mu;
    let rel1 = (fit.mu1 - mu1).abs() / mu1;
    let rel2 = (fit.mu2 - mu2).abs() / mu2;
    let err0 = (mu0 - (0.3 / d).sqrt()).abs();
    let pass = rel1 < 0.1 && rel2 < 0.1 && err0 < 1e-6;
    assert!(report(
        8,
        pass,
        format!(
            "mu1 fit={:.5} root={mu1:.5}; mu2 fit={:.5} root={mu2:.5}; sqrt(gamma/d) err={err0:.2e}",
            fit.mu1, fit.mu2
        )
    ));
}

#[test]
fn criterion_09_exponential_stability() {
    let inst = homogeneous();
    let front = homogeneous_front();
    let cfg = StabilityConfig::default();
    let lattice = front.profile.clone();
    let l = inst.period;
    let reference = move |x: f64| lattice.eval_cubic(x, x / l);
    let shifted = |x: f64| 1.0 / (1.0 + ((x - 3.0) / SQRT_2).exp());
    let perturbed = |x: f64| (reference(x) + 0.05 * (-x * x).exp()).clamp(0.0, 1.0);
    let step = |x: f64| if x < 0.0 { 1.0 } else { 0.0 };
    let data: [(&str, &dyn Fn(f64) -> f64); 3] = [
        ("shifted", &shifted),
        ("perturbed", &perturbed),
        ("step", &step),
    ];
    let mut pass = true;
    let mut rates = Vec::new();
    let mut parts = Vec::new();
    for (name, g) in data {
        let r = global_stability_experiment(&inst, front, g, &cfg).unwrap();
        pass &= r.accepted && r.mu_fit > 0.0 && r.final_error < 1e-4;
        rates.push(r.mu_fit);
        parts.push(format!(
            "{name}: mu={:.4} err={:.1e}",
            r.mu_fit, r.final_error
        ));
    }
    for i in 0..rates.len() {
        for j in i + 1..rates.len() {
            pass &= (rates[i] - rates[j]).abs() <= 0.2 * rates[i].max(rates[j]);
        }
    }
    let homog = inst.homogenized(QUAD_N).unwrap();
    let search =
        find_periodic_steady_states(&inst, &default_seeds(&homog), &NewtonConfig::default())
            .unwrap();
    let state = &search.states[0];
    let g2 = |x: f64| {
        if x < 0.0 {
            state.eval(x) + 0.15
        } else {
            state.eval(x) - 0.1
        }
    };
    let r2 = initialv2_experiment(&inst, front, &search.states, state, state, &g2, &cfg).unwrap();
    pass &= r2.accepted && r2.mu_fit > 0.0;
    parts.push(format!(
        "initialv2: mu={:.4} t_offset={}",
        r2.mu_fit, r2.t_offset
    ));
    assert!(report(9, pass, parts.join("; ")));
}

#[test]
fn criterion_10_supersub_defects() {
    let inst = homogeneous();
    let k = inst.reaction.lip_k;
    let sup = build_supersub(&inst, C_EXACT, SuperSubKind::Super, k);
    let sub = build_supersub(&inst, C_EXACT, SuperSubKind::Sub, k);
    let pass = sup.worst_defect >= -1e-8 && sub.worst_defect <= 1e-8;
    assert!(report(
        10,
        pass,
        format!(
            "min defect w+ = {:.3e}, max defect w- = {:.3e}",
            sup.worst_defect, sub.worst_defect
        )
    ));
}

#[test]
fn criterion_11_poincare_spectrum() {
    let inst = homogeneous();
    let cfg = FrameConfig {
        nodes_per_period: Some(10),
        half_width: Some(20.0),
        ..FrameConfig::default()
    };
    let frame = ComovingFrame::new(homogeneous_front(), &cfg).unwrap();
    let spec = poincare_spectrum(&frame, &inst, 0.05, 1).unwrap();
    let pass = spec.dimension <= 400
        && spec.leading_near_one(1e-2)
        && spec.leading_similarity > 0.99
        && spec.second_modulus < 1.0;
    assert!(report(
        11,
        pass,
        format!(
            "nodes={} leading={:.6} similarity={:.6} second={:.4} above {:.4}: {} of {}",
            spec.dimension,
            spec.leading.0,
            spec.leading_similarity,
            spec.second_modulus,
            spec.essential_radius + spec.margin,
            spec.above_radius.len(),
            spec.dimension
        )
    ));
}

#[test]
fn criterion_12_quenching_trend() {
    let scan = quench_scan(
        0.2,
        0.3,
        &[0.0, 1.0, 2.0, 3.0, 4.0],
        &FrontConfig::default(),
        &budget(),
        1,
    )
    .unwrap();
    let speeds: Vec<String> = scan
        .records
        .iter()
        .map(|r| {
            let (c, _) = r.measured_speed().unwrap_or((f64::NAN, f64::NAN));
            format!("{}:{}={c:.5}", r.lambda, r.classification())
        })
        .collect();
    let pass = scan.non_increasing && scan.stationary_consistent;
    assert!(report(12, pass, format!("|c| {}", speeds.join(" "))));
}

#[test]
fn criterion_13_comparison_principle() {
    let inst = cubic(
        ThetaMap::Cosine {
            mean: 0.45,
            amplitude: 0.1,
        },
        CoefficientProfile::cosine(2.0, 1.0).unwrap(),
        0.8,
    );
    let grid = Grid1D::new(&inst, -5, 10, 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg = SolverConfig::default();
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let lo: Vec<f64> = (0..grid.n).map(|_| rng.random_range(-0.1..1.0)).collect();
        let hi: Vec<f64> = lo.iter().map(|v| v + rng.random_range(0.0..0.2)).collect();
        let mut a = Field { values: lo, t: 0.0 };
        let mut b = Field { values: hi, t: 0.0 };
        for t in [0.5, 1.0, 2.0] {
            a = evolve(&a, &inst, &grid, cfg, t, |_| true).unwrap();
            b = evolve(&b, &inst, &grid, cfg, t, |_| true).unwrap();
            let gap = a
                .values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| y - x)
                .fold(f64::INFINITY, f64::min);
            worst = worst.min(gap);
        }
    }
    assert!(report(
        13,
        worst >= -1e-10,
        format!("50 pairs, min(u_hi - u_lo) = {worst:.3e}")
    ));
}
