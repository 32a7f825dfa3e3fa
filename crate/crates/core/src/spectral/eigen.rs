use serde::Serialize;

use crate::model::ProblemInstance;
use crate::numerics::{solve_cyclic_tridiagonal, Tridiagonal};

use super::SpectralError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Boundary {
    Dirichlet { r: f64 },
    Periodic { period: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenPair {
    pub lambda: f64,
    /// Node positions matching `psi`.
    pub x: Vec<f64>,
    /// Positive, `max = 1`.
    pub psi: Vec<f64>,
    pub boundary: Boundary,
    /// What the potential linearizes about.
    pub potential: String,
    /// `‖Aψ - λψ‖_∞ / ‖ψ‖_∞`.
    pub residual: f64,
    /// Collatz-Wielandt bounds `min (Aψ)_i/ψ_i ≤ λ ≤ max (Aψ)_i/ψ_i`.
    pub bracket: (f64, f64),
    pub iterations: usize,
}

const MAX_ITER: usize = 10_000;

fn apply(m: &Tridiagonal, cyclic: bool, x: &[f64], y: &mut [f64]) {
    if cyclic {
        m.apply_cyclic(x, y)
    } else {
        m.apply(x, y)
    }
}

/// Eigenvalue, positive eigenvector, Collatz-Wielandt bracket, iterations.
pub type Eigenpair = (f64, Vec<f64>, (f64, f64), usize);

/// Principal eigenpair of a matrix with positive off-diagonals by inverse
/// iteration. The shift sits just above the upper Collatz-Wielandt bound of
/// the current iterate, so the shifted matrix stays an M-matrix and every
/// iterate stays positive.
pub fn principal_eigenpair(
    m: &Tridiagonal,
    cyclic: bool,
    rel_tol: f64,
) -> Result<Eigenpair, SpectralError> {
    let n = m.len();
    if n == 0 {
        return Err(SpectralError::InvalidInput("empty operator".into()));
    }
    let norm_a = (0..n)
        .map(|i| m.lower[i].abs() + m.diag[i].abs() + m.upper[i].abs())
        .fold(0.0, f64::max);
    // roundoff floor of `Av` for a vector with sup norm 1
    let floor = 64.0 * f64::EPSILON * norm_a;
    let mut v = vec![1.0; n];
    let mut w = vec![0.0; n];
    let mut width = f64::INFINITY;
    for it in 0..MAX_ITER {
        apply(m, cyclic, &v, &mut w);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (wi, vi) in w.iter().zip(&v) {
            let r = wi / vi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        width = hi - lo;
        let scale = 1.0 + hi.abs();
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let vw: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let lambda = vw / vv;
        let res = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).abs())
            .fold(0.0, f64::max);
        if width <= rel_tol * scale || (it > 0 && res <= (rel_tol * scale).max(floor)) {
            return Ok((lambda, v, (lo, hi), it));
        }
        let sigma = hi + width.max(1e-3 * rel_tol * scale);
        let mut shifted = Tridiagonal {
            lower: m.lower.iter().map(|x| -x).collect(),
            diag: m.diag.iter().map(|d| sigma - d).collect(),
            upper: m.upper.iter().map(|x| -x).collect(),
        };
        if !cyclic {
            shifted.lower[0] = 0.0;
            shifted.upper[n - 1] = 0.0;
        }
        let ok = if cyclic {
            solve_cyclic_tridiagonal(&shifted, &mut v)
        } else {
            shifted.solve(&mut v)
        };
        ok.ok_or(SpectralError::Singular)?;
        let top = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(top > 0.0) || !top.is_finite() {
            return Err(SpectralError::LostPositivity);
        }
        for x in v.iter_mut() {
            *x /= top;
        }
        if v.iter().any(|&x| !(x > 0.0)) {
            return Err(SpectralError::LostPositivity);
        }
    }
    Err(SpectralError::NoConvergence {
        iterations: MAX_ITER,
        width,
    })
}

fn residual(m: &Tridiagonal, cyclic: bool, lambda: f64, v: &[f64]) -> f64 {
    let mut w = vec![0.0; v.len()];
    apply(m, cyclic, v, &mut w);
    let top = v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    w.iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).abs())
        .fold(0.0, f64::max)
        / top
}

fn finish(
    m: &Tridiagonal,
    cyclic: bool,
    x: Vec<f64>,
    boundary: Boundary,
    potential: String,
) -> Result<EigenPair, SpectralError> {
    let (lambda, psi, bracket, iterations) = principal_eigenpair(m, cyclic, 1e-12)?;
    let residual = residual(m, cyclic, lambda, &psi);
    Ok(EigenPair {
        lambda,
        x,
        psi,
        boundary,
        potential,
        residual,
        bracket,
        iterations,
    })
}

/// Largest eigenvalue of `(a_L ψ')' + ∂_u f_L(x, ū(x)) ψ` on `(-R, R)` with
/// `ψ(±R) = 0`, on `n_nodes` interior nodes.
pub fn dirichlet_principal_eigen<U: Fn(f64) -> f64>(
    inst: &ProblemInstance,
    ubar: U,
    r: f64,
    n_nodes: usize,
    label: &str,
) -> Result<EigenPair, SpectralError> {
    if !(r > 0.0) || n_nodes < 3 {
        return Err(SpectralError::InvalidInput(format!(
            "R = {r}, {n_nodes} nodes"
        )));
    }
    let h = 2.0 * r / (n_nodes + 1) as f64;
    let ih2 = 1.0 / (h * h);
    let mut m = Tridiagonal::new(n_nodes);
    let mut x = Vec::with_capacity(n_nodes);
    for k in 0..n_nodes {
        let xk = -r + (k + 1) as f64 * h;
        let (al, ar) = (inst.a_l(xk - 0.5 * h), inst.a_l(xk + 0.5 * h));
        m.lower[k] = al * ih2;
        m.upper[k] = ar * ih2;
        m.diag[k] = -(al + ar) * ih2 + inst.df_l(xk, ubar(xk));
        x.push(xk);
    }
    m.lower[0] = 0.0;
    m.upper[n_nodes - 1] = 0.0;
    finish(&m, false, x, Boundary::Dirichlet { r }, label.to_string())
}

/// Periodic operator on one period of `y`:
/// `L⁻²(aψ')' - 2L⁻¹μaψ' + (aμ² - L⁻¹μa' - cμ + q(y))ψ`.
pub(crate) fn periodic_operator<Q: Fn(usize, f64) -> f64>(
    inst: &ProblemInstance,
    n: usize,
    mu: f64,
    c: f64,
    q: Q,
) -> Tridiagonal {
    let l = inst.period;
    let k = 1.0 / n as f64;
    let diff = 1.0 / (l * l * k * k);
    let mut m = Tridiagonal::new(n);
    for j in 0..n {
        let y = j as f64 * k;
        let (al, ar) = (inst.coeff.a(y - 0.5 * k), inst.coeff.a(y + 0.5 * k));
        let a = inst.coeff.a(y);
        let adv = mu * a / (l * k);
        m.lower[j] = al * diff + adv;
        m.upper[j] = ar * diff - adv;
        m.diag[j] = -(al + ar) * diff + a * mu * mu - mu * inst.coeff.da(y) / l - c * mu + q(j, y);
    }
    m
}

/// Principal eigenvalue of `(a_L φ')' + ∂_u f_L(x, ū)φ` for `L`-periodic `φ`;
/// `ubar` holds `ū` at `x_j = jL/n`.
pub fn periodic_principal_eigen(
    inst: &ProblemInstance,
    ubar: &[f64],
    label: &str,
) -> Result<EigenPair, SpectralError> {
    let n = ubar.len();
    if n < 3 {
        return Err(SpectralError::InvalidInput(
            "need at least 3 nodes per period".into(),
        ));
    }
    let m = periodic_operator(inst, n, 0.0, 0.0, |j, y| inst.reaction.df(y, ubar[j]));
    let x = (0..n).map(|j| j as f64 * inst.period / n as f64).collect();
    finish(
        &m,
        true,
        x,
        Boundary::Periodic {
            period: inst.period,
        },
        label.to_string(),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityTrace {
    /// Radii actually used (multiples of the node spacing).
    pub r: Vec<f64>,
    pub lambda: Vec<f64>,
    pub periodic: Option<f64>,
    /// Periodic value when available, else the last Dirichlet value.
    pub lambda1: f64,
    pub unstable: bool,
}

/// Dirichlet eigenvalues on growing intervals. All intervals share the node
/// lattice `x = kh`, so the discrete trace is monotone as well.
pub fn stability_limit<U: Fn(f64) -> f64>(
    inst: &ProblemInstance,
    ubar: U,
    r_list: &[f64],
    h: f64,
    periodic_samples: Option<&[f64]>,
) -> Result<StabilityTrace, SpectralError> {
    if r_list.is_empty() || r_list.windows(2).any(|w| w[1] <= w[0]) || !(h > 0.0) {
        return Err(SpectralError::InvalidInput(
            "R list must be increasing and h positive".into(),
        ));
    }
    let mut rs = Vec::with_capacity(r_list.len());
    let mut lambda: Vec<f64> = Vec::with_capacity(r_list.len());
    for &r in r_list {
        let half = (r / h).round().max(2.0) as usize;
        let r_eff = half as f64 * h;
        let pair = dirichlet_principal_eigen(inst, &ubar, r_eff, 2 * half - 1, "trace")?;
        if let Some(&prev) = lambda.last() {
            let drop = prev - pair.lambda;
            if drop > 1e-10 * (1.0 + prev.abs()) {
                return Err(SpectralError::NonMonotone { r: r_eff, drop });
            }
        }
        rs.push(r_eff);
        lambda.push(pair.lambda);
    }
    let periodic = match periodic_samples {
        Some(s) => Some(periodic_principal_eigen(inst, s, "trace")?.lambda),
        None => None,
    };
    let lambda1 = periodic.unwrap_or(*lambda.last().unwrap());
    Ok(StabilityTrace {
        r: rs,
        lambda,
        periodic,
        lambda1,
        unstable: lambda1 > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CoefficientProfile, ReactionProfile, ThetaMap};
    use std::f64::consts::PI;

    fn decay_inst() -> ProblemInstance {
        ProblemInstance::new(
            CoefficientProfile::constant(1.0).unwrap(),
            ReactionProfile::linear_decay(1.0),
            1.0,
        )
        .unwrap()
    }

    fn cubic(theta: f64, coeff: CoefficientProfile, l: f64) -> ProblemInstance {
        ProblemInstance::new(
            coeff,
            ReactionProfile::cubic_auto(ThetaMap::Constant(theta), 1.0).unwrap(),
            l,
        )
        .unwrap()
    }

    #[test]
    fn dirichlet_closed_form() {
        let r = PI / 2.0;
        let p = dirichlet_principal_eigen(&decay_inst(), |_| 0.0, r, 4000, "0").unwrap();
        assert!((p.lambda + 2.0).abs() < 1e-5, "{}", p.lambda);
        assert!(p.residual < 1e-8);
        let p2 = dirichlet_principal_eigen(&decay_inst(), |_| 0.0, 2.0 * r, 4000, "0").unwrap();
        assert!(p2.lambda > p.lambda && p2.lambda < -1.0);
        // the discrete eigenvector is the sampled cosine
        let mut l2 = 0.0;
        let h = 2.0 * r / 4001.0;
        for (x, psi) in p.x.iter().zip(&p.psi) {
            l2 += (psi - (PI * x / (2.0 * r)).cos()).powi(2) * h;
        }
        assert!(l2.sqrt() < 1e-6);
    }

    #[test]
    fn periodic_constant_potentials() {
        let inst = cubic(0.3, CoefficientProfile::cosine(2.0, 1.0).unwrap(), 1.0);
        let at_theta = periodic_principal_eigen(&inst, &vec![0.3; 128], "theta").unwrap();
        assert!((at_theta.lambda - 0.21).abs() < 1e-10);
        assert!(at_theta.psi.iter().all(|&p| (p - 1.0).abs() < 1e-8));
        let at_zero = periodic_principal_eigen(&inst, &vec![0.0; 128], "0").unwrap();
        assert!((at_zero.lambda + 0.3).abs() < 1e-10);
        assert!(at_zero.residual < 1e-8);
    }

    #[test]
    fn comparison_bounds_and_order() {
        let inst = cubic(0.4, CoefficientProfile::cosine(2.0, 1.0).unwrap(), 2.0);
        let sample = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|j| 0.5 + 0.3 * (2.0 * PI * j as f64 / n as f64).sin())
                .collect()
        };
        let mut prev: Option<f64> = None;
        let mut diffs: Vec<f64> = vec![];
        for n in [64usize, 128, 256, 512] {
            let u = sample(n);
            let p = periodic_principal_eigen(&inst, &u, "s").unwrap();
            let q: Vec<f64> = (0..n)
                .map(|j| inst.reaction.df(j as f64 / n as f64, u[j]))
                .collect();
            let (qmin, qmax) = q.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, &b| {
                (a.0.min(b), a.1.max(b))
            });
            assert!(p.lambda >= qmin - 1e-12 && p.lambda <= qmax + 1e-12);
            assert!(p.psi.iter().all(|&v| v > 0.0));
            assert!(p.residual < 1e-8);
            if let Some(prev) = prev {
                diffs.push((p.lambda - prev).abs());
            }
            prev = Some(p.lambda);
        }
        for w in diffs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 3.5 && ratio < 4.5, "{ratio}");
        }
    }

    #[test]
    fn traces_increase_to_limits() {
        let r_list: Vec<f64> = (1..=12).map(|k| 2.0 * k as f64).collect();
        let t = stability_limit(&decay_inst(), |_| 0.0, &r_list, 0.01, None).unwrap();
        for (r, l) in t.r.iter().zip(&t.lambda) {
            let exact = -1.0 - (PI / (2.0 * r)).powi(2);
            assert!((l - exact).abs() < 1e-4);
        }
        assert!(t.lambda.windows(2).all(|w| w[1] > w[0] - 1e-10));

        let inst = cubic(0.3, CoefficientProfile::constant(1.0).unwrap(), 1.0);
        let t = stability_limit(
            &inst,
            |_| 0.3,
            &[5.0, 10.0, 20.0, 80.0],
            1.0 / 64.0,
            Some(&[0.3; 64]),
        )
        .unwrap();
        assert!(t.lambda.windows(2).all(|w| w[1] > w[0]));
        assert!((t.lambda[3] - 0.21).abs() < 1e-3);
        assert!((t.periodic.unwrap() - 0.21).abs() < 1e-10);
        assert!(t.unstable);
    }

    #[test]
    fn heterogeneous_trace_approaches_periodic_value() {
        let inst = cubic(0.3, CoefficientProfile::cosine(2.0, 1.0).unwrap(), 1.0);
        let npp = 64;
        let samples: Vec<f64> = (0..npp)
            .map(|j| 0.2 + 0.1 * (2.0 * PI * j as f64 / npp as f64).cos())
            .collect();
        let s = samples.clone();
        let ubar = move |x: f64| {
            let k = (x * npp as f64).round() as i64;
            s[k.rem_euclid(npp as i64) as usize]
        };
        let t = stability_limit(
            &inst,
            ubar,
            &[4.0, 16.0, 64.0, 256.0],
            1.0 / npp as f64,
            Some(&samples),
        )
        .unwrap();
        let per = t.periodic.unwrap();
        assert!(t.lambda[3] < per + 1e-10);
        assert!(per - t.lambda[3] < 1e-4, "{} {}", per, t.lambda[3]);
    }
}
