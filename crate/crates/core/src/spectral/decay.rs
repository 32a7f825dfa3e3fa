use serde::{Deserialize, Serialize};

use crate::fronts::FrontSolution;
use crate::model::ProblemInstance;
use crate::numerics::bisect;

use super::eigen::{periodic_operator, principal_eigenpair};
use super::SpectralError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayBranch {
    /// `u → 0` as `x → +∞`, linearized at 0.
    Right,
    /// `u → 1` as `x → -∞`, linearized at 1.
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayRootConfig {
    pub nodes: usize,
    pub mu_max: f64,
    pub mu_step: f64,
    pub tol: f64,
}

impl Default for DecayRootConfig {
    fn default() -> Self {
        Self {
            nodes: 256,
            mu_max: 50.0,
            mu_step: 0.05,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRoot {
    pub mu: f64,
    pub branch: DecayBranch,
    pub lambda_at_zero: f64,
    /// `(μ, λ₁(μ))` on the scanned grid.
    pub grid: Vec<(f64, f64)>,
    pub nodes: usize,
}

fn nodes_for(inst: &ProblemInstance, cfg: &DecayRootConfig) -> usize {
    // keeps the off-diagonals of the discrete T_μ positive up to μ_max
    let ratio = inst.coeff.a_max / inst.coeff.a_min;
    cfg.nodes
        .max((2.0 * cfg.mu_max * inst.period * ratio).ceil() as usize + 1)
}

/// Principal periodic eigenvalue of `T_μ`.
pub(crate) fn t_mu_eigenvalue(
    inst: &ProblemInstance,
    c: f64,
    mu: f64,
    branch: DecayBranch,
    n: usize,
) -> Result<f64, SpectralError> {
    let (m_signed, state) = match branch {
        DecayBranch::Right => (mu, 0.0),
        DecayBranch::Left => (-mu, 1.0),
    };
    let m = periodic_operator(inst, n, m_signed, c, |_, y| inst.reaction.df(y, state));
    Ok(principal_eigenpair(&m, true, 1e-13)?.0)
}

/// Positive root `μ` of `λ₁(μ) = 0`, the exponential rate of a front with
/// speed `c` on the chosen side.
pub fn decay_root_mu(
    inst: &ProblemInstance,
    c: f64,
    branch: DecayBranch,
    cfg: &DecayRootConfig,
) -> Result<DecayRoot, SpectralError> {
    if !(cfg.mu_step > 0.0 && cfg.mu_max > cfg.mu_step) {
        return Err(SpectralError::InvalidInput(
            "need 0 < mu_step < mu_max".into(),
        ));
    }
    let n = nodes_for(inst, cfg);
    let lambda_at_zero = t_mu_eigenvalue(inst, c, 0.0, branch, n)?;
    if lambda_at_zero >= 0.0 {
        return Err(SpectralError::InvalidInput(format!(
            "linearization is not stable: lambda_1(0) = {lambda_at_zero}"
        )));
    }
    let mut grid = vec![(0.0, lambda_at_zero)];
    let mut k = 1;
    loop {
        let mu = (k as f64 * cfg.mu_step).min(cfg.mu_max);
        let lam = t_mu_eigenvalue(inst, c, mu, branch, n)?;
        grid.push((mu, lam));
        if lam > 0.0 {
            break;
        }
        if mu >= cfg.mu_max {
            return Err(SpectralError::NoSignChange { mu_max: cfg.mu_max });
        }
        k += 1;
    }
    let (lo, hi) = (grid[grid.len() - 2].0, grid[grid.len() - 1].0);
    let mut failure = None;
    let mu = bisect(
        |mu| match t_mu_eigenvalue(inst, c, mu, branch, n) {
            Ok(l) => l,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        cfg.tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let mu = mu.map_err(|_| SpectralError::NoSignChange { mu_max: cfg.mu_max })?;
    Ok(DecayRoot {
        mu,
        branch,
        lambda_at_zero,
        grid,
        nodes: n,
    })
}

/// `φ ≤ C₁ e^{-μ₁(ξ - A₁)}` for `ξ ≥ A₁` and `1 - φ ≤ C₂ e^{μ₂(ξ - A₂)}` for
/// `ξ ≤ A₂`, with the rates from `T_μ` and constants read off the profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayEstimate {
    pub mu1: f64,
    pub mu2: f64,
    pub c1: f64,
    pub c2: f64,
    pub a1_pos: f64,
    pub a2_pos: f64,
}

pub fn decay_estimate(
    inst: &ProblemInstance,
    front: &FrontSolution,
    cfg: &DecayRootConfig,
) -> Result<DecayEstimate, SpectralError> {
    let mu1 = decay_root_mu(inst, front.speed, DecayBranch::Right, cfg)?.mu;
    let mu2 = decay_root_mu(inst, front.speed, DecayBranch::Left, cfg)?.mu;
    let p = &front.profile;
    let row = |m: usize| (0..p.n_y).map(move |j| p.at(m, j));
    let max_row = |m: usize| row(m).fold(f64::NEG_INFINITY, f64::max);
    let min_row = |m: usize| row(m).fold(f64::INFINITY, f64::min);
    let m1 = (0..p.n_xi)
        .rev()
        .take_while(|&m| max_row(m) <= 0.5)
        .last()
        .unwrap_or(p.n_xi - 1);
    let m2 = (0..p.n_xi)
        .take_while(|&m| min_row(m) >= 0.5)
        .last()
        .unwrap_or(0);
    let (a1_pos, a2_pos) = (p.xi(m1), p.xi(m2));
    let floor = 1e-10;
    let c1 = (m1..p.n_xi)
        .map(|m| (max_row(m), p.xi(m)))
        .filter(|(v, _)| *v > floor)
        .map(|(v, xi)| v * (mu1 * (xi - a1_pos)).exp())
        .fold(0.0, f64::max);
    let c2 = (0..=m2)
        .map(|m| (1.0 - min_row(m), p.xi(m)))
        .filter(|(v, _)| *v > floor)
        .map(|(v, xi)| v * (-mu2 * (xi - a2_pos)).exp())
        .fold(0.0, f64::max);
    Ok(DecayEstimate {
        mu1,
        mu2,
        c1,
        c2,
        a1_pos,
        a2_pos,
    })
}
