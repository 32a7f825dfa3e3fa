use serde::{Deserialize, Serialize};

use crate::model::{HomogenizedData, ProblemInstance};
use crate::numerics::{solve_cyclic_tridiagonal, Tridiagonal};

use super::eigen::periodic_principal_eigen;
use super::SpectralError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityClass {
    Stable,
    Unstable,
    SemistableBoundary,
}

impl StabilityClass {
    /// `|λ₁| ≤ band` is reported as the boundary case.
    pub fn from_lambda(lambda: f64, band: f64) -> Self {
        if lambda.abs() <= band {
            Self::SemistableBoundary
        } else if lambda > 0.0 {
            Self::Unstable
        } else {
            Self::Stable
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Stable => "stable",
            Self::Unstable => "unstable",
            Self::SemistableBoundary => "semistable-boundary",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SteadyState {
    pub period: f64,
    /// `ū(jL/n)`, `j = 0..n`.
    pub values: Vec<f64>,
    pub residual: f64,
    pub lambda1: f64,
    pub class: StabilityClass,
    /// Index of the seed that first produced this state.
    pub seed: usize,
}

impl SteadyState {
    pub fn x(&self) -> Vec<f64> {
        let n = self.values.len();
        (0..n).map(|j| j as f64 * self.period / n as f64).collect()
    }

    /// Periodic extension, linear between nodes.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let s = x / self.period * n as f64;
        let k = s.floor();
        let t = s - k;
        let i = (k as i64).rem_euclid(n as i64) as usize;
        let a = self.values[i];
        if t < 1e-9 {
            return a;
        }
        a + t * (self.values[(i + 1) % n] - a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Seed {
    Constant {
        value: f64,
    },
    /// `x ↦ θ(x/L)`.
    ThetaMap,
    Values {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonConfig {
    pub nodes_per_period: usize,
    /// Sup-norm residual accepted as converged, raised to the roundoff floor
    /// of the discrete operator on fine grids.
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// States within this distance of 0 or 1 somewhere are trivial.
    pub trivial_tol: f64,
    pub semistable_band: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            nodes_per_period: 256,
            tol: 1e-10,
            max_iter: 100,
            max_halvings: 30,
            trivial_tol: 1e-6,
            semistable_band: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedFailure {
    pub seed: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SteadySearch {
    pub states: Vec<SteadyState>,
    pub failures: Vec<SeedFailure>,
    /// Converged to 0 or 1.
    pub trivial: usize,
}

/// Zeros of `f̄` and the local zero map.
pub fn default_seeds(homog: &HomogenizedData) -> Vec<Seed> {
    let mut seeds: Vec<Seed> = homog
        .theta_bar
        .iter()
        .map(|&v| Seed::Constant { value: v })
        .collect();
    seeds.push(Seed::ThetaMap);
    seeds
}

fn residual_vec(inst: &ProblemInstance, faces: &[f64], ih2: f64, u: &[f64], out: &mut [f64]) {
    let n = u.len();
    for j in 0..n {
        let (l, r) = (u[(j + n - 1) % n], u[(j + 1) % n]);
        let flux = faces[j] * (r - u[j]) - faces[(j + n - 1) % n] * (u[j] - l);
        out[j] = flux * ih2 + inst.reaction.f(j as f64 / n as f64, u[j]);
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

fn newton(
    inst: &ProblemInstance,
    cfg: &NewtonConfig,
    mut u: Vec<f64>,
) -> Result<(Vec<f64>, f64), String> {
    let n = u.len();
    let h = inst.period / n as f64;
    let ih2 = 1.0 / (h * h);
    let faces: Vec<f64> = (0..n)
        .map(|j| inst.coeff.a((j as f64 + 0.5) / n as f64))
        .collect();
    let mut res = vec![0.0; n];
    residual_vec(inst, &faces, ih2, &u, &mut res);
    let mut norm = sup(&res);
    let stiff = 4.0 * inst.coeff.a_max * ih2 + inst.reaction.lip_k;
    let tol = cfg.tol.max(64.0 * f64::EPSILON * stiff);
    for _ in 0..cfg.max_iter {
        if norm < tol {
            return Ok((u, norm));
        }
        let mut jac = Tridiagonal::new(n);
        for j in 0..n {
            let fl = faces[(j + n - 1) % n];
            jac.lower[j] = fl * ih2;
            jac.upper[j] = faces[j] * ih2;
            jac.diag[j] = -(fl + faces[j]) * ih2 + inst.reaction.df(j as f64 / n as f64, u[j]);
        }
        let mut step: Vec<f64> = res.iter().map(|r| -r).collect();
        solve_cyclic_tridiagonal(&jac, &mut step).ok_or("singular Jacobian")?;
        if step.iter().any(|s| !s.is_finite()) {
            return Err("non-finite Newton step".into());
        }
        let mut damp = 1.0;
        let mut trial = vec![0.0; n];
        let mut trial_res = vec![0.0; n];
        let mut accepted = false;
        for _ in 0..=cfg.max_halvings {
            for j in 0..n {
                trial[j] = u[j] + damp * step[j];
            }
            residual_vec(inst, &faces, ih2, &trial, &mut trial_res);
            let t = sup(&trial_res);
            if t < norm {
                std::mem::swap(&mut u, &mut trial);
                std::mem::swap(&mut res, &mut trial_res);
                norm = t;
                accepted = true;
                break;
            }
            damp *= 0.5;
        }
        if !accepted {
            return Err(format!(
                "no residual decrease after {} halvings (residual {norm:e})",
                cfg.max_halvings
            ));
        }
    }
    if norm < tol {
        Ok((u, norm))
    } else {
        Err(format!(
            "not converged after {} iterations (residual {norm:e})",
            cfg.max_iter
        ))
    }
}

/// Sup distance after the best cyclic node shift.
fn aligned_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    (0..n)
        .map(|s| {
            (0..n)
                .map(|j| (a[j] - b[(j + s) % n]).abs())
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Damped Newton on the periodic discrete problem `(a_L ū')' + f_L(x, ū) = 0`
/// from each seed; distinct interior roots are classified by their periodic
/// principal eigenvalue.
pub fn find_periodic_steady_states(
    inst: &ProblemInstance,
    seeds: &[Seed],
    cfg: &NewtonConfig,
) -> Result<SteadySearch, SpectralError> {
    let n = cfg.nodes_per_period;
    if n < 8 {
        return Err(SpectralError::InvalidInput(
            "nodes_per_period must be at least 8".into(),
        ));
    }
    let mut states: Vec<SteadyState> = Vec::new();
    let mut failures = Vec::new();
    let mut trivial = 0;
    for (k, seed) in seeds.iter().enumerate() {
        let start: Result<Vec<f64>, String> = match seed {
            Seed::Constant { value } => Ok(vec![*value; n]),
            Seed::ThetaMap => (0..n)
                .map(|j| {
                    inst.reaction
                        .theta(j as f64 / n as f64)
                        .ok_or_else(|| "no local zero".to_string())
                })
                .collect(),
            Seed::Values { values } if values.len() == n => Ok(values.clone()),
            Seed::Values { values } => {
                Err(format!("seed has {} values, expected {n}", values.len()))
            }
        };
        let start = match start {
            Ok(s) if s.iter().all(|&v| v > 0.0 && v < 1.0) => s,
            Ok(_) => {
                failures.push(SeedFailure {
                    seed: k,
                    reason: "seed leaves (0, 1)".into(),
                });
                continue;
            }
            Err(reason) => {
                failures.push(SeedFailure { seed: k, reason });
                continue;
            }
        };
        let (u, residual) = match newton(inst, cfg, start) {
            Ok(r) => r,
            Err(reason) => {
                failures.push(SeedFailure { seed: k, reason });
                continue;
            }
        };
        let (lo, hi) = u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, &b| {
            (a.0.min(b), a.1.max(b))
        });
        if lo <= cfg.trivial_tol || hi >= 1.0 - cfg.trivial_tol {
            trivial += 1;
            continue;
        }
        if states
            .iter()
            .any(|s| aligned_distance(&s.values, &u) <= 10.0 * cfg.tol)
        {
            continue;
        }
        let eig = periodic_principal_eigen(inst, &u, "steady state")?;
        states.push(SteadyState {
            period: inst.period,
            class: StabilityClass::from_lambda(eig.lambda, cfg.semistable_band),
            lambda1: eig.lambda,
            values: u,
            residual,
            seed: k,
        });
    }
    Ok(SteadySearch {
        states,
        failures,
        trivial,
    })
}
