use serde::{Deserialize, Serialize};

use crate::model::{LocalReaction, ProblemInstance};
use crate::numerics::{FactoredTridiagonal, Tridiagonal};

use super::{Grid1D, PdeError};

/// Nodal values at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub values: Vec<f64>,
    pub t: f64,
}

impl Field {
    pub fn constant(n: usize, value: f64) -> Self {
        Self {
            values: vec![value; n],
            t: 0.0,
        }
    }

    /// Largest distance of any value outside `[0, 1]`.
    pub fn excursion(&self) -> f64 {
        self.values
            .iter()
            .map(|&v| (-v).max(v - 1.0).max(0.0))
            .fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Implicit Euler diffusion, explicit Euler reaction.
    Imex,
    /// Crank-Nicolson diffusion, explicit Euler reaction.
    CrankNicolson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub u_left: f64,
    pub u_right: f64,
    /// Callback period of [`Solver::evolve`], in steps.
    pub stride: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            scheme: Scheme::Imex,
            u_left: 1.0,
            u_right: 0.0,
            stride: 1,
        }
    }
}

/// Time stepper with the implicit matrix factored once.
#[derive(Clone)]
pub struct Solver {
    grid: Grid1D,
    cfg: SolverConfig,
    locals: Vec<LocalReaction>,
    factored: FactoredTridiagonal,
    rhs: Vec<f64>,
    steps: u64,
}

impl Solver {
    pub fn new(inst: &ProblemInstance, grid: Grid1D, cfg: SolverConfig) -> Result<Self, PdeError> {
        if !(cfg.dt > 0.0) || !cfg.dt.is_finite() {
            return Err(PdeError::InvalidConfig(format!(
                "dt={} must be positive",
                cfg.dt
            )));
        }
        let k = inst.reaction.lip_k;
        if cfg.dt * k >= 0.5 {
            return Err(PdeError::InvalidConfig(format!(
                "dt*K = {} violates dt*K < 0.5 (K = {k})",
                cfg.dt * k
            )));
        }
        if grid.n < 3 {
            return Err(PdeError::InvalidConfig(format!(
                "need n >= 3 nodes, got {}",
                grid.n
            )));
        }
        if cfg.stride == 0 {
            return Err(PdeError::InvalidConfig("stride must be at least 1".into()));
        }
        let npp = grid.nodes_per_period;
        let locals = (0..npp)
            .map(|k| inst.reaction.at(k as f64 / npp as f64))
            .collect();
        let theta = match cfg.scheme {
            Scheme::Imex => 1.0,
            Scheme::CrankNicolson => 0.5,
        };
        let m = implicit_matrix(&grid, theta * cfg.dt);
        let factored = m.factor().ok_or(PdeError::Singular)?;
        let rhs = vec![0.0; grid.n - 2];
        Ok(Self {
            grid,
            cfg,
            locals,
            factored,
            rhs,
            steps: 0,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Steps taken since construction.
    pub fn steps_taken(&self) -> u64 {
        self.steps
    }

    #[inline]
    pub fn reaction_at(&self, i: usize) -> &LocalReaction {
        &self.locals[self.grid.cell_phase(i)]
    }

    fn check(&self, field: &Field) -> Result<(), PdeError> {
        if field.values.len() != self.grid.n {
            return Err(PdeError::SizeMismatch {
                expected: self.grid.n,
                got: field.values.len(),
            });
        }
        Ok(())
    }

    /// Advances `field` by one step of size `dt`.
    pub fn step(&mut self, field: &mut Field) -> Result<(), PdeError> {
        self.check(field)?;
        self.advance(field);
        self.steps += 1;
        field.t += self.cfg.dt;
        self.finite_or_err(field)
    }

    fn finite_or_err(&self, field: &Field) -> Result<(), PdeError> {
        match field.values.iter().position(|v| !v.is_finite()) {
            Some(node) => Err(PdeError::NonFinite {
                step: self.steps,
                node,
            }),
            None => Ok(()),
        }
    }

    fn advance(&mut self, field: &mut Field) {
        let n = self.grid.n;
        let dt = self.cfg.dt;
        let inv_h2 = 1.0 / (self.grid.h * self.grid.h);
        let u = &mut field.values;
        u[0] = self.cfg.u_left;
        u[n - 1] = self.cfg.u_right;
        let faces = &self.grid.faces;
        let explicit_diffusion = match self.cfg.scheme {
            Scheme::Imex => 0.0,
            Scheme::CrankNicolson => 0.5 * dt,
        };
        let implicit = match self.cfg.scheme {
            Scheme::Imex => dt,
            Scheme::CrankNicolson => 0.5 * dt,
        };
        let npp = self.grid.nodes_per_period;
        for i in 1..n - 1 {
            let r = &self.locals[i % npp];
            let mut v = u[i] + dt * r.f(u[i]);
            if explicit_diffusion > 0.0 {
                let flux = faces[i] * (u[i + 1] - u[i]) - faces[i - 1] * (u[i] - u[i - 1]);
                v += explicit_diffusion * flux * inv_h2;
            }
            self.rhs[i - 1] = v;
        }
        self.rhs[0] += implicit * faces[0] * inv_h2 * u[0];
        self.rhs[n - 3] += implicit * faces[n - 2] * inv_h2 * u[n - 1];
        self.factored.solve(&mut self.rhs);
        u[1..n - 1].copy_from_slice(&self.rhs);
    }

    /// Steps up to `t_final` (rounded to a whole number of steps), calling
    /// `callback` every `stride` steps and after the last one. The callback
    /// returns `false` to stop early. Returns the number of steps taken.
    pub fn evolve<C: FnMut(&Field) -> bool>(
        &mut self,
        field: &mut Field,
        t_final: f64,
        mut callback: C,
    ) -> Result<u64, PdeError> {
        self.check(field)?;
        let span = t_final - field.t;
        if span < -0.5 * self.cfg.dt {
            return Err(PdeError::InvalidConfig(format!(
                "t_final={t_final} precedes field time {}",
                field.t
            )));
        }
        let total = (span / self.cfg.dt).round().max(0.0) as u64;
        let t0 = field.t;
        for k in 1..=total {
            self.advance(field);
            self.steps += 1;
            field.t = t0 + k as f64 * self.cfg.dt;
            if k % self.cfg.stride as u64 == 0 || k == total {
                self.finite_or_err(field)?;
                if !callback(field) {
                    return Ok(k);
                }
            }
        }
        self.finite_or_err(field)?;
        Ok(total)
    }

    /// Moves the window `periods` whole periods to the right (negative: left),
    /// filling new nodes with the boundary value of the side they enter on.
    pub fn shift_window(&mut self, field: &mut Field, periods: i64) {
        let shift = periods.unsigned_abs() as usize * self.grid.nodes_per_period;
        let n = self.grid.n;
        let u = &mut field.values;
        if shift >= n {
            let fill = if periods > 0 {
                self.cfg.u_right
            } else {
                self.cfg.u_left
            };
            u.iter_mut().for_each(|v| *v = fill);
        } else if periods > 0 {
            u.copy_within(shift.., 0);
            u[n - shift..]
                .iter_mut()
                .for_each(|v| *v = self.cfg.u_right);
        } else if periods < 0 {
            u.copy_within(..n - shift, shift);
            u[..shift].iter_mut().for_each(|v| *v = self.cfg.u_left);
        }
        self.grid.origin += periods * self.grid.nodes_per_period as i64;
    }

    /// `max_i |(a u_x)_x + f|` over interior nodes, same stencil as `step`.
    pub fn residual_stationary(&self, field: &Field) -> f64 {
        let u = &field.values;
        let n = self.grid.n.min(u.len());
        let inv_h2 = 1.0 / (self.grid.h * self.grid.h);
        let faces = &self.grid.faces;
        (1..n - 1)
            .map(|i| {
                let flux = faces[i] * (u[i + 1] - u[i]) - faces[i - 1] * (u[i] - u[i - 1]);
                (flux * inv_h2 + self.reaction_at(i).f(u[i])).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Outermost crossing of `level`: the largest `x` where `u - level`
    /// changes sign, by linear interpolation. Also reports whether more than
    /// one crossing exists.
    pub fn level_position(&self, field: &Field, level: f64) -> Option<(f64, bool)> {
        level_crossing(&field.values, level).map(|(s, multiple)| {
            let x0 = self.grid.x(0);
            (x0 + s * self.grid.h, multiple)
        })
    }
}

/// Outermost (right-most) crossing in fractional node units.
pub(crate) fn level_crossing(u: &[f64], level: f64) -> Option<(f64, bool)> {
    let mut found = None;
    let mut count = 0usize;
    for i in (0..u.len().saturating_sub(1)).rev() {
        let (a, b) = (u[i] - level, u[i + 1] - level);
        if (a >= 0.0 && b < 0.0) || (a < 0.0 && b >= 0.0) {
            count += 1;
            if found.is_none() {
                found = Some(i as f64 + a / (a - b));
            }
            if count > 1 {
                break;
            }
        }
    }
    found.map(|s| (s, count > 1))
}

/// `I - s D` on the interior nodes `1..n-1`.
fn implicit_matrix(grid: &Grid1D, s: f64) -> Tridiagonal {
    let m = grid.n - 2;
    let inv_h2 = 1.0 / (grid.h * grid.h);
    let mut t = Tridiagonal::new(m);
    for k in 0..m {
        let (left, right) = (grid.faces[k], grid.faces[k + 1]);
        t.lower[k] = -s * left * inv_h2;
        t.diag[k] = 1.0 + s * (left + right) * inv_h2;
        t.upper[k] = -s * right * inv_h2;
    }
    t
}

/// One step on a fresh solver; prefer [`Solver`] for repeated steps.
pub fn step(
    field: &Field,
    inst: &ProblemInstance,
    grid: &Grid1D,
    cfg: SolverConfig,
) -> Result<Field, PdeError> {
    let mut solver = Solver::new(inst, grid.clone(), cfg)?;
    let mut out = field.clone();
    solver.step(&mut out)?;
    Ok(out)
}

pub fn evolve<C: FnMut(&Field) -> bool>(
    field: &Field,
    inst: &ProblemInstance,
    grid: &Grid1D,
    cfg: SolverConfig,
    t_final: f64,
    callback: C,
) -> Result<Field, PdeError> {
    let mut solver = Solver::new(inst, grid.clone(), cfg)?;
    let mut out = field.clone();
    solver.evolve(&mut out, t_final, callback)?;
    Ok(out)
}

pub fn residual_stationary(field: &Field, inst: &ProblemInstance, grid: &Grid1D) -> f64 {
    let npp = grid.nodes_per_period;
    let locals: Vec<LocalReaction> = (0..npp)
        .map(|k| inst.reaction.at(k as f64 / npp as f64))
        .collect();
    let u = &field.values;
    let inv_h2 = 1.0 / (grid.h * grid.h);
    (1..u.len() - 1)
        .map(|i| {
            let flux = grid.faces[i] * (u[i + 1] - u[i]) - grid.faces[i - 1] * (u[i] - u[i - 1]);
            (flux * inv_h2 + locals[i % npp].f(u[i])).abs()
        })
        .fold(0.0, f64::max)
}
