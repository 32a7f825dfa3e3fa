use serde::{Deserialize, Serialize};

use crate::fronts::{FrontSolution, ProfileLattice};
use crate::model::ProblemInstance;
use crate::numerics::{FactoredTridiagonal, Tridiagonal};

use super::StabilityError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameConfig {
    /// Defaults to the resolution of the front.
    pub nodes_per_period: Option<usize>,
    /// Half width of the ξ window; defaults to the extent of the profile.
    pub half_width: Option<f64>,
    /// Upper bound on the step; the actual step divides `T` exactly.
    pub dt: f64,
    pub cfl_max: f64,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            nodes_per_period: None,
            half_width: None,
            dt: 0.01,
            cfl_max: 0.9,
        }
    }
}

/// `ξ = x - ct`, in which the front is `T`-periodic, `T = L/c`.
#[derive(Debug, Clone)]
pub struct ComovingFrame {
    pub c: f64,
    pub period: f64,
    pub t_period: f64,
    pub h: f64,
    /// `ξ_i = (first + i) h`.
    pub first: i64,
    pub n: usize,
    pub dt: f64,
    pub steps_per_period: usize,
    pub u_left: f64,
    pub u_right: f64,
    profile: ProfileLattice,
}

impl ComovingFrame {
    pub fn new(front: &FrontSolution, cfg: &FrameConfig) -> Result<Self, StabilityError> {
        if front.stationary || front.speed == 0.0 {
            return Err(StabilityError::Stationary);
        }
        Self::from_profile(front.profile.clone(), front.speed, front.period, cfg)
    }

    /// Frame around `φ` with `u(t, x) = φ(x - ct, x/L)` a solution.
    pub fn from_profile(
        profile: ProfileLattice,
        c: f64,
        period: f64,
        cfg: &FrameConfig,
    ) -> Result<Self, StabilityError> {
        if c == 0.0 || !c.is_finite() {
            return Err(StabilityError::Stationary);
        }
        let npp = cfg.nodes_per_period.unwrap_or(profile.n_y);
        if npp < 2 {
            return Err(StabilityError::InvalidConfig(
                "nodes_per_period must be at least 2".into(),
            ));
        }
        let h = period / npp as f64;
        let (lo, hi) = profile.xi_range();
        let half = cfg.half_width.unwrap_or(0.5 * (hi - lo));
        let centre = 0.5 * (lo + hi);
        let first = ((centre - half) / h).ceil() as i64;
        let last = ((centre + half) / h).floor() as i64;
        if last - first < 4 {
            return Err(StabilityError::InvalidConfig(
                "frame window too small".into(),
            ));
        }
        let t_period = period / c.abs();
        let steps = (t_period / cfg.dt).ceil().max(1.0) as usize;
        let dt = t_period / steps as f64;
        let cfl = c.abs() * dt / h;
        if cfl > cfg.cfl_max {
            return Err(StabilityError::InvalidConfig(format!(
                "transport CFL |c| dt / h = {cfl:.3} exceeds {}",
                cfg.cfl_max
            )));
        }
        let (u_left, u_right) = profile.end_values();
        Ok(Self {
            c,
            period,
            t_period,
            h,
            first,
            n: (last - first + 1) as usize,
            dt,
            steps_per_period: steps,
            u_left: u_left.round(),
            u_right: u_right.round(),
            profile,
        })
    }

    pub fn xi(&self, i: usize) -> f64 {
        (self.first + i as i64) as f64 * self.h
    }

    pub fn profile(&self) -> &ProfileLattice {
        &self.profile
    }

    /// `V^τ(t, ξ) = φ(ξ + τ, (ξ + ct)/L)`.
    pub fn translate(&self, tau: f64, t: f64) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let xi = self.xi(i);
                self.profile
                    .eval_cubic(xi + tau, (xi + self.c * t) / self.period)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameRun {
    pub t: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

/// Per-step operator data; coefficients frozen at the midpoint of the step.
pub(crate) struct FrameStep {
    implicit: FactoredTridiagonal,
    phase: Vec<f64>,
    /// Couplings of the first and last interior rows to the boundary values.
    left: f64,
    right: f64,
}

impl ComovingFrame {
    pub(crate) fn step_data(&self, inst: &ProblemInstance, k: usize) -> FrameStep {
        let t_mid = (k as f64 + 0.5) * self.dt;
        let m = self.n - 2;
        let s = self.dt / (self.h * self.h);
        let mut implicit = Tridiagonal::new(m);
        let face = |i: usize| inst.a_l(self.xi(i) + 0.5 * self.h + self.c * t_mid);
        for r in 0..m {
            let (left, right) = (face(r), face(r + 1));
            implicit.lower[r] = -s * left;
            implicit.diag[r] = 1.0 + s * (left + right);
            implicit.upper[r] = -s * right;
        }
        implicit.lower[0] = 0.0;
        implicit.upper[m - 1] = 0.0;
        let phase = (0..self.n)
            .map(|i| (self.xi(i) + self.c * t_mid) / self.period)
            .collect();
        FrameStep {
            implicit: implicit.factor().expect("diagonally dominant"),
            phase,
            left: s * face(0),
            right: s * face(m),
        }
    }

    /// Upwind `c v_ξ` at interior node `i`.
    #[inline]
    fn transport(&self, v: &[f64], i: usize) -> f64 {
        if self.c > 0.0 {
            self.c * (v[i + 1] - v[i]) / self.h
        } else {
            self.c * (v[i] - v[i - 1]) / self.h
        }
    }

    pub(crate) fn advance(&self, inst: &ProblemInstance, data: &FrameStep, v: &mut [f64]) {
        let n = self.n;
        v[0] = self.u_left;
        v[n - 1] = self.u_right;
        let mut rhs: Vec<f64> = (1..n - 1)
            .map(|i| v[i] + self.dt * (self.transport(v, i) + inst.reaction.f(data.phase[i], v[i])))
            .collect();
        rhs[0] += data.left * v[0];
        rhs[n - 3] += data.right * v[n - 1];
        data.implicit.solve(&mut rhs);
        v[1..n - 1].copy_from_slice(&rhs);
    }

    /// Linearized step about `base` (the state at the start of the step),
    /// zero boundary values.
    pub(crate) fn advance_linear(
        &self,
        inst: &ProblemInstance,
        data: &FrameStep,
        base: &[f64],
        w: &mut [f64],
    ) {
        let n = self.n;
        w[0] = 0.0;
        w[n - 1] = 0.0;
        let mut rhs: Vec<f64> = (1..n - 1)
            .map(|i| {
                w[i] + self.dt
                    * (self.transport(w, i) + inst.reaction.df(data.phase[i], base[i]) * w[i])
            })
            .collect();
        data.implicit.solve(&mut rhs);
        w[1..n - 1].copy_from_slice(&rhs);
    }

    fn check(&self, g: &[f64]) -> Result<(), StabilityError> {
        if g.len() != self.n {
            return Err(StabilityError::SizeMismatch {
                expected: self.n,
                got: g.len(),
            });
        }
        Ok(())
    }
}

/// Frame evolution from `g` at `t = 0` for `n_steps` steps, recording every
/// `stride` steps (and the last).
pub fn comoving_evolve(
    frame: &ComovingFrame,
    inst: &ProblemInstance,
    g: &[f64],
    n_steps: usize,
    stride: usize,
) -> Result<FrameRun, StabilityError> {
    frame.check(g)?;
    let stride = stride.max(1);
    let mut v = g.to_vec();
    let mut run = FrameRun {
        t: vec![0.0],
        states: vec![v.clone()],
    };
    for k in 0..n_steps {
        let data = frame.step_data(inst, k % frame.steps_per_period);
        frame.advance(inst, &data, &mut v);
        if v.iter().any(|x| !x.is_finite()) {
            return Err(StabilityError::NonFinite { step: k + 1 });
        }
        if (k + 1) % stride == 0 || k + 1 == n_steps {
            run.t.push((k + 1) as f64 * frame.dt);
            run.states.push(v.clone());
        }
    }
    Ok(run)
}

/// `P(g) = v(T, ·; g)`.
pub fn poincare_map(
    frame: &ComovingFrame,
    inst: &ProblemInstance,
    g: &[f64],
) -> Result<Vec<f64>, StabilityError> {
    let run = comoving_evolve(
        frame,
        inst,
        g,
        frame.steps_per_period,
        frame.steps_per_period,
    )?;
    Ok(run.states.into_iter().last().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CoefficientProfile, ReactionProfile, ThetaMap};
    use crate::pde::{Grid1D, Solver, SolverConfig};

    fn setup() -> (ProblemInstance, ComovingFrame) {
        let inst = ProblemInstance::new(
            CoefficientProfile::cosine(2.0, 0.5).unwrap(),
            ReactionProfile::cubic_auto(ThetaMap::Constant(0.3), 1.0).unwrap(),
            1.0,
        )
        .unwrap();
        let s = 3f64.sqrt();
        let lat = ProfileLattice::from_fn(1.0 / 32.0, -640, 1281, 32, |xi, _| {
            1.0 / (1.0 + (xi / s).exp())
        });
        let frame = ComovingFrame::from_profile(lat, 0.35, 1.0, &FrameConfig::default()).unwrap();
        (inst, frame)
    }

    #[test]
    fn zero_stays_zero() {
        let inst = setup().0;
        let lat = ProfileLattice::from_fn(0.05, -100, 201, 20, |_, _| 0.0);
        let frame = ComovingFrame::from_profile(lat, 0.3, 1.0, &FrameConfig::default()).unwrap();
        let p = poincare_map(&frame, &inst, &vec![0.0; frame.n]).unwrap();
        assert!(p.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn period_map_is_monotone_and_composes() {
        let (inst, frame) = setup();
        let g1 = frame.translate(0.5, 0.0);
        let g2: Vec<f64> = frame.translate(-0.5, 0.0);
        assert!(g1.iter().zip(&g2).all(|(a, b)| a <= b));
        let (p1, p2) = (
            poincare_map(&frame, &inst, &g1).unwrap(),
            poincare_map(&frame, &inst, &g2).unwrap(),
        );
        assert!(p1.iter().zip(&p2).all(|(a, b)| a <= b));
        let twice = poincare_map(&frame, &inst, &p1).unwrap();
        let run =
            comoving_evolve(&frame, &inst, &g1, 2 * frame.steps_per_period, 1_000_000).unwrap();
        let direct = run.states.last().unwrap();
        assert!(twice
            .iter()
            .zip(direct)
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn transport_cfl_is_enforced() {
        let s = 3f64.sqrt();
        let lat = ProfileLattice::from_fn(1.0 / 32.0, -640, 1281, 32, |xi, _| {
            1.0 / (1.0 + (xi / s).exp())
        });
        let cfg = FrameConfig {
            dt: 0.2,
            ..Default::default()
        };
        assert!(matches!(
            ComovingFrame::from_profile(lat, 0.35, 1.0, &cfg),
            Err(StabilityError::InvalidConfig(_))
        ));
    }

    #[test]
    fn matches_lab_frame_run() {
        let (inst, frame) = setup();
        let g = frame.translate(0.0, 0.0);
        let steps = 3 * frame.steps_per_period;
        let run = comoving_evolve(&frame, &inst, &g, steps, steps).unwrap();
        let v = run.states.last().unwrap();
        let t = run.t.last().copied().unwrap();

        let npp = 32;
        let first = frame.first.div_euclid(npp);
        let periods = (frame.n as i64 / npp + 8) as usize;
        let grid = Grid1D::new(&inst, first, periods, npp as usize).unwrap();
        let mut field = crate::pde::Field {
            values: (0..grid.n)
                .map(|i| {
                    let x = grid.x(i);
                    let k =
                        ((x / frame.h).round() as i64 - frame.first).clamp(0, frame.n as i64 - 1);
                    g[k as usize]
                })
                .collect(),
            t: 0.0,
        };
        let mut solver = Solver::new(
            &inst,
            grid.clone(),
            SolverConfig {
                dt: frame.dt,
                ..Default::default()
            },
        )
        .unwrap();
        solver.evolve(&mut field, t, |_| true).unwrap();
        let u = &field.values;
        let max_ux = u
            .windows(2)
            .map(|w| (w[1] - w[0]).abs() / grid.h)
            .fold(0.0, f64::max);
        let mut gap = 0.0f64;
        for (i, vi) in v.iter().enumerate().skip(frame.n / 4).take(frame.n / 2) {
            let x = frame.xi(i) + frame.c * t;
            let s = (x - grid.x(0)) / grid.h;
            let k = s.floor() as usize;
            let a = s - k as f64;
            let lab = (1.0 - a) * u[k] + a * u[k + 1];
            gap = gap.max((lab - vi).abs());
        }
        assert!(
            gap < 5.0 * frame.h * max_ux,
            "gap {gap}, bound {}",
            5.0 * frame.h * max_ux
        );
    }
}
