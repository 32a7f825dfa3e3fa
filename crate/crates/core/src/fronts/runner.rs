use serde::{Deserialize, Serialize};

use crate::model::ProblemInstance;
use crate::numerics::linear_fit;
use crate::pde::{front_initial_datum, DatumStyle, Field, Grid1D, Scheme, Solver, SolverConfig};

use super::{
    extract_profile, fit_decay_rates, fit_level_speed, match_period, DecayFit, FrontError,
    ProfileLattice, Snapshot, SnapshotSeries, SpeedEstimate,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontConfig {
    pub nodes_per_period: usize,
    /// Upper bound on the grid step; raises `nodes_per_period` for long periods.
    pub max_h: f64,
    pub dt: f64,
    pub scheme: Scheme,
    /// Half-width of the computational window; sized from the decay
    /// rates of the averaged problem when absent.
    pub half_width: Option<f64>,
    pub datum: DatumStyle,
    pub interface: f64,
    pub tol_puls: f64,
    pub tol_stat: f64,
    pub stationary_window: f64,
    pub transient_min: f64,
    pub transient_periods: f64,
    pub snapshots_per_period: usize,
    /// Time between level-set samples.
    pub level_interval: f64,
    /// Length of an evolution chunk between convergence checks.
    pub check_interval: f64,
}

impl Default for FrontConfig {
    fn default() -> Self {
        Self {
            nodes_per_period: 64,
            max_h: 0.05,
            dt: 0.01,
            scheme: Scheme::Imex,
            half_width: None,
            datum: DatumStyle::Step,
            interface: 0.0,
            tol_puls: 1e-3,
            tol_stat: 1e-6,
            stationary_window: 100.0,
            transient_min: 50.0,
            transient_periods: 20.0,
            snapshots_per_period: 32,
            level_interval: 0.05,
            check_interval: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunBudget {
    pub t_max: f64,
    pub max_steps: u64,
}

impl RunBudget {
    pub fn time(t_max: f64) -> Self {
        Self {
            t_max,
            max_steps: u64::MAX,
        }
    }

    pub fn steps(max_steps: u64) -> Self {
        Self {
            t_max: f64::INFINITY,
            max_steps,
        }
    }
}

/// A converged front, pulsating or stationary.
#[derive(Debug, Clone, Serialize)]
pub struct FrontSolution {
    /// `c_L`; zero on the stationary branch.
    pub speed: f64,
    pub stationary: bool,
    pub estimate: Option<SpeedEstimate>,
    /// `φ(ξ, y)` with `u(t, x) ≈ φ(x - c (t - t_ref), x / L)`; on the
    /// stationary branch `φ(ξ, ·) = u(ξ + x_ref)`.
    pub profile: ProfileLattice,
    pub t_ref: f64,
    pub x_ref: f64,
    /// Defect at the accepted probe.
    pub pulsating_error: f64,
    /// `(time, defect)` at every probe.
    pub pulsating_defects: Vec<(f64, f64)>,
    pub decay: Option<DecayFit>,
    pub stationary_residual: f64,
    /// Largest decrease of `u` in time (increase if `c < 0`) over the last
    /// probe; small for fronts monotone in time.
    pub time_monotonicity_violation: f64,
    pub period: f64,
    pub nodes_per_period: usize,
    pub h: f64,
    pub dt: f64,
    #[serde(skip)]
    pub final_state: Snapshot,
    pub level_trajectory: Vec<(f64, f64)>,
}

/// Evidence left by a run that met neither convergence criterion.
#[derive(Debug, Clone, Serialize)]
pub struct FrontDiagnostics {
    pub reason: String,
    pub t_end: f64,
    pub steps: u64,
    pub c_estimate: Option<f64>,
    pub pulsating_defects: Vec<(f64, f64)>,
    pub stationary_residual: f64,
    pub displacement: Option<f64>,
    pub multiple_crossings: bool,
    pub excursion: f64,
}

#[derive(Debug, Clone, Serialize)]
pub enum FrontOutcome {
    Converged(Box<FrontSolution>),
    Inconclusive(Box<FrontDiagnostics>),
}

impl FrontOutcome {
    pub fn solution(&self) -> Option<&FrontSolution> {
        match self {
            Self::Converged(s) => Some(s),
            Self::Inconclusive(_) => None,
        }
    }

    pub fn into_solution(self) -> Option<FrontSolution> {
        match self {
            Self::Converged(s) => Some(*s),
            Self::Inconclusive(_) => None,
        }
    }
}

/// Grid resolution and window used for an instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontLayout {
    pub nodes_per_period: usize,
    pub half_periods: usize,
    pub mu_hat: f64,
}

pub fn front_layout(inst: &ProblemInstance, cfg: &FrontConfig) -> Result<FrontLayout, FrontError> {
    let l = inst.period;
    let npp = cfg
        .nodes_per_period
        .max((l / cfg.max_h).ceil() as usize)
        .max(4);
    let homog = inst.homogenized(1024)?;
    let q0 = -homog.fbar_prime(0.0);
    let q1 = -homog.fbar_prime(1.0);
    let q = q0.min(q1);
    let mu_hat = if q > 0.0 {
        (q / inst.coeff.a_max).sqrt()
    } else {
        0.1
    };
    let w = cfg
        .half_width
        .unwrap_or_else(|| (24.0 / mu_hat).max(4.0 * l).max(10.0));
    let half_periods = (w / l).ceil().max(2.0) as usize;
    Ok(FrontLayout {
        nodes_per_period: npp,
        half_periods,
        mu_hat,
    })
}

struct Run<'a> {
    cfg: &'a FrontConfig,
    budget: &'a RunBudget,
    solver: Solver,
    field: Field,
    levels: Vec<(f64, f64)>,
    multiple: bool,
    level_every: u64,
    half_width: f64,
}

enum Advance {
    Done,
    OutOfBudget,
}

impl Run<'_> {
    fn h(&self) -> f64 {
        self.solver.grid().h
    }

    fn record_level(&mut self) {
        if let Some((x, multiple)) = self.solver.level_position(&self.field, 0.5) {
            self.multiple |= multiple;
            self.levels.push((self.field.t, x));
            let grid = self.solver.grid();
            let mid = 0.5 * (grid.x_min() + grid.x_max());
            if (x - mid).abs() > 0.25 * self.half_width {
                let periods = ((x - mid) / grid.period).round() as i64;
                if periods != 0 {
                    self.solver.shift_window(&mut self.field, periods);
                }
            }
        }
    }

    fn advance(
        &mut self,
        t_until: f64,
        mut series: Option<(&mut SnapshotSeries, u64)>,
    ) -> Result<Advance, FrontError> {
        let dt = self.solver.config().dt;
        let mut k = 0u64;
        if let Some((s, _)) = series.as_mut() {
            s.push(self.field.t, self.solver.grid().origin, &self.field.values);
        }
        while self.field.t < t_until - 0.5 * dt {
            if self.solver.steps_taken() >= self.budget.max_steps
                || self.field.t + 0.5 * dt > self.budget.t_max
            {
                return Ok(Advance::OutOfBudget);
            }
            self.solver.step(&mut self.field)?;
            k += 1;
            if self.solver.steps_taken().is_multiple_of(self.level_every) {
                self.record_level();
            }
            if let Some((s, stride)) = series.as_mut() {
                if k.is_multiple_of(*stride) {
                    s.push(self.field.t, self.solver.grid().origin, &self.field.values);
                }
            }
        }
        if let Some((s, stride)) = series.as_mut() {
            if !k.is_multiple_of(*stride) {
                s.push(self.field.t, self.solver.grid().origin, &self.field.values);
            }
        }
        Ok(Advance::Done)
    }

    fn levels_since(&self, t0: f64) -> &[(f64, f64)] {
        let start = self.levels.partition_point(|p| p.0 < t0);
        &self.levels[start..]
    }

    fn displacement(&self, window: f64) -> Option<f64> {
        let t = self.field.t;
        let first = self.levels.first()?;
        if t - first.0 < window {
            return None;
        }
        let recent = self.levels_since(t - window);
        let (lo, hi) = recent
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.1), hi.max(p.1))
            });
        Some(hi - lo)
    }

    fn slope_since(&self, t0: f64) -> Option<f64> {
        let pts = self.levels_since(t0);
        if pts.len() < 20 {
            return None;
        }
        let t: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let x: Vec<f64> = pts.iter().map(|p| p.1).collect();
        linear_fit(&t, &x).map(|f| f.slope)
    }

    fn diagnostics(
        &self,
        reason: &str,
        c_estimate: Option<f64>,
        defects: &[(f64, f64)],
    ) -> FrontDiagnostics {
        FrontDiagnostics {
            reason: reason.to_string(),
            t_end: self.field.t,
            steps: self.solver.steps_taken(),
            c_estimate,
            pulsating_defects: defects.to_vec(),
            stationary_residual: self.solver.residual_stationary(&self.field),
            displacement: self.displacement(self.cfg.stationary_window),
            multiple_crossings: self.multiple,
            excursion: self.field.excursion(),
        }
    }

    fn final_state(&self) -> Snapshot {
        Snapshot {
            t: self.field.t,
            origin: self.solver.grid().origin,
            values: self.field.values.clone(),
        }
    }
}

/// Evolves a front-like datum until the solution is pulsating (defect below
/// `tol_puls` at two consecutive probes) or pinned (no level motion above
/// `h/10` over `stationary_window` and stationary residual below
/// `tol_stat`), or the budget runs out.
pub fn compute_pulsating_front(
    inst: &ProblemInstance,
    cfg: &FrontConfig,
    budget: &RunBudget,
) -> Result<FrontOutcome, FrontError> {
    if cfg.snapshots_per_period < 8 {
        return Err(FrontError::InvalidConfig(
            "snapshots_per_period must be at least 8".into(),
        ));
    }
    let layout = front_layout(inst, cfg)?;
    let grid = Grid1D::new(
        inst,
        -(layout.half_periods as i64),
        2 * layout.half_periods,
        layout.nodes_per_period,
    )?;
    let solver_cfg = SolverConfig {
        dt: cfg.dt,
        scheme: cfg.scheme,
        u_left: 1.0,
        u_right: 0.0,
        stride: 1,
    };
    let field = front_initial_datum(&grid, cfg.datum, cfg.interface);
    let half_width = layout.half_periods as f64 * inst.period;
    let solver = Solver::new(inst, grid, solver_cfg)?;
    let mut run = Run {
        cfg,
        budget,
        solver,
        field,
        levels: Vec::new(),
        multiple: false,
        level_every: ((cfg.level_interval / cfg.dt).round() as u64).max(1),
        half_width,
    };
    run.record_level();
    run_loop(&mut run, inst)
}

/// Like [`compute_pulsating_front`] but from a caller-supplied datum on the
/// standard layout grid.
pub fn compute_front_from(
    inst: &ProblemInstance,
    cfg: &FrontConfig,
    budget: &RunBudget,
    datum: impl Fn(f64) -> f64,
) -> Result<FrontOutcome, FrontError> {
    let layout = front_layout(inst, cfg)?;
    let grid = Grid1D::new(
        inst,
        -(layout.half_periods as i64),
        2 * layout.half_periods,
        layout.nodes_per_period,
    )?;
    let mut values: Vec<f64> = grid.nodes().iter().map(|&x| datum(x)).collect();
    values[0] = 1.0;
    *values.last_mut().unwrap() = 0.0;
    let solver_cfg = SolverConfig {
        dt: cfg.dt,
        scheme: cfg.scheme,
        ..SolverConfig::default()
    };
    let half_width = layout.half_periods as f64 * inst.period;
    let solver = Solver::new(inst, grid, solver_cfg)?;
    let mut run = Run {
        cfg,
        budget,
        solver,
        field: Field { values, t: 0.0 },
        levels: Vec::new(),
        multiple: false,
        level_every: ((cfg.level_interval / cfg.dt).round() as u64).max(1),
        half_width,
    };
    run.record_level();
    run_loop(&mut run, inst)
}

fn run_loop(run: &mut Run<'_>, inst: &ProblemInstance) -> Result<FrontOutcome, FrontError> {
    let cfg = run.cfg;
    let l = inst.period;
    let h = run.h();
    let dt = cfg.dt;
    let mut defects: Vec<(f64, f64)> = Vec::new();
    let mut consecutive = 0usize;
    let mut c_hat: Option<f64> = None;
    loop {
        let target = run.field.t + cfg.check_interval;
        if let Advance::OutOfBudget = run.advance(target, None)? {
            return Ok(FrontOutcome::Inconclusive(Box::new(run.diagnostics(
                "budget exhausted",
                c_hat,
                &defects,
            ))));
        }
        let t = run.field.t;

        if t >= cfg.transient_min + cfg.stationary_window {
            if let Some(disp) = run.displacement(cfg.stationary_window) {
                if disp < h / 10.0 {
                    let residual = run.solver.residual_stationary(&run.field);
                    if residual < cfg.tol_stat {
                        return Ok(FrontOutcome::Converged(Box::new(stationary_solution(
                            run, residual,
                        ))));
                    }
                    continue;
                }
            }
        }

        let Some(slope) = run.slope_since(0.5 * t) else {
            continue;
        };
        c_hat = Some(slope);
        if slope.abs() * cfg.stationary_window < h / 10.0 {
            continue;
        }
        let transient = cfg
            .transient_min
            .max(cfg.transient_periods * l / slope.abs());
        if t < transient {
            continue;
        }
        let direction = slope.signum() as i64;
        // Integer number of estimated periods after the transient.
        let t_hat = l / slope.abs();
        let periods = ((t - transient.min(0.5 * t)) / t_hat).floor();
        let refined = if periods >= 1.0 {
            run.slope_since(t - periods * t_hat).unwrap_or(slope)
        } else {
            slope
        };
        let t_hat = l / refined.abs();
        let stride = ((t_hat / (cfg.snapshots_per_period as f64 * dt)).floor() as u64).max(1);
        if t_hat / (stride as f64 * dt) < 8.0 {
            return Err(FrontError::InsufficientSnapshots {
                required_stride: t_hat / 16.0,
            });
        }
        let mut series = SnapshotSeries::new(l, run.solver.grid().nodes_per_period, 1.0, 0.0);
        let probe_end = t + 1.3 * t_hat;
        let level_start = t;
        let level_at_start = run.levels.last().map(|p| p.1).unwrap_or(0.0);
        if let Advance::OutOfBudget = run.advance(probe_end, Some((&mut series, stride)))? {
            return Ok(FrontOutcome::Inconclusive(Box::new(run.diagnostics(
                "budget exhausted during a period probe",
                Some(refined),
                &defects,
            ))));
        }
        let pm = match match_period(&series, t_hat, direction) {
            Ok(pm) => pm,
            Err(FrontError::InsufficientSnapshots { .. }) => continue,
            Err(e) => return Err(e),
        };
        defects.push((level_start, pm.defect));
        c_hat = Some(pm.c_period);
        if pm.defect < cfg.tol_puls {
            consecutive += 1;
        } else {
            consecutive = 0;
        }
        if consecutive < 2 {
            continue;
        }
        // Level speed over a whole number of matched periods.
        let span_t = run.field.t - transient.min(0.5 * run.field.t);
        let m = (span_t / pm.t_star).floor().max(1.0);
        let window_start = run.field.t - m * pm.t_star;
        let level = fit_level_speed(run.levels_since(window_start))?;
        let estimate = SpeedEstimate {
            c_level: level.c_level,
            c_period: pm.c_period,
            uncertainty: level.uncertainty + pm.uncertainty,
            window: level.window,
            multiple_crossings: run.multiple,
        };
        let xi_shift = (level_at_start / h).round() as i64;
        let first = &series.snaps[0];
        let n = first.values.len() as i64;
        let margin = (n / 10).max(run.solver.grid().nodes_per_period as i64);
        let lo = first.origin + margin - xi_shift;
        let hi = first.origin + n - 1 - margin - xi_shift;
        let profile = extract_profile(&series, pm.c_period, xi_shift, (lo, hi))?;
        let decay = fit_decay_rates(&profile).ok();
        let violation = time_monotonicity(&series, direction);
        let t_ref = series.snaps[0].t + xi_shift as f64 * h / pm.c_period;
        let residual = run.solver.residual_stationary(&run.field);
        return Ok(FrontOutcome::Converged(Box::new(FrontSolution {
            speed: pm.c_period,
            stationary: false,
            estimate: Some(estimate),
            profile,
            t_ref,
            x_ref: 0.0,
            pulsating_error: pm.defect,
            pulsating_defects: defects,
            decay,
            stationary_residual: residual,
            time_monotonicity_violation: violation,
            period: l,
            nodes_per_period: run.solver.grid().nodes_per_period,
            h,
            dt,
            final_state: run.final_state(),
            level_trajectory: run.levels.clone(),
        })));
    }
}

fn time_monotonicity(series: &SnapshotSeries, direction: i64) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..series.len().saturating_sub(1) {
        let s = &series.snaps[k];
        for (i, &u) in s.values.iter().enumerate() {
            let later = series.value(k + 1, s.origin + i as i64);
            worst = worst.max(direction as f64 * (u - later));
        }
    }
    worst
}

fn stationary_solution(run: &Run<'_>, residual: f64) -> FrontSolution {
    let grid = run.solver.grid();
    let h = grid.h;
    let npp = grid.nodes_per_period;
    let x_f = run.levels.last().map(|p| p.1).unwrap_or(0.0);
    let shift = (x_f / h).round() as i64;
    let n = grid.n as i64;
    let margin = (n / 10).max(npp as i64);
    let lo = grid.origin + margin - shift;
    let hi = grid.origin + n - 1 - margin - shift;
    let values = &run.field.values;
    let profile = ProfileLattice::from_fn(h, lo, (hi - lo + 1) as usize, npp, |xi, _| {
        let g = (xi / h).round() as i64 + shift;
        values[(g - grid.origin) as usize]
    });
    let decay = fit_decay_rates(&profile).ok();
    FrontSolution {
        speed: 0.0,
        stationary: true,
        estimate: None,
        profile,
        t_ref: run.field.t,
        x_ref: shift as f64 * h,
        pulsating_error: 0.0,
        pulsating_defects: Vec::new(),
        decay,
        stationary_residual: residual,
        time_monotonicity_violation: 0.0,
        period: grid.period,
        nodes_per_period: npp,
        h,
        dt: run.cfg.dt,
        final_state: run.final_state(),
        level_trajectory: run.levels.clone(),
    }
}
