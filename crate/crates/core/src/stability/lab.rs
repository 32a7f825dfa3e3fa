use serde::{Deserialize, Serialize};

use crate::fronts::{FrontSolution, ProfileLattice};
use crate::model::ProblemInstance;
use crate::numerics::{golden_section_min, linear_fit};
use crate::pde::{Field, Grid1D, Scheme, Solver, SolverConfig};
use crate::spectral::{StabilityClass, SteadyState};

use super::StabilityError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    pub t_max: f64,
    /// Defaults to a quarter of `T = L/|c|`.
    pub probe_interval: Option<f64>,
    /// The run stops once the best-aligned error drops below this.
    pub stop_error: f64,
    /// `τ` must vary by less than `h/|c|` over this many periods `T`.
    pub stabilization_periods: f64,
    /// Minimum span of the rate fit, in periods `T`, when the record allows.
    pub fit_periods: f64,
    /// The phase search covers `±search_periods · L/|c|` around the last `τ`.
    pub search_periods: f64,
    pub scheme: Scheme,
    /// Fraction of the window on each side where far-field conditions on
    /// the data are checked.
    pub far_field: f64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            t_max: 600.0,
            probe_interval: None,
            stop_error: 1e-9,
            stabilization_periods: 10.0,
            fit_periods: 10.0,
            search_periods: 5.0,
            scheme: Scheme::Imex,
            far_field: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub tau_g: f64,
    pub mu_fit: f64,
    /// `C_g` of `C_g e^{-μ t}` from the fit intercept.
    pub c_g: f64,
    pub accepted: bool,
    /// `(t, sup_x |u(t, ·) - U(t + τ_g, ·)|)`.
    pub sup_errors: Vec<(f64, f64)>,
    /// `(t, best τ)` at every probe.
    pub tau_trace: Vec<(f64, f64)>,
    /// `(t, error at the best τ)` at every probe.
    pub aligned_errors: Vec<(f64, f64)>,
    pub final_error: f64,
    pub fit_window: Option<(f64, f64)>,
    pub stabilized: bool,
    /// Time already spent before this experiment (the `(initialv2)` phase).
    pub t_offset: f64,
    pub note: String,
    /// Filled by the Poincaré spectrum when it is computed.
    pub spectrum: Vec<(f64, f64)>,
}

/// `U(s, x) = φ(x - cs, x/L)` sampled on the lab grid.
struct Reference<'a> {
    lattice: &'a ProfileLattice,
    c: f64,
    xi_lo: f64,
    xi_hi: f64,
}

impl<'a> Reference<'a> {
    fn new(lattice: &'a ProfileLattice, c: f64) -> Self {
        let (lo, hi) = lattice.xi_range();
        Self {
            lattice,
            c,
            xi_lo: lo + 2.0 * lattice.h,
            xi_hi: hi - 2.0 * lattice.h,
        }
    }

    /// Sup distance over the nodes whose ξ falls inside the lattice; node `i`
    /// of `values` sits at `x = (origin + i) h` on the lattice spacing.
    fn distance(&self, origin: i64, values: &[f64], s: f64) -> f64 {
        let npp = self.lattice.n_y as i64;
        let h = self.lattice.h;
        let mut worst = 0.0f64;
        for (i, &u) in values.iter().enumerate() {
            let g = origin + i as i64;
            let xi = g as f64 * h - self.c * s;
            if xi < self.xi_lo || xi > self.xi_hi {
                continue;
            }
            let j = g.rem_euclid(npp) as usize;
            worst = worst.max((u - self.lattice.eval_at_phase(xi, j)).abs());
        }
        worst
    }

    fn half_level(&self) -> f64 {
        let p = self.lattice;
        let mean = |m: usize| (0..p.n_y).map(|j| p.at(m, j)).sum::<f64>() / p.n_y as f64;
        for m in 1..p.n_xi {
            let (a, b) = (mean(m - 1), mean(m));
            if (a - 0.5) * (b - 0.5) <= 0.0 && a != b {
                return p.xi(m - 1) + p.h * (a - 0.5) / (a - b);
            }
        }
        0.5 * (p.xi_range().0 + p.xi_range().1)
    }
}

struct Probe {
    t: f64,
    origin: i64,
    values: Vec<f64>,
    tau: f64,
    best: f64,
}

fn lab_grid(
    inst: &ProblemInstance,
    front: &FrontSolution,
    centre: f64,
) -> Result<Grid1D, StabilityError> {
    let (lo, hi) = front.profile.xi_range();
    let half = 0.55 * (hi - lo) + inst.period;
    let half_periods = (half / inst.period).ceil() as i64;
    let first = (centre / inst.period).round() as i64 - half_periods;
    Ok(Grid1D::new(
        inst,
        first,
        2 * half_periods as usize,
        front.nodes_per_period,
    )?)
}

fn sample(grid: &Grid1D, g: &dyn Fn(f64) -> f64) -> Field {
    let mut values: Vec<f64> = (0..grid.n).map(|i| g(grid.x(i))).collect();
    values[0] = 1.0;
    values[grid.n - 1] = 0.0;
    Field { values, t: 0.0 }
}

fn far_field_ranges(n: usize, fraction: f64) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
    let k = ((n as f64 * fraction).round() as usize).clamp(1, n / 2);
    (1..k + 1, n - 1 - k..n - 1)
}

/// Crossing of the level midway between the two far fields, ignoring the
/// boundary nodes.
fn datum_centre(grid: &Grid1D, values: &[f64], far_field: f64) -> Option<f64> {
    let n = values.len();
    let (left, right) = far_field_ranges(n, far_field);
    let mean = |r: std::ops::Range<usize>| {
        let k = r.len() as f64;
        r.map(|i| values[i]).sum::<f64>() / k
    };
    let level = 0.5 * (mean(left) + mean(right));
    crate::pde::level_crossing(&values[1..n - 1], level).map(|(s, _)| grid.x(1) + s * grid.h)
}

fn level_crossing_x(grid: &Grid1D, values: &[f64]) -> Option<f64> {
    crate::pde::level_crossing(values, 0.5).map(|(s, _)| grid.x(0) + s * grid.h)
}

/// Lab-frame run from `g`, tracking the phase `τ` with
/// `u(t, ·) ≈ φ(· - c(t + τ), ·/L)` and fitting the exponential rate of the
/// aligned error.
pub fn global_stability_experiment(
    inst: &ProblemInstance,
    front: &FrontSolution,
    g: &dyn Fn(f64) -> f64,
    cfg: &StabilityConfig,
) -> Result<StabilityReport, StabilityError> {
    if front.stationary || front.speed == 0.0 {
        return Err(StabilityError::Stationary);
    }
    let c = front.speed;
    let l = inst.period;
    let t_period = l / c.abs();
    let reference = Reference::new(&front.profile, c);
    let x_half0 = {
        let (lo, hi) = front.profile.xi_range();
        let probe = Grid1D::new(
            inst,
            ((lo - 2.0 * l) / l).floor() as i64,
            ((hi - lo) / l).ceil() as usize + 4,
            front.nodes_per_period,
        )?;
        let f = sample(&probe, g);
        datum_centre(&probe, &f.values, cfg.far_field).unwrap_or(reference.half_level())
    };
    let grid = lab_grid(inst, front, x_half0)?;
    let delta = inst.reaction.delta;
    let mut field = sample(&grid, g);
    {
        let (left, right) = far_field_ranges(grid.n, cfg.far_field);
        let lmin = field.values[left]
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let rmax = field.values[right]
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        if !(lmin > 1.0 - delta && rmax < delta) {
            return Err(StabilityError::Precondition(format!(
                "datum violates the far-field condition: min on the left {lmin:.4} (need > {:.4}), max on the right {rmax:.4} (need < {delta:.4})",
                1.0 - delta
            )));
        }
    }
    let mut solver = Solver::new(
        inst,
        grid,
        SolverConfig {
            dt: front.dt,
            scheme: cfg.scheme,
            ..Default::default()
        },
    )?;
    let dt = front.dt;
    let probe_steps = ((cfg.probe_interval.unwrap_or(t_period / 4.0) / dt).round() as u64).max(1);
    let search = cfg.search_periods * t_period;
    let mut probes: Vec<Probe> = Vec::new();
    let mut tau_prev: Option<f64> = None;
    let mut note = String::new();
    loop {
        let t = field.t;
        let x_half = level_crossing_x(solver.grid(), &field.values);
        let guess = match (tau_prev, x_half) {
            (Some(tp), _) => tp,
            (None, Some(x)) => (x - reference.half_level()) / c - t,
            (None, None) => 0.0,
        };
        let grid = solver.grid().clone();
        let (tau, best) = golden_section_min(
            |tau| reference.distance(grid.origin, &field.values, t + tau),
            guess - search,
            guess + search,
            1e-10 * (1.0 + guess.abs()),
        );
        probes.push(Probe {
            t,
            origin: grid.origin,
            values: field.values.clone(),
            tau,
            best,
        });
        tau_prev = Some(tau);
        if best < cfg.stop_error {
            break;
        }
        if t >= cfg.t_max {
            note = format!("time budget {} exhausted", cfg.t_max);
            break;
        }
        // keep the front within a period of the middle so the truncated
        // tails stay below the noise floor
        if let Some(x) = x_half {
            let mid = 0.5 * (grid.x_min() + grid.x_max());
            let periods = ((x - mid) / l).round() as i64;
            if periods != 0 {
                solver.shift_window(&mut field, periods);
            }
        }
        let target = field.t + probe_steps as f64 * dt;
        solver.evolve(&mut field, target, |_| true)?;
    }
    Ok(summarize(inst, front, &reference, probes, cfg, note))
}

fn summarize(
    inst: &ProblemInstance,
    front: &FrontSolution,
    reference: &Reference,
    probes: Vec<Probe>,
    cfg: &StabilityConfig,
    mut note: String,
) -> StabilityReport {
    let c = front.speed;
    let t_period = inst.period / c.abs();
    let h = front.h;
    let last = probes.last().unwrap();
    let tau_g = last.tau;
    let t_end = last.t;
    let tol_tau = h / c.abs();
    let window = (cfg.stabilization_periods * t_period).min(t_end);
    let stabilized = t_end > 0.0
        && probes
            .iter()
            .filter(|p| p.t >= t_end - window)
            .all(|p| (p.tau - tau_g).abs() < tol_tau);
    let k_s = probes
        .iter()
        .rposition(|p| (p.tau - tau_g).abs() >= tol_tau)
        .map_or(0, |k| k + 1);
    let sup_errors: Vec<(f64, f64)> = probes
        .iter()
        .map(|p| (p.t, reference.distance(p.origin, &p.values, p.t + tau_g)))
        .collect();
    let floor = 10.0 * cfg.stop_error;
    let usable: Vec<(f64, f64)> = sup_errors[k_s..]
        .iter()
        .cloned()
        .filter(|(_, e)| *e > floor)
        .collect();
    let mut mu_fit = f64::NAN;
    let mut c_g = f64::NAN;
    let mut fit_window = None;
    if usable.len() >= 2 {
        let (t0, t1) = (usable[0].0, usable[usable.len() - 1].0);
        let start = (0.5 * (t0 + t1))
            .min(t1 - cfg.fit_periods * t_period)
            .max(t0);
        let pts: Vec<(f64, f64)> = usable
            .iter()
            .cloned()
            .filter(|(t, _)| *t >= start)
            .collect();
        if pts.len() >= 6 {
            let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
            if let Some(fit) = linear_fit(&x, &y) {
                mu_fit = -fit.slope;
                c_g = fit.intercept.exp();
                fit_window = Some((x[0], x[x.len() - 1]));
                if x[x.len() - 1] - x[0] < 0.95 * cfg.fit_periods * t_period {
                    note.push_str(&format!(
                        "{}fit spans {:.1} periods T",
                        if note.is_empty() { "" } else { "; " },
                        (x[x.len() - 1] - x[0]) / t_period
                    ));
                }
            }
        }
    }
    if sup_errors.first().is_some_and(|e| e.1 <= floor) {
        note.push_str(if note.is_empty() {
            "datum starts on the front orbit"
        } else {
            "; datum starts on the front orbit"
        });
    }
    if fit_window.is_none() {
        note.push_str(if note.is_empty() {
            "too few points above the noise floor to fit a rate"
        } else {
            "; too few points to fit a rate"
        });
    }
    if !stabilized {
        note.push_str(if note.is_empty() {
            "phase did not stabilize"
        } else {
            "; phase did not stabilize"
        });
    }
    let final_error = sup_errors.last().map_or(f64::NAN, |e| e.1);
    StabilityReport {
        tau_g,
        mu_fit,
        c_g,
        accepted: stabilized && mu_fit > 0.0,
        sup_errors,
        tau_trace: probes.iter().map(|p| (p.t, p.tau)).collect(),
        aligned_errors: probes.iter().map(|p| (p.t, p.best)).collect(),
        final_error,
        fit_window,
        stabilized,
        t_offset: 0.0,
        note,
        spectrum: Vec::new(),
    }
}

/// Runs from data between two unstable intermediate states until the far
/// field satisfies the `(1 - δ, δ)` condition, then continues as
/// [`global_stability_experiment`].
pub fn initialv2_experiment(
    inst: &ProblemInstance,
    front: &FrontSolution,
    all_states: &[SteadyState],
    lower: &SteadyState,
    upper: &SteadyState,
    g: &dyn Fn(f64) -> f64,
    cfg: &StabilityConfig,
) -> Result<StabilityReport, StabilityError> {
    if let Some(s) = all_states
        .iter()
        .find(|s| s.class != StabilityClass::Unstable)
    {
        return Err(StabilityError::Precondition(format!(
            "intermediate steady state with lambda1 = {} is not unstable",
            s.lambda1
        )));
    }
    let l = inst.period;
    let (lo, hi) = front.profile.xi_range();
    let probe = Grid1D::new(
        inst,
        ((lo - 2.0 * l) / l).floor() as i64,
        ((hi - lo) / l).ceil() as usize + 4,
        front.nodes_per_period,
    )?;
    let f = sample(&probe, g);
    let centre = datum_centre(&probe, &f.values, cfg.far_field).unwrap_or(0.5 * (lo + hi));
    let grid = lab_grid(inst, front, centre)?;
    let mut field = sample(&grid, g);
    let (left, right) = far_field_ranges(grid.n, cfg.far_field);
    let gap_left = left
        .clone()
        .map(|i| field.values[i] - lower.eval(grid.x(i)))
        .fold(f64::INFINITY, f64::min);
    let gap_right = right
        .clone()
        .map(|i| field.values[i] - upper.eval(grid.x(i)))
        .fold(f64::NEG_INFINITY, f64::max);
    if !(gap_left > 0.0 && gap_right < 0.0) {
        return Err(StabilityError::Precondition(format!(
            "datum must lie above the lower state on the left (gap {gap_left:.3e}) and below the upper state on the right (gap {gap_right:.3e})"
        )));
    }
    let delta = inst.reaction.delta;
    let mut solver = Solver::new(
        inst,
        grid,
        SolverConfig {
            dt: front.dt,
            scheme: cfg.scheme,
            ..Default::default()
        },
    )?;
    let dt = front.dt;
    let chunk = ((1.0 / dt).round() as u64).max(1);
    loop {
        let ok_left = left.clone().all(|i| field.values[i] > 1.0 - delta);
        let ok_right = right.clone().all(|i| field.values[i] < delta);
        if ok_left && ok_right {
            break;
        }
        if field.t >= cfg.t_max {
            return Ok(StabilityReport {
                tau_g: f64::NAN,
                mu_fit: f64::NAN,
                c_g: f64::NAN,
                accepted: false,
                sup_errors: Vec::new(),
                tau_trace: Vec::new(),
                aligned_errors: Vec::new(),
                final_error: f64::NAN,
                fit_window: None,
                stabilized: false,
                t_offset: field.t,
                note: "far-field condition never reached".into(),
                spectrum: Vec::new(),
            });
        }
        let target = field.t + chunk as f64 * dt;
        solver.evolve(&mut field, target, |_| true)?;
    }
    let t_switch = field.t;
    let grid = solver.grid().clone();
    let values = field.values.clone();
    let lookup = move |x: f64| {
        let k = (x / grid.h).round() as i64 - grid.origin;
        if k <= 0 {
            values[0]
        } else if k as usize >= values.len() - 1 {
            values[values.len() - 1]
        } else {
            values[k as usize]
        }
    };
    let rest = StabilityConfig {
        t_max: (cfg.t_max - t_switch).max(0.0),
        ..*cfg
    };
    let mut report = global_stability_experiment(inst, front, &lookup, &rest)?;
    report.t_offset = t_switch;
    Ok(report)
}
