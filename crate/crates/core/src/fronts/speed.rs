use serde::Serialize;

use crate::numerics::{golden_section_min, linear_fit};

use super::{FrontError, SnapshotSeries};

/// Speed measured two ways over a common window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedEstimate {
    /// Least-squares slope of the tracked level position.
    pub c_level: f64,
    /// `L / T*` with `T*` minimising the pulsating defect.
    pub c_period: f64,
    /// Half-width combining both estimators' error bars.
    pub uncertainty: f64,
    pub window: (f64, f64),
    /// The level set had several crossings at some sample.
    pub multiple_crossings: bool,
}

impl SpeedEstimate {
    pub fn consistent(&self) -> bool {
        (self.c_level - self.c_period).abs() <= self.uncertainty
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelFit {
    pub c_level: f64,
    pub uncertainty: f64,
    pub window: (f64, f64),
}

/// Slope of `x_{1/2}(t)`; needs at least 20 samples.
pub fn fit_level_speed(trajectory: &[(f64, f64)]) -> Result<LevelFit, FrontError> {
    if trajectory.len() < 20 {
        return Err(FrontError::TooFewSamples {
            needed: 20,
            got: trajectory.len(),
        });
    }
    let t: Vec<f64> = trajectory.iter().map(|p| p.0).collect();
    let x: Vec<f64> = trajectory.iter().map(|p| p.1).collect();
    let fit = linear_fit(&t, &x).ok_or(FrontError::TooFewSamples { needed: 2, got: 1 })?;
    let span = t[t.len() - 1] - t[0];
    Ok(LevelFit {
        c_level: fit.slope,
        uncertainty: 3.0 * fit.slope_stderr + 2.0 * fit.max_residual / span,
        window: (t[0], t[t.len() - 1]),
    })
}

/// Result of matching `u(t + T, · + sL)` against `u(t, ·)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodMatch {
    pub t_star: f64,
    pub c_period: f64,
    pub defect: f64,
    pub uncertainty: f64,
}

/// Golden-section search of the sup-defect over `T ∈ [0.8, 1.25] T_guess`
/// against the first snapshot; `direction` is the sign of the speed.
pub fn match_period(
    series: &SnapshotSeries,
    t_guess: f64,
    direction: i64,
) -> Result<PeriodMatch, FrontError> {
    let (t0, t1) = series.span().ok_or(FrontError::InsufficientSnapshots {
        required_stride: t_guess / 16.0,
    })?;
    let hi = 1.25 * t_guess;
    if t1 - t0 < hi * (1.0 - 1e-9) {
        return Err(FrontError::InsufficientSnapshots {
            required_stride: t_guess / 16.0,
        });
    }
    let defect = |lag: f64| {
        series
            .pulsating_defect(0, lag, direction)
            .unwrap_or(f64::INFINITY)
    };
    let (t_star, d) = golden_section_min(defect, 0.8 * t_guess, hi, 1e-10 * t_guess);
    let c_period = direction as f64 * series.period / t_star;
    let ut = series.max_time_derivative();
    let dt_err = if ut > 0.0 { d / ut } else { 0.0 } + 1e-10 * t_guess;
    Ok(PeriodMatch {
        t_star,
        c_period,
        defect: d,
        uncertainty: c_period.abs() * dt_err / t_star,
    })
}

/// Combines a level fit and a period match.
pub fn measure_speed(
    trajectory: &[(f64, f64)],
    series: &SnapshotSeries,
    multiple_crossings: bool,
) -> Result<SpeedEstimate, FrontError> {
    let level = fit_level_speed(trajectory)?;
    if level.c_level == 0.0 {
        return Ok(SpeedEstimate {
            c_level: 0.0,
            c_period: 0.0,
            uncertainty: level.uncertainty,
            window: level.window,
            multiple_crossings,
        });
    }
    let direction = level.c_level.signum() as i64;
    let t_guess = series.period / level.c_level.abs();
    let period = match_period(series, t_guess, direction)?;
    Ok(SpeedEstimate {
        c_level: level.c_level,
        c_period: period.c_period,
        uncertainty: level.uncertainty + period.uncertainty,
        window: level.window,
        multiple_crossings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn synthetic_oscillating_level() {
        let traj: Vec<(f64, f64)> = (0..=400)
            .map(|k| {
                let t = k as f64 * 0.05;
                (t, 0.3 * t + 0.01 * (TAU * t).sin())
            })
            .collect();
        let fit = fit_level_speed(&traj).unwrap();
        assert!((fit.c_level - 0.3).abs() < 0.01);
        assert!(fit.uncertainty <= 0.01 && fit.uncertainty >= (fit.c_level - 0.3).abs());
    }

    #[test]
    fn constant_level_has_zero_speed() {
        let traj: Vec<(f64, f64)> = (0..30).map(|k| (k as f64, 2.5)).collect();
        assert_eq!(fit_level_speed(&traj).unwrap().c_level, 0.0);
    }

    #[test]
    fn too_few_samples() {
        let traj: Vec<(f64, f64)> = (0..5).map(|k| (k as f64, 0.0)).collect();
        assert!(matches!(
            fit_level_speed(&traj),
            Err(FrontError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn exact_translates_recover_speed() {
        let (l, npp, c) = (1.0, 32usize, 0.25);
        let h = l / npp as f64;
        let mut series = SnapshotSeries::new(l, npp, 1.0, 0.0);
        let n = 40 * npp + 1;
        let origin = -20 * npp as i64;
        let dt = 0.05;
        for k in 0..=120 {
            let t = k as f64 * dt;
            let values: Vec<f64> = (0..n)
                .map(|i| {
                    let x = (origin + i as i64) as f64 * h;
                    0.5 * (1.0 - ((x - c * t) / 2.0).tanh())
                })
                .collect();
            series.push(t, origin, &values);
        }
        let m = match_period(&series, l / 0.26, 1).unwrap();
        assert!((m.c_period - c).abs() < 1e-3, "{}", m.c_period);
    }
}
