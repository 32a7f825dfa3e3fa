use serde::Serialize;

use crate::model::HomogenizedData;
use crate::numerics::{bisect, cubic_hermite, linear_fit, Dopri5, OdeEvent, OdeSample};

use super::HomogenizeError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootingConfig {
    /// Bisection stops when the speed bracket is narrower than this.
    pub tol_c: f64,
    /// Initial distance from the state 1 along the unstable direction.
    pub start_offset: f64,
    /// The profile is tabulated down to this value before the exponential
    /// tail takes over.
    pub tail_cut: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            tol_c: 1e-10,
            start_offset: 1e-6,
            tail_cut: 1e-6,
        }
    }
}

/// Travelling wave of the averaged equation.
#[derive(Debug, Clone, Serialize)]
pub struct HomogenizedFront {
    pub c0: f64,
    pub a_h: f64,
    /// Rate of `φ₀ → 0` at `+∞`.
    pub lambda1: f64,
    /// Rate of `1 - φ₀ → 0` at `-∞`.
    pub lambda2: f64,
    /// `φ₀ ≈ A₁ e^{-λ₁ ξ}` at `+∞`.
    pub a1: f64,
    /// `1 - φ₀ ≈ A₂ e^{λ₂ ξ}` at `-∞`.
    pub a2: f64,
    /// Closest approach of the final trajectory to `(0, 0)`.
    pub shoot_residual: f64,
    pub symmetric_shortcut: bool,
    /// `(ξ, φ₀, φ₀')` on the tabulated core, normalised so `φ₀(0) = 1/2`.
    samples: Vec<[f64; 3]>,
}

impl HomogenizedFront {
    pub fn xi_range(&self) -> (f64, f64) {
        (self.samples[0][0], self.samples[self.samples.len() - 1][0])
    }

    pub fn samples(&self) -> &[[f64; 3]] {
        &self.samples
    }

    pub fn phi0(&self, xi: f64) -> f64 {
        let (lo, hi) = self.xi_range();
        if xi <= lo {
            return 1.0 - self.a2 * (self.lambda2 * xi).exp();
        }
        if xi >= hi {
            return self.a1 * (-self.lambda1 * xi).exp();
        }
        let k = self
            .samples
            .partition_point(|s| s[0] <= xi)
            .clamp(1, self.samples.len() - 1)
            - 1;
        let (a, b) = (self.samples[k], self.samples[k + 1]);
        cubic_hermite(a[0], b[0], a[1], b[1], a[2], b[2], xi)
    }

    pub fn dphi0(&self, xi: f64) -> f64 {
        let (lo, hi) = self.xi_range();
        if xi <= lo {
            return -self.a2 * self.lambda2 * (self.lambda2 * xi).exp();
        }
        if xi >= hi {
            return -self.lambda1 * self.a1 * (-self.lambda1 * xi).exp();
        }
        let eps = 1e-6;
        (self.phi0(xi + eps) - self.phi0(xi - eps)) / (2.0 * eps)
    }

    /// Log-linear fits of the tabulated tails, between `1e-6` and `1e-3`.
    pub fn fitted_tail_rates(&self) -> (Option<f64>, Option<f64>) {
        let fit = |pairs: Vec<(f64, f64)>| {
            if pairs.len() < 5 {
                return None;
            }
            let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
            linear_fit(&x, &y).map(|f| f.slope.abs())
        };
        let mid = self.samples.partition_point(|s| s[0] < 0.0);
        let right: Vec<(f64, f64)> = self.samples[mid..]
            .iter()
            .filter(|s| s[1] > 1e-6 && s[1] < 1e-3)
            .map(|s| (s[0], s[1]))
            .collect();
        let left: Vec<(f64, f64)> = self.samples[..mid]
            .iter()
            .filter(|s| 1.0 - s[1] > 1.5e-6 && 1.0 - s[1] < 1e-3)
            .map(|s| (s[0], 1.0 - s[1]))
            .collect();
        (fit(right), fit(left))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shot {
    /// Crossed below 0: speed too small.
    Overshoot,
    /// Turned back above 0: speed too large.
    TurnBack,
}

fn lambda2(a_h: f64, c: f64, fp1: f64) -> f64 {
    (-c + (c * c - 4.0 * a_h * fp1).sqrt()) / (2.0 * a_h)
}

fn shoot(
    homog: &HomogenizedData,
    c: f64,
    cfg: &ShootingConfig,
    xi_max: f64,
) -> Result<(Shot, Vec<OdeSample<2>>), HomogenizeError> {
    let a = homog.a_h;
    let l2 = lambda2(a, c, homog.fbar_prime(1.0));
    let eps = cfg.start_offset;
    let y0 = [1.0 - eps, -l2 * eps];
    // leaving the neighbourhood of 1 takes about ln(1/eps)/λ₂, long when c is large
    let xi_end = xi_max + 2.0 * (1.0 / eps).ln() / l2;
    let ode = Dopri5 {
        rtol: 1e-11,
        atol: 1e-15,
        h_init: 1e-3,
        h_max: 0.25,
        max_steps: 2_000_000,
    };
    let out = ode.integrate(
        |_, y: &[f64; 2]| [y[1], -(c * y[1] + homog.fbar(y[0])) / a],
        0.0,
        y0,
        xi_end,
        |_, y| {
            if y[0] < 0.0 {
                Some(Shot::Overshoot)
            } else if y[1] >= 0.0 {
                Some(Shot::TurnBack)
            } else {
                None
            }
        },
    );
    match out.event {
        OdeEvent::Stopped(s) => Ok((s, out.samples)),
        // Still creeping towards 0 at the end of the range: as good as a
        // connection, counted as an overshoot so the bracket keeps shrinking.
        // Stuck above the interior zeros means the speed is too large.
        OdeEvent::Finished => {
            let top = homog.theta_bar.iter().copied().fold(0.0, f64::max);
            let stuck = out.samples.last().is_some_and(|s| s.y[0] > top);
            let shot = if stuck {
                Shot::TurnBack
            } else {
                Shot::Overshoot
            };
            Ok((shot, out.samples))
        }
        OdeEvent::Failed => Err(HomogenizeError::IntegrationFailed { c }),
    }
}

fn functional(shot: Shot) -> f64 {
    match shot {
        Shot::Overshoot => -1.0,
        Shot::TurnBack => 1.0,
    }
}

/// Closed-form decay rates `(λ₁, λ₂)` of the averaged front.
pub fn homogenized_decay_rates(front: &HomogenizedFront, homog: &HomogenizedData) -> (f64, f64) {
    homog.decay_exponents(front.c0)
}

fn is_symmetric(homog: &HomogenizedData) -> bool {
    let scale = (0..=64)
        .map(|k| homog.fbar(k as f64 / 64.0).abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    homog.i_fbar.abs() <= 1e-12 * scale.max(1.0)
        && (0..=200).all(|k| {
            let u = k as f64 / 200.0;
            (homog.fbar(u) + homog.fbar(1.0 - u)).abs() <= 1e-10 * scale
        })
}

/// Shooting from the state 1 along its unstable direction, bisecting on the
/// speed between overshoot below 0 and turning back above it.
pub fn solve_homogenized_front(
    homog: &HomogenizedData,
    cfg: &ShootingConfig,
) -> Result<HomogenizedFront, HomogenizeError> {
    let fp0 = homog.fbar_prime(0.0);
    let fp1 = homog.fbar_prime(1.0);
    if !(fp0 < 0.0 && fp1 < 0.0) {
        return Err(HomogenizeError::NotBistable { fp0, fp1 });
    }
    if homog.theta_bar.is_empty() {
        return Err(HomogenizeError::NoInteriorZero);
    }
    let a = homog.a_h;
    let fmax = (0..=1000)
        .map(|k| homog.fbar(k as f64 / 1000.0).abs())
        .fold(0.0, f64::max);
    let slow = (fp0.abs().min(fp1.abs()) / a).sqrt();
    let xi_max = 200.0 / slow.max(1e-3);

    let symmetric = is_symmetric(homog);
    let c0 = if symmetric {
        0.0
    } else {
        let mut c_max = 2.0 * fmax.sqrt() * a.sqrt();
        let mut bracket = None;
        for _ in 0..4 {
            let lo = functional(shoot(homog, -c_max, cfg, xi_max)?.0);
            let hi = functional(shoot(homog, c_max, cfg, xi_max)?.0);
            if lo != hi {
                bracket = Some(c_max);
                break;
            }
            c_max *= 2.0;
        }
        let c_max = bracket.ok_or(HomogenizeError::NoSignChange { c_max: c_max / 2.0 })?;
        let mut failure = None;
        let c = bisect(
            |c| match shoot(homog, c, cfg, xi_max) {
                Ok((s, _)) => functional(s),
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            -c_max,
            c_max,
            cfg.tol_c,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        c.map_err(|_| HomogenizeError::NoSignChange { c_max })?
    };

    let (_, samples) = shoot(homog, c0, cfg, xi_max)?;
    let closest = samples
        .iter()
        .map(|s| s.y[0].hypot(s.y[1]))
        .fold(f64::INFINITY, f64::min);
    if closest > 1e-2 {
        return Err(HomogenizeError::NoConnection { closest });
    }
    let (lambda1, lambda2) = homog.decay_exponents(c0);
    // Keep the tabulated core down to the tail cut, then go exponential.
    let end = samples
        .iter()
        .position(|s| s.y[0] < cfg.tail_cut)
        .unwrap_or(samples.len());
    let core: Vec<&OdeSample<2>> = samples[..end.max(2)].iter().collect();
    let k = core
        .partition_point(|s| s.y[0] > 0.5)
        .clamp(1, core.len() - 1);
    let (p, q) = (core[k - 1], core[k]);
    let xi_half = crate::numerics::bisect(
        |x| cubic_hermite(p.t, q.t, p.y[0], q.y[0], p.dy[0], q.dy[0], x) - 0.5,
        p.t,
        q.t,
        1e-14,
    )
    .unwrap_or(p.t);
    let table: Vec<[f64; 3]> = core
        .iter()
        .map(|s| [s.t - xi_half, s.y[0], s.dy[0]])
        .collect();
    let first = table[0];
    let last = table[table.len() - 1];
    let a2 = (1.0 - first[1]) * (-lambda2 * first[0]).exp();
    let a1 = last[1] * (lambda1 * last[0]).exp();
    Ok(HomogenizedFront {
        c0,
        a_h: a,
        lambda1,
        lambda2,
        a1,
        a2,
        shoot_residual: closest,
        symmetric_shortcut: symmetric,
        samples: table,
    })
}
