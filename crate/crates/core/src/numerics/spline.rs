//! Periodic cubic spline on a uniform grid of `[0, 1)` and cubic Hermite
//! interpolation.

use super::tridiag::{solve_cyclic_tridiagonal, Tridiagonal};

/// Interpolating periodic cubic spline through samples `values[j]` at
/// `y_j = j / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSpline {
    values: Vec<f64>,
    /// Second derivatives at the knots.
    curvature: Vec<f64>,
}

impl PeriodicSpline {
    /// Needs at least three samples.
    pub fn new(values: Vec<f64>) -> Option<Self> {
        let n = values.len();
        if n < 3 || values.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let h = 1.0 / n as f64;
        let mut m = Tridiagonal::new(n);
        let mut rhs = vec![0.0; n];
        for j in 0..n {
            m.lower[j] = 1.0;
            m.diag[j] = 4.0;
            m.upper[j] = 1.0;
            let prev = values[(j + n - 1) % n];
            let next = values[(j + 1) % n];
            rhs[j] = 6.0 * (next - 2.0 * values[j] + prev) / (h * h);
        }
        solve_cyclic_tridiagonal(&m, &mut rhs)?;
        Some(Self {
            values,
            curvature: rhs,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.values
    }

    fn locate(&self, y: f64) -> (usize, usize, f64, f64) {
        let n = self.values.len();
        let h = 1.0 / n as f64;
        let y = y - y.floor();
        let s = y * n as f64;
        let j = (s.floor() as usize).min(n - 1);
        let t = s - j as f64;
        (j, (j + 1) % n, t, h)
    }

    pub fn eval(&self, y: f64) -> f64 {
        let (j, k, t, h) = self.locate(y);
        let a = 1.0 - t;
        let (mj, mk) = (self.curvature[j], self.curvature[k]);
        a * self.values[j]
            + t * self.values[k]
            + h * h / 6.0 * ((a * a * a - a) * mj + (t * t * t - t) * mk)
    }

    pub fn derivative(&self, y: f64) -> f64 {
        let (j, k, t, h) = self.locate(y);
        let a = 1.0 - t;
        let (mj, mk) = (self.curvature[j], self.curvature[k]);
        (self.values[k] - self.values[j]) / h
            + h / 6.0 * (-(3.0 * a * a - 1.0) * mj + (3.0 * t * t - 1.0) * mk)
    }

    pub fn min_max(&self, resolution: usize) -> (f64, f64) {
        let n = resolution.max(self.values.len() * 8);
        (0..n)
            .map(|i| self.eval(i as f64 / n as f64))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Cubic Hermite interpolation on `[x0, x1]` from values and slopes.
pub fn cubic_hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn reproduces_trigonometric_profile() {
        let n = 64;
        let vals: Vec<f64> = (0..n)
            .map(|j| 2.0 + (TAU * j as f64 / n as f64).cos())
            .collect();
        let s = PeriodicSpline::new(vals).unwrap();
        for k in 0..200 {
            let y = k as f64 / 200.0 + 0.001;
            assert!((s.eval(y) - (2.0 + (TAU * y).cos())).abs() < 1e-6);
            assert!((s.derivative(y) + TAU * (TAU * y).sin()).abs() < 1e-3);
        }
        assert!((s.eval(1.25) - s.eval(0.25)).abs() < 1e-14);
        assert!((s.eval(-0.75) - s.eval(0.25)).abs() < 1e-12);
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let p = |x: f64| x * x * x - x + 2.0;
        let dp = |x: f64| 3.0 * x * x - 1.0;
        let v = cubic_hermite(0.5, 1.5, p(0.5), p(1.5), dp(0.5), dp(1.5), 1.1);
        assert!((v - p(1.1)).abs() < 1e-13);
    }
}
