use serde::Serialize;

use crate::model::HomogenizedData;
use crate::numerics::linear_fit;

use super::{FrontError, SnapshotSeries};

/// Samples `φ(ξ_m, y_j)` with `ξ_m = (xi_start + m) h` and `y_j = j / n_y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileLattice {
    pub h: f64,
    pub xi_start: i64,
    pub n_xi: usize,
    pub n_y: usize,
    /// Row-major in ξ: `values[m * n_y + j]`.
    pub values: Vec<f64>,
    /// Largest spread between replicas averaged into one lattice value.
    pub replica_spread: f64,
}

impl ProfileLattice {
    /// Lattice from a function of `(ξ, y)`.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(
        h: f64,
        xi_start: i64,
        n_xi: usize,
        n_y: usize,
        f: F,
    ) -> Self {
        let mut values = Vec::with_capacity(n_xi * n_y);
        for m in 0..n_xi {
            let xi = (xi_start + m as i64) as f64 * h;
            for j in 0..n_y {
                values.push(f(xi, j as f64 / n_y as f64));
            }
        }
        Self {
            h,
            xi_start,
            n_xi,
            n_y,
            values,
            replica_spread: 0.0,
        }
    }

    #[inline]
    pub fn xi(&self, m: usize) -> f64 {
        (self.xi_start + m as i64) as f64 * self.h
    }

    #[inline]
    pub fn at(&self, m: usize, j: usize) -> f64 {
        self.values[m * self.n_y + j]
    }

    pub fn xi_range(&self) -> (f64, f64) {
        (self.xi(0), self.xi(self.n_xi - 1))
    }

    /// Bilinear interpolation, periodic in `y`; constant beyond the ξ ends.
    pub fn eval(&self, xi: f64, y: f64) -> f64 {
        let s = (xi / self.h - self.xi_start as f64).clamp(0.0, (self.n_xi - 1) as f64);
        let m = (s.floor() as usize).min(self.n_xi.saturating_sub(2));
        let a = s - m as f64;
        let yy = (y - y.floor()) * self.n_y as f64;
        let j = (yy.floor() as usize).min(self.n_y - 1);
        let b = yy - j as f64;
        let j1 = (j + 1) % self.n_y;
        let m1 = (m + 1).min(self.n_xi - 1);
        (1.0 - a) * ((1.0 - b) * self.at(m, j) + b * self.at(m, j1))
            + a * ((1.0 - b) * self.at(m1, j) + b * self.at(m1, j1))
    }

    /// Four-point Lagrange interpolation in ξ at the lattice row `y = j/n_y`.
    pub fn eval_at_phase(&self, xi: f64, j: usize) -> f64 {
        let last = (self.n_xi - 1) as f64;
        let s = xi / self.h - self.xi_start as f64;
        let j = j % self.n_y;
        if s <= 0.0 || self.n_xi < 4 {
            return self.at(0, j);
        }
        if s >= last {
            return self.at(self.n_xi - 1, j);
        }
        let m = (s.floor() as i64 - 1).clamp(0, self.n_xi as i64 - 4) as usize;
        let w = lagrange4(s - m as f64);
        (0..4).map(|a| w[a] * self.at(m + a, j)).sum()
    }

    /// Four-point Lagrange interpolation in both variables, periodic in `y`;
    /// constant beyond the ξ ends.
    pub fn eval_cubic(&self, xi: f64, y: f64) -> f64 {
        let last = (self.n_xi - 1) as f64;
        let s = xi / self.h - self.xi_start as f64;
        if s <= 0.0 || s >= last || self.n_xi < 4 {
            return self.eval(xi, y);
        }
        let m = (s.floor() as i64 - 1).clamp(0, self.n_xi as i64 - 4) as usize;
        let wx = lagrange4(s - m as f64);
        let yy = (y - y.floor()) * self.n_y as f64;
        let j0 = yy.floor() as i64 - 1;
        let wy = lagrange4(yy - j0 as f64);
        let mut acc = 0.0;
        for (a, wa) in wx.iter().enumerate() {
            let row = m + a;
            for (b, wb) in wy.iter().enumerate() {
                let j = (j0 + b as i64).rem_euclid(self.n_y as i64) as usize;
                acc += wa * wb * self.at(row, j);
            }
        }
        acc
    }

    /// `∂_ξ φ` at a lattice node (central differences, one-sided at the ends).
    pub fn d_xi(&self, m: usize, j: usize) -> f64 {
        if self.n_xi < 2 {
            return 0.0;
        }
        if m == 0 {
            (self.at(1, j) - self.at(0, j)) / self.h
        } else if m + 1 == self.n_xi {
            (self.at(m, j) - self.at(m - 1, j)) / self.h
        } else {
            (self.at(m + 1, j) - self.at(m - 1, j)) / (2.0 * self.h)
        }
    }

    /// Largest spread over `y` at fixed ξ.
    pub fn y_spread(&self) -> f64 {
        (0..self.n_xi)
            .map(|m| {
                let row = &self.values[m * self.n_y..(m + 1) * self.n_y];
                let (lo, hi) = row
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    });
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    /// Largest increase of φ along ξ at fixed y (0 for a monotone profile).
    pub fn monotonicity_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for m in 1..self.n_xi {
            for j in 0..self.n_y {
                worst = worst.max(self.at(m, j) - self.at(m - 1, j));
            }
        }
        worst
    }

    /// `(min_y φ(ξ_first, y), max_y φ(ξ_last, y))`.
    pub fn end_values(&self) -> (f64, f64) {
        let first = &self.values[..self.n_y];
        let last = &self.values[(self.n_xi - 1) * self.n_y..];
        (
            first.iter().copied().fold(f64::INFINITY, f64::min),
            last.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    }

    pub fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// `∬ (∂_ξ φ)² dξ dy` by the trapezoid rule in ξ and the mean over y.
    pub fn dirichlet_energy(&self) -> f64 {
        let mut total = 0.0;
        for m in 0..self.n_xi {
            let w = if m == 0 || m + 1 == self.n_xi {
                0.5
            } else {
                1.0
            };
            for j in 0..self.n_y {
                let d = self.d_xi(m, j);
                total += w * d * d;
            }
        }
        total * self.h / self.n_y as f64
    }
}

/// Builds `φ(ξ, y) = u(t, x)` with `x = L y + kL`, `ξ = x - c (t - t_a) - s h`
/// (`t_a` the first snapshot time, `s = xi_shift`), averaging every replica
/// `k` whose time falls inside the recorded span.
pub fn extract_profile(
    series: &SnapshotSeries,
    c: f64,
    xi_shift: i64,
    xi_indices: (i64, i64),
) -> Result<ProfileLattice, FrontError> {
    if c == 0.0 {
        return Err(FrontError::ZeroSpeed);
    }
    let (ta, tb) = series.span().ok_or(FrontError::InsufficientSnapshots {
        required_stride: f64::NAN,
    })?;
    let period_t = series.period / c.abs();
    if tb - ta < period_t * (1.0 - 1e-9) || series.max_gap() > period_t / 8.0 {
        return Err(FrontError::InsufficientSnapshots {
            required_stride: period_t / 16.0,
        });
    }
    let npp = series.nodes_per_period as i64;
    let h = series.h();
    let (lo, hi) = xi_indices;
    if hi <= lo {
        return Err(FrontError::EmptyLattice);
    }
    let n_xi = (hi - lo + 1) as usize;
    let mut values = Vec::with_capacity(n_xi * npp as usize);
    let mut spread = 0.0f64;
    let travel = c * (tb - ta) / h;
    for m in lo..=hi {
        for j in 0..npp {
            // x index g satisfies t = ta + (g - xi_shift - m) h / c ∈ [ta, tb].
            let base = xi_shift + m;
            let (gmin, gmax) = if c > 0.0 {
                (base as f64, base as f64 + travel)
            } else {
                (base as f64 + travel, base as f64)
            };
            let kmin = ((gmin - j as f64) / npp as f64 - 1e-9).ceil() as i64;
            let kmax = ((gmax - j as f64) / npp as f64 + 1e-9).floor() as i64;
            let mut sum = 0.0;
            let mut count = 0usize;
            let (mut rlo, mut rhi) = (f64::INFINITY, f64::NEG_INFINITY);
            for k in kmin..=kmax {
                let g = j + k * npp;
                let t = ta + (g - base) as f64 * h / c;
                if let Some(v) = series.interpolate(t, g) {
                    sum += v;
                    count += 1;
                    rlo = rlo.min(v);
                    rhi = rhi.max(v);
                }
            }
            if count == 0 {
                return Err(FrontError::InsufficientSnapshots {
                    required_stride: period_t / 16.0,
                });
            }
            spread = spread.max(rhi - rlo);
            values.push(sum / count as f64);
        }
    }
    Ok(ProfileLattice {
        h,
        xi_start: lo,
        n_xi,
        n_y: npp as usize,
        values,
        replica_spread: spread,
    })
}

/// Tail decay rates of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// Rate of `φ → 0` as `ξ → +∞`.
    pub mu1: f64,
    /// Rate of `1 - φ → 0` as `ξ → -∞`.
    pub mu2: f64,
}

const TAIL_FLOOR: f64 = 1e-10;
const TAIL_CEILING: f64 = 1e-3;

fn row_tail_rate(xi: &[f64], v: &[f64]) -> Option<f64> {
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (&a, &b) in xi.iter().zip(v) {
        if b > TAIL_FLOOR && b < TAIL_CEILING {
            x.push(a);
            y.push(b.ln());
        }
    }
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if x.len() < 8 || hi - lo < 3.0 {
        return None;
    }
    linear_fit(&x, &y).map(|f| -f.slope)
}

/// Log-linear fits of `φ` on the right and `1 - φ` on the left, between the
/// floor `1e-10` and `1e-3`, averaged over `y`.
pub fn fit_decay_rates(profile: &ProfileLattice) -> Result<DecayFit, FrontError> {
    let xi: Vec<f64> = (0..profile.n_xi).map(|m| profile.xi(m)).collect();
    let neg_xi: Vec<f64> = xi.iter().map(|x| -x).collect();
    let (mut s1, mut s2) = (0.0, 0.0);
    for j in 0..profile.n_y {
        let row: Vec<f64> = (0..profile.n_xi).map(|m| profile.at(m, j)).collect();
        let right: Vec<f64> = row.clone();
        let left: Vec<f64> = row.iter().map(|v| 1.0 - v).collect();
        // Restrict each fit to its own half so the opposite tail cannot leak in.
        let mid = row.iter().position(|&v| v < 0.5).unwrap_or(row.len() / 2);
        let mu1 = row_tail_rate(&xi[mid..], &right[mid..])
            .ok_or(FrontError::TailTooShort { side: "right" })?;
        let mu2 = row_tail_rate(&neg_xi[..mid], &left[..mid])
            .ok_or(FrontError::TailTooShort { side: "left" })?;
        s1 += mu1;
        s2 += mu2;
    }
    let n = profile.n_y as f64;
    Ok(DecayFit {
        mu1: s1 / n,
        mu2: s2 / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    pub dirichlet_energy: f64,
    pub i_fbar: f64,
    pub c_identity: f64,
    pub c_measured: f64,
    pub mismatch: f64,
}

/// `c_identity = ∫f̄ / ∬(∂_ξ φ)²` compared with the measured speed.
pub fn speed_identity(
    profile: &ProfileLattice,
    c_measured: f64,
    homog: &HomogenizedData,
) -> Result<IdentityReport, FrontError> {
    if c_measured == 0.0 {
        return Err(FrontError::ZeroSpeed);
    }
    let d = profile.dirichlet_energy();
    if !(d > 1e-8) {
        return Err(FrontError::ProfileNotConverged(format!("∬(∂ξφ)² = {d}")));
    }
    let c_identity = homog.i_fbar / d;
    Ok(IdentityReport {
        dirichlet_energy: d,
        i_fbar: homog.i_fbar,
        c_identity,
        c_measured,
        mismatch: (c_identity - c_measured).abs() / c_measured.abs(),
    })
}

/// Lagrange weights on nodes 0, 1, 2, 3 at position `s`.
fn lagrange4(s: f64) -> [f64; 4] {
    let (a, b, c, d) = (s, s - 1.0, s - 2.0, s - 3.0);
    [
        -b * c * d / 6.0,
        a * c * d / 2.0,
        -a * b * d / 2.0,
        a * b * c / 6.0,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_tail_rate() {
        let p = ProfileLattice::from_fn(0.05, -400, 800, 4, |xi, _| {
            if xi > 0.0 {
                0.5 * (-2.0 * xi).exp()
            } else {
                1.0 - 0.5 * xi.exp()
            }
        });
        let fit = fit_decay_rates(&p).unwrap();
        assert!((fit.mu1 - 2.0).abs() < 1e-3);
        assert!((fit.mu2 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn short_tail_is_rejected() {
        let p = ProfileLattice::from_fn(0.05, -40, 80, 2, |xi, _| 0.5 * (1.0 - (xi / 2.0).tanh()));
        assert!(matches!(
            fit_decay_rates(&p),
            Err(FrontError::TailTooShort { .. })
        ));
    }

    #[test]
    fn closed_form_energy() {
        // φ = (1 + e^{ξ/√2})⁻¹ has ∫ φ'² = 1 / (6√2).
        let s = 2f64.sqrt();
        let p =
            ProfileLattice::from_fn(0.01, -6000, 12001, 3, |xi, _| 1.0 / (1.0 + (xi / s).exp()));
        assert!((p.dirichlet_energy() - 1.0 / (6.0 * s)).abs() < 1e-6);
        assert!(p.y_spread() == 0.0);
        assert!(p.monotonicity_violation() <= 0.0);
    }

    #[test]
    fn bilinear_eval_reproduces_nodes() {
        let p = ProfileLattice::from_fn(0.1, -10, 21, 8, |xi, y| xi + y);
        assert!((p.eval(0.3, 0.25) - 0.55).abs() < 1e-12);
        assert!((p.eval(0.35, 0.25 + 1.0) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn cubic_eval_is_exact_on_cubics() {
        let f = |xi: f64, _y: f64| xi * xi * xi - 2.0 * xi + 0.5;
        let p = ProfileLattice::from_fn(0.1, -20, 41, 8, f);
        for xi in [-0.93, -0.05, 0.0, 0.37, 1.21] {
            assert!((p.eval_cubic(xi, 0.3) - f(xi, 0.0)).abs() < 1e-12);
        }
        let g = |_: f64, y: f64| (2.0 * std::f64::consts::PI * y).cos();
        let q = ProfileLattice::from_fn(0.1, -20, 41, 64, g);
        assert!((q.eval_cubic(0.0, 0.013) - g(0.0, 0.013)).abs() < 1e-5);
        assert!((q.eval_cubic(0.0, 0.999) - g(0.0, 0.999)).abs() < 1e-5);
    }
}
