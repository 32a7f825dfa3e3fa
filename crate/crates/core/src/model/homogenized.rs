use serde::Serialize;

use crate::numerics::{bisect, cubic_hermite, simpson, simpson_periodic, QuadratureValue};

use super::{CoefficientProfile, ModelError, ReactionProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmonicMean {
    pub value: f64,
    pub rel_error: f64,
}

/// `(∫₀¹ a⁻¹)⁻¹` by composite Simpson.
pub fn harmonic_mean(
    coeff: &CoefficientProfile,
    quad_n: usize,
) -> Result<HarmonicMean, ModelError> {
    let n = quad_n.max(16);
    for j in 0..=n {
        let y = j as f64 / n as f64;
        let a = coeff.a(y);
        if !(a > 0.0) {
            return Err(ModelError::NonPositiveDiffusivity { y, value: a });
        }
    }
    let q = simpson_periodic(|y| 1.0 / coeff.a(y), n);
    Ok(HarmonicMean {
        value: 1.0 / q.value,
        rel_error: q.error_estimate / q.value,
    })
}

/// `f̄(u) = ∫₀¹ f(y, u) dy`, tabulated on a uniform `u`-grid of `[0, 1]` with
/// cubic Hermite interpolation and continued linearly outside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FBar {
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl FBar {
    fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn eval(&self, u: f64) -> f64 {
        let n = self.n();
        if u < 0.0 {
            return self.values[0] + self.slopes[0] * u;
        }
        if u > 1.0 {
            return self.values[n] + self.slopes[n] * (u - 1.0);
        }
        let s = u * n as f64;
        let j = (s.floor() as usize).min(n - 1);
        let h = 1.0 / n as f64;
        let x0 = j as f64 * h;
        cubic_hermite(
            x0,
            x0 + h,
            self.values[j],
            self.values[j + 1],
            self.slopes[j],
            self.slopes[j + 1],
            u,
        )
    }

    pub fn derivative(&self, u: f64) -> f64 {
        let n = self.n();
        if u <= 0.0 {
            return self.slopes[0];
        }
        if u >= 1.0 {
            return self.slopes[n];
        }
        let h = 1.0 / n as f64;
        let s = u * n as f64;
        let j = (s.floor() as usize).min(n - 1);
        let t = s - j as f64;
        let (p0, p1) = (self.values[j], self.values[j + 1]);
        let (m0, m1) = (self.slopes[j] * h, self.slopes[j + 1] * h);
        let dt = (6.0 * t * t - 6.0 * t) * p0
            + (3.0 * t * t - 4.0 * t + 1.0) * m0
            + (-6.0 * t * t + 6.0 * t) * p1
            + (3.0 * t * t - 2.0 * t) * m1;
        dt / h
    }

    /// Simple zeros of `f̄` in `(0, 1)`, located by bisection between sign
    /// changes on the table nodes.
    pub fn interior_zeros(&self) -> Vec<f64> {
        let n = self.n();
        let m = 8 * n;
        let mut zeros = Vec::new();
        let probe = |k: usize| k as f64 / m as f64;
        let mut prev = self.eval(probe(1));
        for k in 2..m {
            let cur = self.eval(probe(k));
            if prev == 0.0 {
                zeros.push(probe(k - 1));
            } else if prev * cur < 0.0 {
                if let Ok(z) = bisect(|u| self.eval(u), probe(k - 1), probe(k), 1e-15) {
                    zeros.push(z);
                }
            }
            prev = cur;
        }
        zeros
    }
}

/// Tabulates `f̄` and `f̄'` on `n_u + 1` nodes, averaging in `y` with
/// `quad_n` Simpson panels, and returns it together with `∫₀¹ f̄`.
pub fn fbar_and_integral(reaction: &ReactionProfile, quad_n: usize) -> (FBar, QuadratureValue) {
    fbar_with_resolution(reaction, quad_n, 512)
}

fn fbar_with_resolution(
    reaction: &ReactionProfile,
    quad_n: usize,
    n_u: usize,
) -> (FBar, QuadratureValue) {
    let nq = quad_n.max(16).div_ceil(4) * 4;
    let hy = 1.0 / nq as f64;
    let mut values = vec![0.0; n_u + 1];
    let mut slopes = vec![0.0; n_u + 1];
    for j in 0..=nq {
        let w = if j == 0 || j == nq {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        } * hy
            / 3.0;
        let local = reaction.at(j as f64 * hy);
        for k in 0..=n_u {
            let u = k as f64 / n_u as f64;
            values[k] += w * local.f(u);
            slopes[k] += w * local.df(u);
        }
    }
    let fbar = FBar { values, slopes };
    let integral = simpson(|u| fbar.eval(u), 0.0, 1.0, 4 * n_u);
    (fbar, integral)
}

/// Periodic corrector with `χ' = a_H / a - 1`, `χ(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Corrector {
    a_h: f64,
    #[serde(skip)]
    coeff: CoefficientProfile,
    /// χ on the uniform grid `j / n`, `j = 0..=n`.
    chi: Vec<f64>,
}

impl Corrector {
    pub fn chi_prime(&self, y: f64) -> f64 {
        self.a_h / self.coeff.a(y) - 1.0
    }

    pub fn chi(&self, y: f64) -> f64 {
        let n = self.chi.len() - 1;
        let y = y - y.floor();
        let h = 1.0 / n as f64;
        let j = ((y * n as f64).floor() as usize).min(n - 1);
        let x0 = j as f64 * h;
        cubic_hermite(
            x0,
            x0 + h,
            self.chi[j],
            self.chi[j + 1],
            self.chi_prime(x0),
            self.chi_prime(x0 + h),
            y,
        )
    }

    /// `χ(1) - χ(0)`, zero up to quadrature error.
    pub fn period_defect(&self) -> f64 {
        self.chi[self.chi.len() - 1] - self.chi[0]
    }

    /// `max_y |a(y)(χ'(y) + 1) - a_H|` on `samples` points.
    pub fn identity_defect(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|j| {
                let y = j as f64 / samples as f64;
                (self.coeff.a(y) * (self.chi_prime(y) + 1.0) - self.a_h).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Builds χ by cumulative Simpson integration of `a_H / a - 1` on `quad_n`
/// panels (each panel integrated with a two-interval Simpson rule).
pub fn corrector_chi(coeff: &CoefficientProfile, a_h: f64, quad_n: usize) -> Corrector {
    let n = quad_n.max(16);
    let h = 1.0 / n as f64;
    let g = |y: f64| a_h / coeff.a(y) - 1.0;
    let mut chi = Vec::with_capacity(n + 1);
    chi.push(0.0);
    let mut acc = 0.0;
    for j in 0..n {
        let y0 = j as f64 * h;
        acc += h / 6.0 * (g(y0) + 4.0 * g(y0 + 0.5 * h) + g(y0 + h));
        chi.push(acc);
    }
    Corrector {
        a_h,
        coeff: coeff.clone(),
        chi,
    }
}

/// Averaged data of an instance: effective diffusivity, mean reaction and
/// the corrector.
#[derive(Debug, Clone, Serialize)]
pub struct HomogenizedData {
    pub a_h: f64,
    pub a_h_rel_error: f64,
    pub fbar: FBar,
    pub i_fbar: f64,
    pub i_fbar_error: f64,
    /// Simple interior zeros of `f̄`.
    pub theta_bar: Vec<f64>,
    pub corrector: Corrector,
}

impl HomogenizedData {
    pub fn compute(
        coeff: &CoefficientProfile,
        reaction: &ReactionProfile,
        quad_n: usize,
    ) -> Result<Self, ModelError> {
        let hm = harmonic_mean(coeff, quad_n)?;
        let (fbar, integral) = fbar_and_integral(reaction, quad_n);
        let theta_bar = fbar.interior_zeros();
        let corrector = corrector_chi(coeff, hm.value, quad_n);
        Ok(Self {
            a_h: hm.value,
            a_h_rel_error: hm.rel_error,
            fbar,
            i_fbar: integral.value,
            i_fbar_error: integral.error_estimate,
            theta_bar,
            corrector,
        })
    }

    /// Built directly from `a_H` and a reaction, with a flat corrector.
    pub fn from_parts(
        a_h: f64,
        reaction: &ReactionProfile,
        quad_n: usize,
    ) -> Result<Self, ModelError> {
        Self::compute(&CoefficientProfile::constant(a_h)?, reaction, quad_n)
    }

    pub fn fbar(&self, u: f64) -> f64 {
        self.fbar.eval(u)
    }

    pub fn fbar_prime(&self, u: f64) -> f64 {
        self.fbar.derivative(u)
    }

    /// `I_fbar` with values inside the quadrature error reported as exactly 0.
    pub fn i_fbar_sign(&self) -> f64 {
        if self.i_fbar.abs() <= 1e-12_f64.max(10.0 * self.i_fbar_error) {
            0.0
        } else {
            self.i_fbar.signum()
        }
    }

    /// Decay rates `(λ₁, λ₂)` of a homogenized front of speed `c` toward 0
    /// (right) and 1 (left).
    pub fn decay_exponents(&self, c: f64) -> (f64, f64) {
        let q0 = self.fbar_prime(0.0);
        let q1 = self.fbar_prime(1.0);
        let a = self.a_h;
        (
            (c + (c * c - 4.0 * a * q0).sqrt()) / (2.0 * a),
            (-c + (c * c - 4.0 * a * q1).sqrt()) / (2.0 * a),
        )
    }
}
