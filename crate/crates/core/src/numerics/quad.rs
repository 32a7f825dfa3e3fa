//! Composite Simpson quadrature with a Richardson error estimate.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureValue {
    pub value: f64,
    /// |S_n - S_{n/2}| / 15, the usual Richardson estimate for Simpson's rule.
    pub error_estimate: f64,
}

fn simpson_from_samples(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (values[0] + values[n] + 4.0 * odd + 2.0 * even)
}

/// Composite Simpson rule on `[a, b]` with `n` subintervals (rounded up to a
/// multiple of four so the half-resolution estimate is also a Simpson sum).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> QuadratureValue {
    let n = n.max(4).div_ceil(4) * 4;
    let h = (b - a) / n as f64;
    let values: Vec<f64> = (0..=n).map(|i| f(a + i as f64 * h)).collect();
    let fine = simpson_from_samples(&values, h);
    let coarse_values: Vec<f64> = values.iter().step_by(2).copied().collect();
    let coarse = simpson_from_samples(&coarse_values, 2.0 * h);
    QuadratureValue {
        value: fine,
        error_estimate: (fine - coarse).abs() / 15.0,
    }
}

/// Simpson rule over one period `[0, 1]`.
pub fn simpson_periodic<F: Fn(f64) -> f64>(f: F, n: usize) -> QuadratureValue {
    simpson(f, 0.0, 1.0, n)
}
