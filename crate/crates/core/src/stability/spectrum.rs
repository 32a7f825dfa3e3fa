use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::model::ProblemInstance;

use super::frame::{ComovingFrame, FrameStep};
use super::StabilityError;

const MAX_NODES: usize = 400;

#[derive(Debug, Clone, Serialize)]
pub struct PoincareSpectrum {
    /// `(re, im)` by decreasing modulus.
    pub eigenvalues: Vec<(f64, f64)>,
    pub leading: (f64, f64),
    /// `|cos|` between the leading eigenvector and the discrete `∂_ξ V⁰`.
    pub leading_similarity: f64,
    pub second_modulus: f64,
    /// `e^{-γT/2}`.
    pub essential_radius: f64,
    pub margin: f64,
    /// Modes (after the leading one) with modulus above `essential_radius + margin`.
    pub above_radius: Vec<(f64, f64)>,
    pub dimension: usize,
    pub t_period: f64,
}

impl PoincareSpectrum {
    pub fn leading_near_one(&self, tol: f64) -> bool {
        (self.leading.0 - 1.0).abs() < tol && self.leading.1.abs() < tol
    }

    /// `-ln|λ₂| / T`.
    pub fn predicted_rate(&self) -> f64 {
        -self.second_modulus.ln() / self.t_period
    }
}

/// Matrix of the linearized time-`T` frame map about the discrete orbit
/// starting at `base`, one column per interior nodal perturbation.
pub fn linearized_period_map(
    frame: &ComovingFrame,
    inst: &ProblemInstance,
    base: &[f64],
    workers: usize,
) -> Result<DMatrix<f64>, StabilityError> {
    let n = frame.n;
    if base.len() != n {
        return Err(StabilityError::SizeMismatch {
            expected: n,
            got: base.len(),
        });
    }
    if n > MAX_NODES + 1 {
        return Err(StabilityError::InvalidConfig(format!(
            "{n} frame nodes; the dense linearization is limited to {MAX_NODES}"
        )));
    }
    let steps = frame.steps_per_period;
    let data: Vec<FrameStep> = (0..steps).map(|k| frame.step_data(inst, k)).collect();
    let mut orbit = Vec::with_capacity(steps);
    let mut v = base.to_vec();
    for d in &data {
        orbit.push(v.clone());
        frame.advance(inst, d, &mut v);
    }
    let m = n - 2;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| StabilityError::InvalidConfig(e.to_string()))?;
    let columns: Vec<Vec<f64>> = pool.install(|| {
        (0..m)
            .into_par_iter()
            .map(|j| {
                let mut w = vec![0.0; n];
                w[j + 1] = 1.0;
                for (d, b) in data.iter().zip(&orbit) {
                    frame.advance_linear(inst, d, b, &mut w);
                }
                w[1..n - 1].to_vec()
            })
            .collect()
    });
    if columns.iter().flatten().any(|x| !x.is_finite()) {
        return Err(StabilityError::NonFinite { step: steps });
    }
    Ok(DMatrix::from_fn(m, m, |i, j| columns[j][i]))
}

/// Spectrum of the linearized Poincaré map about `V⁰(0, ·)`.
pub fn poincare_spectrum(
    frame: &ComovingFrame,
    inst: &ProblemInstance,
    margin: f64,
    workers: usize,
) -> Result<PoincareSpectrum, StabilityError> {
    let base = frame.translate(0.0, 0.0);
    spectrum_about(frame, inst, &base, margin, workers)
}

pub fn spectrum_about(
    frame: &ComovingFrame,
    inst: &ProblemInstance,
    base: &[f64],
    margin: f64,
    workers: usize,
) -> Result<PoincareSpectrum, StabilityError> {
    let mat = linearized_period_map(frame, inst, base, workers)?;
    let m = mat.nrows();
    let mut eig: Vec<(f64, f64)> = mat
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect();
    eig.sort_by(|a, b| {
        b.0.hypot(b.1)
            .total_cmp(&a.0.hypot(a.1))
            .then(b.1.total_cmp(&a.1))
    });
    let leading = eig[0];
    let second_modulus = eig.get(1).map_or(0.0, |z| z.0.hypot(z.1));

    // leading eigenvector by power iteration
    let mut x = nalgebra::DVector::from_element(m, 1.0);
    for _ in 0..500 {
        let y = &mat * &x;
        let norm = y.norm();
        if norm == 0.0 {
            break;
        }
        x = y / norm;
    }
    let d: Vec<f64> = (1..frame.n - 1)
        .map(|i| (base[i + 1] - base[i - 1]) / (2.0 * frame.h))
        .collect();
    let d = nalgebra::DVector::from_vec(d);
    let similarity = (x.dot(&d) / (x.norm() * d.norm())).abs();

    let essential_radius = (-inst.reaction.gamma * frame.t_period / 2.0).exp();
    let above_radius = eig
        .iter()
        .skip(1)
        .filter(|z| z.0.hypot(z.1) > essential_radius + margin)
        .cloned()
        .collect();
    Ok(PoincareSpectrum {
        eigenvalues: eig,
        leading,
        leading_similarity: similarity,
        second_modulus,
        essential_radius,
        margin,
        above_radius,
        dimension: m,
        t_period: frame.t_period,
    })
}
