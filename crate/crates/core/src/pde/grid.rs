use crate::model::ProblemInstance;

use super::PdeError;

/// Uniform grid whose end points are integer multiples of the period, so a
/// shift by whole periods maps the grid and its coefficients onto itself.
///
/// Node `i` sits at `x = (origin + i) h` with `h = L / nodes_per_period`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub period: f64,
    pub nodes_per_period: usize,
    pub h: f64,
    /// Global index of node 0; always a multiple of `nodes_per_period`.
    pub origin: i64,
    pub n: usize,
    /// `a_L` at the face between nodes `i` and `i + 1`.
    pub faces: Vec<f64>,
}

impl Grid1D {
    /// Grid covering periods `first_period .. first_period + periods`.
    pub fn new(
        inst: &ProblemInstance,
        first_period: i64,
        periods: usize,
        nodes_per_period: usize,
    ) -> Result<Self, PdeError> {
        if nodes_per_period < 2 || periods == 0 {
            return Err(PdeError::InvalidConfig(format!(
                "need at least one period and 2 nodes per period, got {periods} x {nodes_per_period}"
            )));
        }
        let npp = nodes_per_period;
        let n = periods * npp + 1;
        let pattern: Vec<f64> = (0..npp)
            .map(|k| inst.coeff.a((k as f64 + 0.5) / npp as f64))
            .collect();
        let faces = (0..n - 1).map(|i| pattern[i % npp]).collect();
        Ok(Self {
            period: inst.period,
            nodes_per_period: npp,
            h: inst.period / npp as f64,
            origin: first_period * npp as i64,
            n,
            faces,
        })
    }

    /// Grid of `periods` periods roughly centred on `x = 0`.
    pub fn centered(
        inst: &ProblemInstance,
        periods: usize,
        nodes_per_period: usize,
    ) -> Result<Self, PdeError> {
        Self::new(inst, -(periods as i64 / 2), periods, nodes_per_period)
    }

    #[inline]
    pub fn x_at_global(&self, g: i64) -> f64 {
        g as f64 * self.period / self.nodes_per_period as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_at_global(self.origin + i as i64)
    }

    pub fn x_min(&self) -> f64 {
        self.x(0)
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.n - 1)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Position of node `i` inside its period, in `[0, 1)`.
    #[inline]
    pub fn cell_phase(&self, i: usize) -> usize {
        i % self.nodes_per_period
    }

    pub fn periods(&self) -> usize {
        (self.n - 1) / self.nodes_per_period
    }
}
