use std::f64::consts::TAU;

use crate::numerics::PeriodicSpline;

use super::ModelError;

/// Shape of a 1-periodic diffusivity `a(y)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Diffusivity {
    Constant(f64),
    /// `mean + amplitude * cos(2πy)`
    Cosine {
        mean: f64,
        amplitude: f64,
    },
    /// `mean + amplitude * sin(2πy)`
    Sine {
        mean: f64,
        amplitude: f64,
    },
    /// `1 / (mean - amplitude * cos(2πy))`
    InverseCosine {
        mean: f64,
        amplitude: f64,
    },
    /// Samples on the uniform grid `j / n`, periodic cubic interpolation.
    Tabulated(PeriodicSpline),
    /// `inner(-y)`
    Mirrored(Box<Diffusivity>),
}

impl Diffusivity {
    pub fn value(&self, y: f64) -> f64 {
        match self {
            Self::Constant(d) => *d,
            Self::Cosine { mean, amplitude } => mean + amplitude * (TAU * y).cos(),
            Self::Sine { mean, amplitude } => mean + amplitude * (TAU * y).sin(),
            Self::InverseCosine { mean, amplitude } => 1.0 / (mean - amplitude * (TAU * y).cos()),
            Self::Tabulated(s) => s.eval(y),
            Self::Mirrored(inner) => inner.value(-y),
        }
    }

    pub fn derivative(&self, y: f64) -> f64 {
        match self {
            Self::Constant(_) => 0.0,
            Self::Cosine { amplitude, .. } => -amplitude * TAU * (TAU * y).sin(),
            Self::Sine { amplitude, .. } => amplitude * TAU * (TAU * y).cos(),
            Self::InverseCosine { mean, amplitude } => {
                let den = mean - amplitude * (TAU * y).cos();
                -amplitude * TAU * (TAU * y).sin() / (den * den)
            }
            Self::Tabulated(s) => s.derivative(y),
            Self::Mirrored(inner) => -inner.derivative(-y),
        }
    }
}

/// Positive 1-periodic diffusivity together with cached bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientProfile {
    shape: Diffusivity,
    pub a_min: f64,
    pub a_max: f64,
    /// Largest |a'| on the sample set.
    pub da_max: f64,
    /// Lipschitz constant of `a'` estimated on the sample set.
    pub lip_a: f64,
}

const BOUND_SAMPLES: usize = 4096;

impl CoefficientProfile {
    pub fn new(shape: Diffusivity) -> Result<Self, ModelError> {
        let n = BOUND_SAMPLES;
        let mut a_min = f64::INFINITY;
        let mut a_max = f64::NEG_INFINITY;
        let mut da_max = 0.0f64;
        let mut lip_a = 0.0f64;
        let mut prev_da = shape.derivative(0.0);
        for j in 0..=n {
            let y = j as f64 / n as f64;
            let a = shape.value(y);
            let da = shape.derivative(y);
            if !a.is_finite() || !da.is_finite() {
                return Err(ModelError::NonFinite {
                    what: "diffusivity",
                    y,
                    u: f64::NAN,
                });
            }
            if a <= 0.0 {
                return Err(ModelError::NonPositiveDiffusivity { y, value: a });
            }
            a_min = a_min.min(a);
            a_max = a_max.max(a);
            da_max = da_max.max(da.abs());
            if j > 0 {
                lip_a = lip_a.max((da - prev_da).abs() * n as f64);
            }
            prev_da = da;
        }
        Ok(Self {
            shape,
            a_min,
            a_max,
            da_max,
            lip_a,
        })
    }

    pub fn constant(d: f64) -> Result<Self, ModelError> {
        Self::new(Diffusivity::Constant(d))
    }

    /// `mean + amplitude * cos(2πy)`.
    pub fn cosine(mean: f64, amplitude: f64) -> Result<Self, ModelError> {
        Self::new(Diffusivity::Cosine { mean, amplitude })
    }

    /// Samples of `a` on `j / n`, `j = 0..n`.
    pub fn tabulated(samples: Vec<f64>) -> Result<Self, ModelError> {
        let spline = PeriodicSpline::new(samples).ok_or(ModelError::BadTable(
            "need at least 3 finite samples".into(),
        ))?;
        Self::new(Diffusivity::Tabulated(spline))
    }

    pub fn shape(&self) -> &Diffusivity {
        &self.shape
    }

    #[inline]
    pub fn a(&self, y: f64) -> f64 {
        self.shape.value(y)
    }

    #[inline]
    pub fn da(&self, y: f64) -> f64 {
        self.shape.derivative(y)
    }

    pub fn is_constant(&self) -> bool {
        self.a_max - self.a_min <= 1e-14 * self.a_max
    }

    /// `y ↦ a(-y)`.
    pub fn mirrored(&self) -> Self {
        let shape = match &self.shape {
            Diffusivity::Mirrored(inner) => (**inner).clone(),
            Diffusivity::Constant(_)
            | Diffusivity::Cosine { .. }
            | Diffusivity::InverseCosine { .. } => self.shape.clone(),
            other => Diffusivity::Mirrored(Box::new(other.clone())),
        };
        Self { shape, ..*self }
    }
}
