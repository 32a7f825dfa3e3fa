use super::{
    CoefficientProfile, Diffusivity, HomogenizedData, LocalReaction, ModelError, ReactionProfile,
    ThetaMap,
};

/// `u_t = (a_L u_x)_x + f_L(x, u)` with `a_L(x) = a(x/L)`, `f_L(x,u) = f(x/L,u)`.
///
/// The stored reaction is always the linearly extended one.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub coeff: CoefficientProfile,
    pub reaction: ReactionProfile,
    pub period: f64,
}

impl ProblemInstance {
    pub fn new(
        coeff: CoefficientProfile,
        reaction: ReactionProfile,
        period: f64,
    ) -> Result<Self, ModelError> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "period L={period} must be positive"
            )));
        }
        Ok(Self {
            coeff,
            reaction: reaction.extended(),
            period,
        })
    }

    /// Same profiles at another period.
    pub fn with_period(&self, period: f64) -> Result<Self, ModelError> {
        Self::new(self.coeff.clone(), self.reaction.clone(), period)
    }

    #[inline]
    pub fn a_l(&self, x: f64) -> f64 {
        self.coeff.a(x / self.period)
    }

    #[inline]
    pub fn da_l(&self, x: f64) -> f64 {
        self.coeff.da(x / self.period) / self.period
    }

    #[inline]
    pub fn f_l(&self, x: f64, u: f64) -> f64 {
        self.reaction.f(x / self.period, u)
    }

    #[inline]
    pub fn df_l(&self, x: f64, u: f64) -> f64 {
        self.reaction.df(x / self.period, u)
    }

    /// Reaction frozen at position `x`, for per-node evaluation.
    pub fn local_reaction(&self, x: f64) -> LocalReaction {
        self.reaction.at(x / self.period)
    }

    /// `sup |a_L|` and `sup |a_L'|`.
    pub fn a_norms(&self) -> (f64, f64) {
        (self.coeff.a_max, self.coeff.da_max / self.period)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.coeff.is_constant() && self.reaction.is_homogeneous()
    }

    /// Instance for `x ↦ -x`: fronts of the mirror move the other way.
    pub fn mirrored(&self) -> Self {
        Self {
            coeff: self.coeff.mirrored(),
            reaction: self.reaction.mirrored(),
            period: self.period,
        }
    }

    pub fn homogenized(&self, quad_n: usize) -> Result<HomogenizedData, ModelError> {
        HomogenizedData::compute(&self.coeff, &self.reaction, quad_n)
    }
}

/// `a(y) = 1 + δλ sin(2πy)`, `f(y,u) = μ² u(1-u)(u - 1/2 + δ)`, `L = 1`.
pub fn make_xin_example(delta: f64, lambda: f64, mu: f64) -> Result<ProblemInstance, ModelError> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(ModelError::InvalidParameter(format!(
            "delta={delta} must lie in (0, 1/2)"
        )));
    }
    if !((delta * lambda).abs() < 1.0) {
        return Err(ModelError::InvalidParameter(format!(
            "|delta*lambda| = {} must be below 1",
            (delta * lambda).abs()
        )));
    }
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(ModelError::InvalidParameter(format!(
            "mu={mu} must be positive"
        )));
    }
    let coeff = CoefficientProfile::new(Diffusivity::Sine {
        mean: 1.0,
        amplitude: delta * lambda,
    })?;
    let reaction = ReactionProfile::cubic_auto(ThetaMap::Constant(0.5 - delta), mu * mu)?;
    ProblemInstance::new(coeff, reaction, 1.0)
}
