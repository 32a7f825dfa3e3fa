use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::numerics::{bisect, PeriodicSpline};

use super::ModelError;

/// Intermediate zero `θ(y)` of a cubic reaction.
#[derive(Debug, Clone, PartialEq)]
pub enum ThetaMap {
    Constant(f64),
    /// `mean + amplitude * cos(2πy)`
    Cosine {
        mean: f64,
        amplitude: f64,
    },
    Tabulated(PeriodicSpline),
    Mirrored(Box<ThetaMap>),
}

impl ThetaMap {
    pub fn value(&self, y: f64) -> f64 {
        match self {
            Self::Constant(t) => *t,
            Self::Cosine { mean, amplitude } => mean + amplitude * (TAU * y).cos(),
            Self::Tabulated(s) => s.eval(y),
            Self::Mirrored(inner) => inner.value(-y),
        }
    }

    /// Sampled range of θ over one period.
    pub fn range(&self) -> (f64, f64) {
        let n = 2048;
        (0..n)
            .map(|j| self.value(j as f64 / n as f64))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }

    fn mirrored(&self) -> Self {
        match self {
            Self::Constant(_) | Self::Cosine { .. } => self.clone(),
            Self::Mirrored(inner) => (**inner).clone(),
            other => Self::Mirrored(Box::new(other.clone())),
        }
    }
}

/// `(y, u) ↦ value` sampler used for user-defined reactions.
pub type ScalarField = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum ReactionKind {
    /// `scale * u (1 - u) (u - θ(y))`
    Cubic { theta: ThetaMap, scale: f64 },
    /// `-rate * u`; not bistable, used for linear sanity runs.
    LinearDecay { rate: f64 },
    /// `f ≡ 0`; not bistable.
    Zero,
    /// Arbitrary sampler with its `u`-derivative.
    Custom { f: ScalarField, df: ScalarField },
}

impl fmt::Debug for ReactionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Cubic { theta, scale } => f
                .debug_struct("Cubic")
                .field("theta", theta)
                .field("scale", scale)
                .finish(),
            Self::LinearDecay { rate } => {
                f.debug_struct("LinearDecay").field("rate", rate).finish()
            }
            Self::Zero => f.write_str("Zero"),
            Self::Custom { .. } => f.write_str("Custom"),
        }
    }
}

/// Reaction `f(y, u)` with its declared stability margins.
#[derive(Debug, Clone)]
pub struct ReactionProfile {
    kind: ReactionKind,
    /// Margin γ of the linear stability of 0 and 1.
    pub gamma: f64,
    /// Width δ of the margin bands `[0, δ]` and `[1 - δ, 1]`.
    pub delta: f64,
    /// Lipschitz constant K of `f` and `∂_u f` in `u` (sum of both).
    pub lip_k: f64,
    extended: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    InvalidMargins,
    ZeroAtEndpoint,
    MissingIntermediateZero,
    ZeroAtTheta,
    ThetaOutsideMargins,
    NotNegativeBelowTheta,
    NotPositiveAboveTheta,
    LowerMargin,
    UpperMargin,
    Lipschitz,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub y: f64,
    pub u: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, condition: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }
}

/// Reaction evaluated at a fixed position `y`, with the linear splice
/// outside `[0, 1]` applied when the parent profile is extended.
#[derive(Clone)]
pub struct LocalReaction {
    kind: LocalKind,
    slope0: f64,
    slope1: f64,
    extended: bool,
}

#[derive(Clone)]
enum LocalKind {
    Cubic {
        theta: f64,
        scale: f64,
    },
    Linear {
        rate: f64,
    },
    Zero,
    Custom {
        y: f64,
        f: ScalarField,
        df: ScalarField,
    },
}

impl LocalKind {
    #[inline]
    fn f(&self, u: f64) -> f64 {
        match self {
            Self::Cubic { theta, scale } => scale * u * (1.0 - u) * (u - theta),
            Self::Linear { rate } => -rate * u,
            Self::Zero => 0.0,
            Self::Custom { y, f, .. } => f(*y, u),
        }
    }

    #[inline]
    fn df(&self, u: f64) -> f64 {
        match self {
            Self::Cubic { theta, scale } => {
                scale * (-3.0 * u * u + 2.0 * (1.0 + theta) * u - theta)
            }
            Self::Linear { rate } => -rate,
            Self::Zero => 0.0,
            Self::Custom { y, df, .. } => df(*y, u),
        }
    }
}

impl LocalReaction {
    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        if self.extended {
            if u < 0.0 {
                return self.slope0 * u;
            }
            if u > 1.0 {
                return self.slope1 * (u - 1.0);
            }
        }
        self.kind.f(u)
    }

    #[inline]
    pub fn df(&self, u: f64) -> f64 {
        if self.extended {
            if u < 0.0 {
                return self.slope0;
            }
            if u > 1.0 {
                return self.slope1;
            }
        }
        self.kind.df(u)
    }

    pub fn slope_at_zero(&self) -> f64 {
        self.slope0
    }

    pub fn slope_at_one(&self) -> f64 {
        self.slope1
    }
}

/// Largest |f'| on [0, 1] plus largest |f''| for `u(1-u)(u-θ)`.
fn cubic_lipschitz(theta: f64) -> f64 {
    let vertex = (1.0 + theta).powi(2) / 3.0 - theta;
    let d1 = theta.abs().max((1.0 - theta).abs()).max(vertex.abs());
    let d2 = (2.0 + 2.0 * theta).abs().max((4.0 - 2.0 * theta).abs());
    d1 + d2
}

impl ReactionProfile {
    pub fn new(kind: ReactionKind, gamma: f64, delta: f64, lip_k: f64) -> Self {
        Self {
            kind,
            gamma,
            delta,
            lip_k,
            extended: false,
        }
    }

    /// Cubic `u(1-u)(u-θ(y))` with user margins; K is computed exactly.
    pub fn cubic(theta: ThetaMap, gamma: f64, delta: f64) -> Result<Self, ModelError> {
        Self::scaled_cubic(theta, 1.0, gamma, delta)
    }

    /// Cubic `scale * u(1-u)(u-θ(y))`.
    pub fn scaled_cubic(
        theta: ThetaMap,
        scale: f64,
        gamma: f64,
        delta: f64,
    ) -> Result<Self, ModelError> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "cubic scale {scale} must be positive"
            )));
        }
        let n = 2048;
        let mut lip = 0.0f64;
        for j in 0..n {
            let y = j as f64 / n as f64;
            let t = theta.value(y);
            if !t.is_finite() {
                return Err(ModelError::NonFinite {
                    what: "theta",
                    y,
                    u: f64::NAN,
                });
            }
            if !(t > delta && t < 1.0 - delta) {
                return Err(ModelError::ThetaOutOfRange { y, theta: t, delta });
            }
            lip = lip.max(cubic_lipschitz(t));
        }
        Ok(Self::new(
            ReactionKind::Cubic { theta, scale },
            gamma,
            delta,
            scale * lip,
        ))
    }

    /// Cubic with margins chosen automatically: δ a quarter of the distance
    /// from θ to the nearest stable state (capped at 0.05), γ nine tenths of
    /// the largest admissible value for that δ.
    pub fn cubic_auto(theta: ThetaMap, scale: f64) -> Result<Self, ModelError> {
        let (lo, hi) = theta.range();
        if !(lo > 0.0 && hi < 1.0) {
            return Err(ModelError::ThetaOutOfRange {
                y: f64::NAN,
                theta: if lo <= 0.0 { lo } else { hi },
                delta: 0.0,
            });
        }
        let (delta, gamma) = cubic_margins(lo, hi, scale);
        Self::scaled_cubic(theta, scale, gamma, delta)
    }

    pub fn zero() -> Self {
        Self::new(ReactionKind::Zero, 0.0, 0.0, 0.0)
    }

    pub fn linear_decay(rate: f64) -> Self {
        Self::new(ReactionKind::LinearDecay { rate }, rate, 0.5, rate.abs())
    }

    pub fn custom(f: ScalarField, df: ScalarField, gamma: f64, delta: f64, lip_k: f64) -> Self {
        Self::new(ReactionKind::Custom { f, df }, gamma, delta, lip_k)
    }

    pub fn kind(&self) -> &ReactionKind {
        &self.kind
    }

    pub fn is_extended(&self) -> bool {
        self.extended
    }

    /// True when `f` does not depend on `y`.
    pub fn is_homogeneous(&self) -> bool {
        match &self.kind {
            ReactionKind::Cubic { theta, .. } => {
                let (lo, hi) = theta.range();
                hi - lo <= 1e-15
            }
            ReactionKind::LinearDecay { .. } | ReactionKind::Zero => true,
            ReactionKind::Custom { .. } => false,
        }
    }

    /// Linear continuation outside `[0, 1]`:
    /// `f(y,u) = ∂_u f(y,0) u` for `u < 0` and `∂_u f(y,1)(u-1)` for `u > 1`.
    pub fn extended(&self) -> Self {
        Self {
            extended: true,
            ..self.clone()
        }
    }

    /// `y ↦ f(-y, ·)`.
    pub fn mirrored(&self) -> Self {
        let kind = match &self.kind {
            ReactionKind::Cubic { theta, scale } => ReactionKind::Cubic {
                theta: theta.mirrored(),
                scale: *scale,
            },
            ReactionKind::Custom { f, df } => {
                let (f, df) = (f.clone(), df.clone());
                ReactionKind::Custom {
                    f: Arc::new(move |y, u| f(-y, u)),
                    df: Arc::new(move |y, u| df(-y, u)),
                }
            }
            other => other.clone(),
        };
        Self {
            kind,
            ..self.clone()
        }
    }

    pub fn at(&self, y: f64) -> LocalReaction {
        let kind = match &self.kind {
            ReactionKind::Cubic { theta, scale } => LocalKind::Cubic {
                theta: theta.value(y),
                scale: *scale,
            },
            ReactionKind::LinearDecay { rate } => LocalKind::Linear { rate: *rate },
            ReactionKind::Zero => LocalKind::Zero,
            ReactionKind::Custom { f, df } => LocalKind::Custom {
                y,
                f: f.clone(),
                df: df.clone(),
            },
        };
        let slope0 = kind.df(0.0);
        let slope1 = kind.df(1.0);
        LocalReaction {
            kind,
            slope0,
            slope1,
            extended: self.extended,
        }
    }

    pub fn f(&self, y: f64, u: f64) -> f64 {
        self.at(y).f(u)
    }

    pub fn df(&self, y: f64, u: f64) -> f64 {
        self.at(y).df(u)
    }

    /// Intermediate zero of `f(y, ·)`. Exact for cubics; otherwise located by
    /// bisection on `(δ, 1 - δ)`. `None` when no sign change exists there.
    pub fn theta(&self, y: f64) -> Option<f64> {
        match &self.kind {
            ReactionKind::Cubic { theta, .. } => Some(theta.value(y)),
            ReactionKind::LinearDecay { .. } | ReactionKind::Zero => None,
            ReactionKind::Custom { f, .. } => {
                let lo = self.delta;
                let hi = 1.0 - self.delta;
                let (flo, fhi) = (f(y, lo), f(y, hi));
                if !(flo < 0.0 && fhi > 0.0) {
                    return None;
                }
                bisect(|u| f(y, u), lo, hi, 1e-14).ok()
            }
        }
    }

    /// Samples `n_samples` positions in `[0,1)` and `n_samples` states per
    /// band, recording every point where the bistability or margin
    /// conditions fail.
    pub fn validate(&self, n_samples: usize) -> Result<ValidationReport, ModelError> {
        if n_samples < 16 {
            return Err(ModelError::InvalidParameter(format!(
                "need at least 16 samples per unit, got {n_samples}"
            )));
        }
        let mut report = ValidationReport::default();
        let (gamma, delta) = (self.gamma, self.delta);
        if !(gamma > 0.0) || !(delta > 0.0 && delta < 0.5) {
            report.violations.push(Violation {
                condition: Condition::InvalidMargins,
                y: f64::NAN,
                u: delta,
                value: gamma,
            });
        }
        let raw = Self {
            extended: false,
            ..self.clone()
        };
        let n = n_samples;
        let zero_tol = 1e-12 * self.lip_k.max(1.0);
        for j in 0..n {
            let y = j as f64 / n as f64;
            let local = raw.at(y);
            let eval = |u: f64| -> Result<f64, ModelError> {
                let v = local.f(u);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(ModelError::NonFinite {
                        what: "reaction",
                        y,
                        u,
                    })
                }
            };
            let mut push = |condition, u, value| {
                report.violations.push(Violation {
                    condition,
                    y,
                    u,
                    value,
                })
            };
            for u in [0.0, 1.0] {
                let v = eval(u)?;
                if v.abs() > zero_tol {
                    push(Condition::ZeroAtEndpoint, u, v);
                }
            }
            let theta = match self.theta(y) {
                Some(t) if t.is_finite() => t,
                _ => {
                    push(Condition::MissingIntermediateZero, f64::NAN, f64::NAN);
                    for k in 0..=n {
                        let u = delta * k as f64 / n as f64;
                        let v = eval(u)?;
                        if v > -gamma * u || (k > 0 && v >= 0.0) {
                            push(Condition::LowerMargin, u, v);
                            break;
                        }
                    }
                    continue;
                }
            };
            let vt = eval(theta)?;
            if vt.abs() > zero_tol {
                push(Condition::ZeroAtTheta, theta, vt);
            }
            if !(theta > delta && theta < 1.0 - delta) {
                push(Condition::ThetaOutsideMargins, theta, theta);
            }
            for k in 0..n {
                let u = theta * (k as f64 + 0.5) / n as f64;
                let v = eval(u)?;
                if !(v < 0.0) {
                    push(Condition::NotNegativeBelowTheta, u, v);
                }
                let u = theta + (1.0 - theta) * (k as f64 + 0.5) / n as f64;
                let v = eval(u)?;
                if !(v > 0.0) {
                    push(Condition::NotPositiveAboveTheta, u, v);
                }
            }
            for k in 0..=n {
                let s = k as f64 / n as f64;
                let u = delta * s;
                let v = eval(u)?;
                if v > -gamma * u + zero_tol {
                    push(Condition::LowerMargin, u, v);
                }
                let u = 1.0 - delta * s;
                let v = eval(u)?;
                if v < gamma * (1.0 - u) - zero_tol {
                    push(Condition::UpperMargin, u, v);
                }
            }
            // Lipschitz bound on neighbouring pairs of the extended profile.
            let ext = self.extended().at(y);
            let m = 4 * n;
            let du = 2.0 / m as f64;
            let mut prev_u = -0.5;
            let (mut prev_f, mut prev_df) = (ext.f(prev_u), ext.df(prev_u));
            for k in 1..=m {
                let u = -0.5 + k as f64 * du;
                let (fv, dfv) = (ext.f(u), ext.df(u));
                let lhs = (fv - prev_f).abs() + (dfv - prev_df).abs();
                if lhs > self.lip_k * (u - prev_u) * (1.0 + 1e-9) + 1e-14 {
                    push(Condition::Lipschitz, u, lhs / (u - prev_u));
                }
                (prev_u, prev_f, prev_df) = (u, fv, dfv);
            }
        }
        Ok(report)
    }
}

/// Margins `(δ, γ)` valid for `scale * u(1-u)(u-θ)` with θ in `[lo, hi]`.
pub fn cubic_margins(theta_lo: f64, theta_hi: f64, scale: f64) -> (f64, f64) {
    let delta = (0.25 * theta_lo).min(0.25 * (1.0 - theta_hi)).min(0.05);
    let bound = ((1.0 - delta) * (theta_lo - delta)).min((1.0 - delta) * (1.0 - delta - theta_hi));
    (delta, 0.9 * scale * bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic(theta: f64) -> ReactionProfile {
        ReactionProfile::cubic(ThetaMap::Constant(theta), 0.05, 0.05).unwrap()
    }

    #[test]
    fn cubic_passes_validation() {
        let r = cubic(0.3);
        let rep = r.validate(64).unwrap();
        assert!(
            rep.passed(),
            "{:?}",
            &rep.violations[..rep.violations.len().min(3)]
        );
        // independent dense sampling of the two sign conditions
        for j in 0..1000 {
            let u = (j as f64 + 0.5) / 1000.0;
            let v = u * (1.0 - u) * (u - 0.3);
            assert_eq!(v < 0.0, u < 0.3);
            assert!((r.f(0.4, u) - v).abs() < 1e-15);
        }
    }

    #[test]
    fn wide_margin_fails_inside_theta_band() {
        let r = ReactionProfile::new(
            ReactionKind::Cubic {
                theta: ThetaMap::Constant(0.3),
                scale: 1.0,
            },
            0.05,
            0.4,
            4.1,
        );
        let rep = r.validate(64).unwrap();
        assert!(!rep.passed());
        assert!(rep.has(Condition::ThetaOutsideMargins));
        assert!(rep
            .violations
            .iter()
            .any(|v| v.condition == Condition::LowerMargin && v.u > 0.3 && v.u < 0.4));
    }

    #[test]
    fn zero_reaction_fails() {
        let mut r = ReactionProfile::zero();
        r.gamma = 0.05;
        r.delta = 0.05;
        let rep = r.validate(32).unwrap();
        assert!(!rep.passed());
        assert!(rep.has(Condition::MissingIntermediateZero));
    }

    #[test]
    fn non_finite_is_rejected() {
        let r = ReactionProfile::custom(
            Arc::new(|_, u| if u > 0.5 { f64::NAN } else { -u }),
            Arc::new(|_, _| -1.0),
            0.1,
            0.1,
            2.0,
        );
        assert!(matches!(r.validate(16), Err(ModelError::NonFinite { .. })));
    }

    #[test]
    fn extension_values() {
        let r = cubic(0.3).extended();
        for y in [0.0, 0.3, 0.77] {
            assert!((r.f(y, -0.1) - 0.03).abs() < 1e-15);
            assert!((r.f(y, 1.1) + 0.07).abs() < 1e-14);
            assert_eq!(r.f(y, 0.0), 0.0);
        }
        // unextended profile keeps the polynomial
        let raw = cubic(0.3);
        assert!((raw.f(0.0, -0.1) - (-0.1 * 1.1 * -0.4)).abs() < 1e-15);
    }

    #[test]
    fn cubic_derivatives() {
        let r = cubic(0.3);
        assert_eq!(r.f(0.2, 0.3), 0.0);
        assert!((r.df(0.9, 0.3) - 0.21).abs() < 1e-15);
        assert!((r.df(0.0, 0.0) + 0.3).abs() < 1e-15);
        assert!((r.df(0.0, 1.0) + 0.7).abs() < 1e-15);
        assert!((r.lip_k - 4.1).abs() < 1e-12);
    }

    #[test]
    fn theta_out_of_range_rejected() {
        let err = ReactionProfile::cubic(
            ThetaMap::Cosine {
                mean: 0.5,
                amplitude: 0.48,
            },
            0.01,
            0.05,
        );
        assert!(matches!(err, Err(ModelError::ThetaOutOfRange { .. })));
        let ok = ReactionProfile::cubic(
            ThetaMap::Cosine {
                mean: 0.5,
                amplitude: 0.2,
            },
            0.01,
            0.05,
        )
        .unwrap();
        assert!((ok.theta(0.25).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn custom_theta_by_bisection() {
        let r = ReactionProfile::custom(
            Arc::new(|y, u| u * (1.0 - u) * (u - 0.4 - 0.1 * (TAU * y).sin())),
            Arc::new(|y, u| {
                let t = 0.4 + 0.1 * (TAU * y).sin();
                -3.0 * u * u + 2.0 * (1.0 + t) * u - t
            }),
            0.05,
            0.05,
            5.0,
        );
        assert!((r.theta(0.25).unwrap() - 0.5).abs() < 1e-12);
        assert!(r.validate(32).unwrap().passed());
    }

    #[test]
    fn auto_margins_validate() {
        for (t, s) in [(0.3, 1.0), (0.7, 1.0), (0.5, 0.09), (0.45, 2.0)] {
            let r = ReactionProfile::cubic_auto(ThetaMap::Constant(t), s).unwrap();
            assert!(r.validate(32).unwrap().passed(), "theta={t}");
        }
        let r = ReactionProfile::cubic_auto(
            ThetaMap::Cosine {
                mean: 0.5,
                amplitude: 0.2,
            },
            1.0,
        )
        .unwrap();
        assert!(r.validate(32).unwrap().passed());
    }
}
