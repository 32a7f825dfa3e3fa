use serde::{Deserialize, Serialize};

use crate::model::ProblemInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuperSubKind {
    Super,
    Sub,
}

/// `w(t, ξ) = w₁(t) η(ξ + c± t) + w₂(t) (1 - η(ξ + c± t))` with
/// `η(s) = (1 + tanh(-s/2))/2`, checked against the frame operator
/// `𝓛w = w_t - c w_ξ - (a(ξ + ct) w_ξ)_ξ - f(ξ + ct, w)`.
#[derive(Debug, Clone, Serialize)]
pub struct SuperSubSolution {
    pub kind: SuperSubKind,
    /// Speed of the frame.
    pub c: f64,
    /// `c±`.
    pub drift: f64,
    pub delta: f64,
    pub gamma: f64,
    pub k: f64,
    pub a_norm: f64,
    pub da_norm: f64,
    /// Smallest sampled `𝓛w` for a supersolution, largest for a sub.
    pub worst_defect: f64,
    /// `(t, ξ)` of the worst sample.
    pub worst_at: (f64, f64),
    pub samples: usize,
}

fn eta(s: f64) -> f64 {
    0.5 * (1.0 + (-0.5 * s).tanh())
}

impl SuperSubSolution {
    pub fn w1(&self, t: f64) -> f64 {
        let e = (-self.gamma * t).exp();
        match self.kind {
            SuperSubKind::Super => 1.0 + (1.0 - self.delta) * e,
            SuperSubKind::Sub => 1.0 - self.delta * e,
        }
    }

    pub fn w2(&self, t: f64) -> f64 {
        let e = (-self.gamma * t).exp();
        match self.kind {
            SuperSubKind::Super => self.delta * e,
            SuperSubKind::Sub => -(1.0 + self.delta) * e,
        }
    }

    pub fn eval(&self, t: f64, xi: f64) -> f64 {
        let e = eta(xi + self.drift * t);
        self.w1(t) * e + self.w2(t) * (1.0 - e)
    }

    /// `𝓛w` in closed form.
    pub fn defect(&self, inst: &ProblemInstance, t: f64, xi: f64) -> f64 {
        let s = xi + self.drift * t;
        let e = eta(s);
        let de = -e * (1.0 - e);
        let d2e = e * (1.0 - e) * (1.0 - 2.0 * e);
        let (w1, w2) = (self.w1(t), self.w2(t));
        let g = -self.gamma;
        let ex = (g * t).exp();
        let (dw1, dw2) = match self.kind {
            SuperSubKind::Super => ((1.0 - self.delta) * g * ex, self.delta * g * ex),
            SuperSubKind::Sub => (-self.delta * g * ex, -(1.0 + self.delta) * g * ex),
        };
        let jump = w1 - w2;
        let w = w1 * e + w2 * (1.0 - e);
        let w_t = dw1 * e + dw2 * (1.0 - e) + jump * self.drift * de;
        let w_x = jump * de;
        let w_xx = jump * d2e;
        let x = xi + self.c * t;
        let (a, da) = (inst.a_l(x), inst.da_l(x));
        w_t - self.c * w_x - (da * w_x + a * w_xx) - inst.f_l(x, w)
    }

    /// Smallest shift `s` (super) or largest (sub) with `g ≤ w(0, · - s)`
    /// (resp. `≥`) on `n` samples of `[xi_lo, xi_hi]`.
    pub fn bounding_shift(
        &self,
        g: &dyn Fn(f64) -> f64,
        xi_lo: f64,
        xi_hi: f64,
        n: usize,
    ) -> Option<f64> {
        let holds = |s: f64| {
            (0..=n).all(|k| {
                let xi = xi_lo + (xi_hi - xi_lo) * k as f64 / n as f64;
                let w = self.eval(0.0, xi - s);
                match self.kind {
                    SuperSubKind::Super => g(xi) <= w,
                    SuperSubKind::Sub => g(xi) >= w,
                }
            })
        };
        // w(0, · - s) increases with s for both kinds
        let (mut lo, mut hi) = (-100.0, 100.0);
        match self.kind {
            SuperSubKind::Super => {
                if !holds(hi) {
                    return None;
                }
                for _ in 0..80 {
                    let m = 0.5 * (lo + hi);
                    if holds(m) {
                        hi = m
                    } else {
                        lo = m
                    }
                }
                Some(hi)
            }
            SuperSubKind::Sub => {
                if !holds(lo) {
                    return None;
                }
                for _ in 0..80 {
                    let m = 0.5 * (lo + hi);
                    if holds(m) {
                        lo = m
                    } else {
                        hi = m
                    }
                }
                Some(lo)
            }
        }
    }
}

/// Assembles `w±` with `c± = c ∓ (‖a‖ + ‖a'‖ + 2K)` and samples `𝓛w±` on a
/// 64×64 lattice over `t ∈ [0, 10/γ]`, `ξ ∈ [-40, 40]`.
pub fn build_supersub(
    inst: &ProblemInstance,
    c: f64,
    kind: SuperSubKind,
    k: f64,
) -> SuperSubSolution {
    let (a_norm, da_norm) = inst.a_norms();
    let margin = a_norm + da_norm + 2.0 * k;
    let drift = match kind {
        SuperSubKind::Super => c - margin,
        SuperSubKind::Sub => c + margin,
    };
    let mut sol = SuperSubSolution {
        kind,
        c,
        drift,
        delta: inst.reaction.delta,
        gamma: inst.reaction.gamma,
        k,
        a_norm,
        da_norm,
        worst_defect: 0.0,
        worst_at: (0.0, 0.0),
        samples: 0,
    };
    let n = 64;
    let t_max = 10.0 / sol.gamma;
    let mut worst = match kind {
        SuperSubKind::Super => f64::INFINITY,
        SuperSubKind::Sub => f64::NEG_INFINITY,
    };
    let mut at = (0.0, 0.0);
    for i in 0..n {
        let t = t_max * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let xi = -40.0 + 80.0 * j as f64 / (n - 1) as f64;
            let d = sol.defect(inst, t, xi);
            let worse = match kind {
                SuperSubKind::Super => d < worst,
                SuperSubKind::Sub => d > worst,
            };
            if worse {
                worst = d;
                at = (t, xi);
            }
        }
    }
    sol.worst_defect = worst;
    sol.worst_at = at;
    sol.samples = n * n;
    sol
}
