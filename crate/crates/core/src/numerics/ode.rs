//! Dormand-Prince 5(4) explicit Runge-Kutta with adaptive steps.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSample<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeEvent<E> {
    /// The stop predicate fired after an accepted step.
    Stopped(E),
    /// Reached the requested end time.
    Finished,
    /// Step size underflow or step budget exhausted.
    Failed,
}

#[derive(Debug, Clone)]
pub struct OdeOutcome<const N: usize, E> {
    pub samples: Vec<OdeSample<N>>,
    pub event: OdeEvent<E>,
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-13,
            h_init: 1e-3,
            h_max: 0.5,
            max_steps: 2_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

impl Dopri5 {
    /// Integrates `y' = rhs(t, y)` from `t0` towards `t_end`, calling `stop`
    /// after every accepted step. All accepted states are recorded.
    pub fn integrate<const N: usize, F, S, E>(
        &self,
        rhs: F,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        mut stop: S,
    ) -> OdeOutcome<N, E>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        S: FnMut(f64, &[f64; N]) -> Option<E>,
    {
        let mut t = t0;
        let mut y = y0;
        let mut k1 = rhs(t, &y);
        let mut samples = vec![OdeSample { t, y, dy: k1 }];
        let mut h = self.h_init.min(self.h_max).min(t_end - t0);
        let mut steps = 0;
        while t < t_end {
            if steps >= self.max_steps || h < 1e-14 * t.abs().max(1.0) {
                return OdeOutcome {
                    samples,
                    event: OdeEvent::Failed,
                };
            }
            steps += 1;
            h = h.min(t_end - t);
            let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(
                t + C4 * h,
                &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = rhs(
                t + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = rhs(
                t + h,
                &axpy(
                    &y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = axpy(
                &y,
                h,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            );
            let k7 = rhs(t + h, &y_new);
            let mut err = 0.0f64;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / scale).abs());
            }
            if !err.is_finite() {
                h *= 0.25;
                continue;
            }
            if err <= 1.0 {
                t += h;
                y = y_new;
                k1 = k7;
                samples.push(OdeSample { t, y, dy: k1 });
                if let Some(e) = stop(t, &y) {
                    return OdeOutcome {
                        samples,
                        event: OdeEvent::Stopped(e),
                    };
                }
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * factor).min(self.h_max);
        }
        OdeOutcome {
            samples,
            event: OdeEvent::Finished,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let out = Dopri5::default().integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            std::f64::consts::TAU,
            |_, _| None::<()>,
        );
        assert_eq!(out.event, OdeEvent::Finished);
        let last = out.samples.last().unwrap();
        assert!((last.y[0] - 1.0).abs() < 1e-8);
        assert!(last.y[1].abs() < 1e-8);
    }

    #[test]
    fn stop_predicate_fires() {
        let out = Dopri5::default().integrate(
            |_, y: &[f64; 1]| [-y[0]],
            0.0,
            [1.0],
            100.0,
            |_, y| (y[0] < 0.1).then_some(7),
        );
        assert_eq!(out.event, OdeEvent::Stopped(7));
        let last = out.samples.last().unwrap();
        assert!(last.y[0] < 0.1 && last.t < 3.0);
    }
}
