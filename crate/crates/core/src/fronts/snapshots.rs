/// Nodal values at one time, positioned by the global index of node 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub origin: i64,
    pub values: Vec<f64>,
}

/// Time-ordered snapshots of a moving-window run. Values outside a
/// snapshot's window are read as the boundary data.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSeries {
    pub period: f64,
    pub nodes_per_period: usize,
    pub u_left: f64,
    pub u_right: f64,
    pub snaps: Vec<Snapshot>,
}

impl SnapshotSeries {
    pub fn new(period: f64, nodes_per_period: usize, u_left: f64, u_right: f64) -> Self {
        Self {
            period,
            nodes_per_period,
            u_left,
            u_right,
            snaps: Vec::new(),
        }
    }

    pub fn h(&self) -> f64 {
        self.period / self.nodes_per_period as f64
    }

    pub fn push(&mut self, t: f64, origin: i64, values: &[f64]) {
        self.snaps.push(Snapshot {
            t,
            origin,
            values: values.to_vec(),
        });
    }

    pub fn len(&self) -> usize {
        self.snaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snaps.is_empty()
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.snaps.first()?.t, self.snaps.last()?.t))
    }

    /// Largest gap between consecutive snapshot times.
    pub fn max_gap(&self) -> f64 {
        self.snaps
            .windows(2)
            .map(|w| w[1].t - w[0].t)
            .fold(0.0, f64::max)
    }

    #[inline]
    pub fn value(&self, k: usize, g: i64) -> f64 {
        let s = &self.snaps[k];
        let i = g - s.origin;
        if i < 0 {
            self.u_left
        } else if i as usize >= s.values.len() {
            self.u_right
        } else {
            s.values[i as usize]
        }
    }

    /// Snapshot index `k` and weight `w` with `t = (1-w) t_k + w t_{k+1}`.
    pub fn bracket(&self, t: f64) -> Option<(usize, f64)> {
        let (t0, t1) = self.span()?;
        let eps = 1e-9 * (1.0 + t1.abs());
        if t < t0 - eps || t > t1 + eps {
            return None;
        }
        if self.snaps.len() == 1 {
            return Some((0, 0.0));
        }
        let k = self
            .snaps
            .partition_point(|s| s.t <= t)
            .clamp(1, self.snaps.len() - 1)
            - 1;
        let (ta, tb) = (self.snaps[k].t, self.snaps[k + 1].t);
        Some((k, ((t - ta) / (tb - ta)).clamp(0.0, 1.0)))
    }

    /// `u(t, x_g)` interpolated in time.
    pub fn interpolate(&self, t: f64, g: i64) -> Option<f64> {
        let (k, w) = self.bracket(t)?;
        Some(self.value_bracketed(k, w, g))
    }

    /// Cubic Lagrange interpolation in time through the four snapshots
    /// around the bracket (linear when fewer are available).
    #[inline]
    pub fn value_bracketed(&self, k: usize, w: f64, g: i64) -> f64 {
        let n = self.snaps.len();
        if w == 0.0 || k + 1 >= n {
            return self.value(k, g);
        }
        if n < 4 {
            return (1.0 - w) * self.value(k, g) + w * self.value(k + 1, g);
        }
        let start = k.saturating_sub(1).min(n - 4);
        let t = self.snaps[k].t + w * (self.snaps[k + 1].t - self.snaps[k].t);
        let ts = [
            self.snaps[start].t,
            self.snaps[start + 1].t,
            self.snaps[start + 2].t,
            self.snaps[start + 3].t,
        ];
        let mut sum = 0.0;
        for a in 0..4 {
            let mut weight = 1.0;
            for b in 0..4 {
                if a != b {
                    weight *= (t - ts[b]) / (ts[a] - ts[b]);
                }
            }
            sum += weight * self.value(start + a, g);
        }
        sum
    }

    /// `sup_x |u(t_ref + T, x + shift L) - u(t_ref, x)|` over the nodes of
    /// the reference snapshot `reference`.
    pub fn pulsating_defect(&self, reference: usize, lag: f64, shift_periods: i64) -> Option<f64> {
        let base = &self.snaps[reference];
        let (k, w) = self.bracket(base.t + lag)?;
        let offset = shift_periods * self.nodes_per_period as i64;
        let mut sup = 0.0f64;
        for (i, &u0) in base.values.iter().enumerate() {
            let g = base.origin + i as i64;
            sup = sup.max((self.value_bracketed(k, w, g + offset) - u0).abs());
        }
        Some(sup)
    }

    /// Largest `|u_t|` estimated from consecutive snapshots.
    pub fn max_time_derivative(&self) -> f64 {
        let mut best = 0.0f64;
        for k in 0..self.snaps.len().saturating_sub(1) {
            let dt = self.snaps[k + 1].t - self.snaps[k].t;
            if dt <= 0.0 {
                continue;
            }
            let s = &self.snaps[k];
            for (i, &u) in s.values.iter().enumerate() {
                let g = s.origin + i as i64;
                best = best.max((self.value(k + 1, g) - u).abs() / dt);
            }
        }
        best
    }
}
