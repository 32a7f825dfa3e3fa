//! Tridiagonal and cyclic tridiagonal solvers.

/// Tridiagonal matrix stored by diagonals. `lower[0]` and `upper[n-1]` are
/// ignored for the plain solve and used as the corner entries by the cyclic
/// solve (`lower[0]` couples row 0 to column n-1, `upper[n-1]` couples row
/// n-1 to column 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// y = A x (non-cyclic).
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.lower[i] * x[i - 1];
            }
            if i + 1 < n {
                s += self.upper[i] * x[i + 1];
            }
            y[i] = s;
        }
    }

    /// y = A x with the cyclic corner entries.
    pub fn apply_cyclic(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let left = x[(i + n - 1) % n];
            let right = x[(i + 1) % n];
            y[i] = self.lower[i] * left + self.diag[i] * x[i] + self.upper[i] * right;
        }
    }

    pub fn factor(&self) -> Option<FactoredTridiagonal> {
        FactoredTridiagonal::new(self)
    }

    /// Solves A x = rhs in place (Thomas algorithm, no pivoting).
    pub fn solve(&self, rhs: &mut [f64]) -> Option<()> {
        self.factor().map(|f| f.solve(rhs))
    }
}

/// Thomas-algorithm factorization kept for repeated solves with one matrix.
#[derive(Debug, Clone)]
pub struct FactoredTridiagonal {
    lower: Vec<f64>,
    inv_pivot: Vec<f64>,
    upper_scaled: Vec<f64>,
}

impl FactoredTridiagonal {
    pub fn new(m: &Tridiagonal) -> Option<Self> {
        let n = m.len();
        let mut inv_pivot = vec![0.0; n];
        let mut upper_scaled = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let pivot = if i == 0 {
                m.diag[0]
            } else {
                m.diag[i] - m.lower[i] * prev
            };
            if pivot == 0.0 || !pivot.is_finite() {
                return None;
            }
            inv_pivot[i] = 1.0 / pivot;
            upper_scaled[i] = if i + 1 < n {
                m.upper[i] * inv_pivot[i]
            } else {
                0.0
            };
            prev = upper_scaled[i];
        }
        Some(Self {
            lower: m.lower.clone(),
            inv_pivot,
            upper_scaled,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    pub fn solve(&self, rhs: &mut [f64]) {
        let n = self.len();
        if n == 0 {
            return;
        }
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper_scaled[i] * rhs[i + 1];
        }
    }
}

/// Solves the cyclic system (corners in `lower[0]`, `upper[n-1]`) by the
/// Sherman-Morrison correction of a plain tridiagonal solve.
pub fn solve_cyclic_tridiagonal(m: &Tridiagonal, rhs: &mut [f64]) -> Option<()> {
    let n = m.len();
    match n {
        0 => return Some(()),
        1 => {
            let d = m.diag[0] + m.lower[0] + m.upper[0];
            if d == 0.0 {
                return None;
            }
            rhs[0] /= d;
            return Some(());
        }
        2 => {
            // Both corner couplings land on the off-diagonal positions.
            let a = m.diag[0];
            let b = m.upper[0] + m.lower[0];
            let c = m.lower[1] + m.upper[1];
            let d = m.diag[1];
            let det = a * d - b * c;
            if det == 0.0 {
                return None;
            }
            let (r0, r1) = (rhs[0], rhs[1]);
            rhs[0] = (d * r0 - b * r1) / det;
            rhs[1] = (a * r1 - c * r0) / det;
            return Some(());
        }
        _ => {}
    }
    let alpha = m.upper[n - 1];
    let beta = m.lower[0];
    let gamma = -m.diag[0];
    let mut modified = m.clone();
    modified.diag[0] -= gamma;
    modified.diag[n - 1] -= alpha * beta / gamma;
    let fac = modified.factor()?;
    fac.solve(rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    fac.solve(&mut u);
    let vx = rhs[0] + beta / gamma * rhs[n - 1];
    let vu = u[0] + beta / gamma * u[n - 1];
    let denom = 1.0 + vu;
    if denom == 0.0 || !denom.is_finite() {
        return None;
    }
    let factor = vx / denom;
    for (r, ui) in rhs.iter_mut().zip(&u) {
        *r -= factor * ui;
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(m: &Tridiagonal, cyclic: bool) -> Vec<Vec<f64>> {
        let n = m.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] += m.diag[i];
            if i > 0 {
                a[i][i - 1] += m.lower[i];
            } else if cyclic {
                a[0][n - 1] += m.lower[0];
            }
            if i + 1 < n {
                a[i][i + 1] += m.upper[i];
            } else if cyclic {
                a[n - 1][0] += m.upper[n - 1];
            }
        }
        a
    }

    fn sample(n: usize) -> Tridiagonal {
        let mut m = Tridiagonal::new(n);
        for i in 0..n {
            m.diag[i] = 4.0 + (i as f64 * 0.37).sin();
            m.lower[i] = -1.0 + 0.1 * (i as f64).cos();
            m.upper[i] = -1.2 + 0.05 * i as f64 / n as f64;
        }
        m
    }

    #[test]
    fn thomas_matches_dense_product() {
        let m = sample(9);
        let x: Vec<f64> = (0..9).map(|i| (i as f64 * 0.7).cos()).collect();
        let a = dense(&m, false);
        let mut b: Vec<f64> = a
            .iter()
            .map(|row| row.iter().zip(&x).map(|(p, q)| p * q).sum())
            .collect();
        m.solve(&mut b).unwrap();
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn cyclic_matches_dense_product() {
        for n in [2usize, 3, 5, 17] {
            let m = sample(n);
            let x: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 1.3).sin()).collect();
            let a = dense(&m, true);
            let mut b: Vec<f64> = a
                .iter()
                .map(|row| row.iter().zip(&x).map(|(p, q)| p * q).sum())
                .collect();
            let mut check = vec![0.0; n];
            if n > 2 {
                m.apply_cyclic(&x, &mut check);
                for (u, v) in check.iter().zip(&b) {
                    assert!((u - v).abs() < 1e-12);
                }
            }
            solve_cyclic_tridiagonal(&m, &mut b).unwrap();
            for (u, v) in b.iter().zip(&x) {
                assert!((u - v).abs() < 1e-11, "n={n}");
            }
        }
    }
}
