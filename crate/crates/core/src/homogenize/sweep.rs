use std::io::Write;

use serde::Serialize;

use crate::fronts::fmt_num;
use crate::fronts::{
    compute_pulsating_front, FrontConfig, FrontOutcome, ProfileLattice, RunBudget,
};
use crate::model::{ModelError, ProblemInstance};
use crate::numerics::golden_section_min;

use super::{solve_homogenized_front, HomogenizeError, HomogenizedFront, ShootingConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alignment {
    pub shift: f64,
    /// `(∬ |φ_L(ξ + s, y) - φ₀(ξ)|² dξ dy)^{1/2}` at the optimal shift.
    pub gap: f64,
    /// Same norm for `∂_ξ φ_L - φ₀'`.
    pub gradient_gap: f64,
}

fn sq_gap(phi_l: &ProfileLattice, phi0: &HomogenizedFront, s: f64) -> f64 {
    let w = phi_l.h / phi_l.n_y as f64;
    let mut acc = 0.0;
    for m in 0..phi_l.n_xi {
        let p = phi0.phi0(phi_l.xi(m) - s);
        for j in 0..phi_l.n_y {
            let d = phi_l.at(m, j) - p;
            acc += d * d;
        }
    }
    acc * w
}

fn sq_gradient_gap(phi_l: &ProfileLattice, phi0: &HomogenizedFront, s: f64) -> f64 {
    let w = phi_l.h / phi_l.n_y as f64;
    let mut acc = 0.0;
    for m in 0..phi_l.n_xi {
        let p = phi0.dphi0(phi_l.xi(m) - s);
        for j in 0..phi_l.n_y {
            let d = phi_l.d_xi(m, j) - p;
            acc += d * d;
        }
    }
    acc * w
}

/// Translation `s` with `φ_L(· + s, ·) ≈ φ₀`, found by golden section around
/// the half-level crossing of the y-averaged lattice profile.
pub fn align_profiles(phi_l: &ProfileLattice, phi0: &HomogenizedFront) -> Alignment {
    let mean = |m: usize| (0..phi_l.n_y).map(|j| phi_l.at(m, j)).sum::<f64>() / phi_l.n_y as f64;
    let mut centre = phi_l.xi(phi_l.n_xi / 2);
    for m in 1..phi_l.n_xi {
        let (a, b) = (mean(m - 1), mean(m));
        if (a - 0.5) * (b - 0.5) <= 0.0 && a != b {
            centre = phi_l.xi(m - 1) + phi_l.h * (a - 0.5) / (a - b);
            break;
        }
    }
    let width = 4.0 + 10.0 * phi_l.h;
    let (shift, g2) = golden_section_min(
        |s| sq_gap(phi_l, phi0, s),
        centre - width,
        centre + width,
        1e-9,
    );
    Alignment {
        shift,
        gap: g2.max(0.0).sqrt(),
        gradient_gap: sq_gradient_gap(phi_l, phi0, shift).max(0.0).sqrt(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HomogSweepRecord {
    pub l: f64,
    pub c_l: Option<f64>,
    pub c_gap_rel: Option<f64>,
    pub alignment: Option<Alignment>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HomogSweepReport {
    pub c0: f64,
    pub front: HomogenizedFront,
    pub records: Vec<HomogSweepRecord>,
}

impl HomogSweepReport {
    fn strictly_decreasing(v: &[Option<f64>]) -> bool {
        v.iter().all(Option::is_some) && v.windows(2).all(|w| w[1].unwrap() < w[0].unwrap())
    }

    pub fn speed_gaps(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.c_gap_rel).collect()
    }

    pub fn profile_gaps(&self) -> Vec<Option<f64>> {
        self.records
            .iter()
            .map(|r| r.alignment.map(|a| a.gap))
            .collect()
    }

    pub fn speed_gap_decreasing(&self) -> bool {
        Self::strictly_decreasing(&self.speed_gaps())
    }

    pub fn profile_gap_decreasing(&self) -> bool {
        Self::strictly_decreasing(&self.profile_gaps())
    }
}

/// Pulsating fronts for each period in `l_list` (decreasing) compared with
/// the averaged front. The averaged data are taken from the instance at the
/// first period; they do not depend on it.
pub fn homogenization_sweep<F>(
    family: F,
    l_list: &[f64],
    cfg: &FrontConfig,
    budget: &RunBudget,
    quad_n: usize,
) -> Result<HomogSweepReport, HomogenizeError>
where
    F: Fn(f64) -> Result<ProblemInstance, ModelError>,
{
    if l_list.is_empty() || l_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(
            ModelError::InvalidParameter("period list must be strictly decreasing".into()).into(),
        );
    }
    let homog = family(l_list[0])?.homogenized(quad_n)?;
    let front = solve_homogenized_front(&homog, &ShootingConfig::default())?;
    if front.c0 == 0.0 {
        return Err(HomogenizeError::ZeroSpeed);
    }
    let mut records = Vec::with_capacity(l_list.len());
    for &l in l_list {
        let rec = match family(l).map_err(HomogenizeError::from).and_then(|inst| {
            compute_pulsating_front(&inst, cfg, budget).map_err(HomogenizeError::from)
        }) {
            Ok(FrontOutcome::Converged(sol)) => HomogSweepRecord {
                l,
                c_l: Some(sol.speed),
                c_gap_rel: Some((sol.speed - front.c0).abs() / front.c0.abs()),
                alignment: Some(align_profiles(&sol.profile, &front)),
                error: None,
            },
            Ok(FrontOutcome::Inconclusive(d)) => HomogSweepRecord {
                l,
                c_l: None,
                c_gap_rel: None,
                alignment: None,
                error: Some(format!("inconclusive: {}", d.reason)),
            },
            Err(e) => HomogSweepRecord {
                l,
                c_l: None,
                c_gap_rel: None,
                alignment: None,
                error: Some(e.to_string()),
            },
        };
        records.push(rec);
    }
    Ok(HomogSweepReport {
        c0: front.c0,
        front,
        records,
    })
}

/// `L,c_L,c0,c_gap_rel,profile_gap_L2,shift`
pub fn write_sweep_csv<W: Write>(report: &HomogSweepReport, mut out: W) -> std::io::Result<()> {
    writeln!(out, "L,c_L,c0,c_gap_rel,profile_gap_L2,shift")?;
    for r in &report.records {
        let nan = f64::NAN;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_num(r.l),
            fmt_num(r.c_l.unwrap_or(nan)),
            fmt_num(report.c0),
            fmt_num(r.c_gap_rel.unwrap_or(nan)),
            fmt_num(r.alignment.map_or(nan, |a| a.gap)),
            fmt_num(r.alignment.map_or(nan, |a| a.shift)),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{HomogenizedData, ReactionProfile, ThetaMap};

    fn front() -> HomogenizedFront {
        let r = ReactionProfile::cubic_auto(ThetaMap::Constant(0.3), 1.0).unwrap();
        let h = HomogenizedData::from_parts(1.0, &r, 256).unwrap();
        solve_homogenized_front(&h, &ShootingConfig::default()).unwrap()
    }

    #[test]
    fn trivial_extension_aligns_exactly() {
        let f = front();
        let lat = ProfileLattice::from_fn(0.05, -400, 800, 8, |xi, _| f.phi0(xi));
        let a = align_profiles(&lat, &f);
        assert!(a.shift.abs() < 1e-6, "{}", a.shift);
        assert!(a.gap < 1e-8);
    }

    #[test]
    fn unit_translate() {
        let f = front();
        let lat = ProfileLattice::from_fn(0.05, -400, 800, 8, |xi, _| f.phi0(xi - 1.0));
        let a = align_profiles(&lat, &f);
        assert!((a.shift - 1.0).abs() < 1e-6);
        assert!(a.gap < 1e-8);
    }

    #[test]
    fn gap_invariant_under_common_shift() {
        let f = front();
        let bump =
            |xi: f64, y: f64| 0.02 * (2.0 * std::f64::consts::PI * y).cos() * (-xi * xi).exp();
        let a = ProfileLattice::from_fn(0.05, -400, 800, 8, |xi, y| {
            f.phi0(xi - 0.3) + bump(xi - 0.3, y)
        });
        // shifting the lattice by a whole number of cells keeps the sampling identical
        let b = ProfileLattice::from_fn(0.05, -360, 800, 8, |xi, y| {
            f.phi0(xi - 2.3) + bump(xi - 2.3, y)
        });
        let (ga, gb) = (align_profiles(&a, &f), align_profiles(&b, &f));
        assert!((ga.gap - gb.gap).abs() < 1e-8 * ga.gap.max(1e-12));
        assert!((gb.shift - ga.shift - 2.0).abs() < 1e-6);
    }
}
