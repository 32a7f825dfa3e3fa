use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::model::{ModelError, ProblemInstance};

use super::{compute_pulsating_front, FrontConfig, FrontError, FrontOutcome, RunBudget};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Classification {
    Propagating { c: f64 },
    Stationary,
    Inconclusive,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Propagating { .. } => "propagating",
            Self::Stationary => "stationary",
            Self::Inconclusive => "inconclusive",
        }
    }
}

/// Classification with the numbers that decided it.
#[derive(Debug, Clone, Serialize)]
pub struct QuenchResult {
    pub classification: Classification,
    pub c_level: f64,
    pub c_period: f64,
    pub uncertainty: f64,
    pub pulsating_defect: f64,
    pub stationary_residual: f64,
    /// Level displacement over the last stationary window, when available.
    pub displacement: Option<f64>,
    pub note: String,
}

pub fn classify_outcome(outcome: &FrontOutcome) -> QuenchResult {
    match outcome {
        FrontOutcome::Converged(s) if s.stationary => QuenchResult {
            classification: Classification::Stationary,
            c_level: 0.0,
            c_period: 0.0,
            uncertainty: 0.0,
            pulsating_defect: f64::NAN,
            stationary_residual: s.stationary_residual,
            displacement: None,
            note: String::new(),
        },
        FrontOutcome::Converged(s) => {
            let est = s
                .estimate
                .expect("propagating fronts carry a speed estimate");
            QuenchResult {
                classification: Classification::Propagating { c: s.speed },
                c_level: est.c_level,
                c_period: est.c_period,
                uncertainty: est.uncertainty,
                pulsating_defect: s.pulsating_error,
                stationary_residual: s.stationary_residual,
                displacement: None,
                note: String::new(),
            }
        }
        FrontOutcome::Inconclusive(d) => QuenchResult {
            classification: Classification::Inconclusive,
            c_level: d.c_estimate.unwrap_or(f64::NAN),
            c_period: f64::NAN,
            uncertainty: f64::NAN,
            pulsating_defect: d.pulsating_defects.last().map(|p| p.1).unwrap_or(f64::NAN),
            stationary_residual: d.stationary_residual,
            displacement: d.displacement,
            note: d.reason.clone(),
        },
    }
}

/// Propagating, stationary or inconclusive, with evidence attached.
pub fn classify_quenching(
    inst: &ProblemInstance,
    cfg: &FrontConfig,
    budget: &RunBudget,
) -> Result<QuenchResult, FrontError> {
    Ok(classify_outcome(&compute_pulsating_front(
        inst, cfg, budget,
    )?))
}

/// One point of a period scan. Failures are kept as records.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub l: f64,
    pub result: Option<QuenchResult>,
    pub error: Option<String>,
    /// Speed continuity with the previous propagating record:
    /// `|c - c_prev| <= 2 (u + u_prev) + |ΔL|`-scaled tolerance.
    pub continuous_with_previous: Option<bool>,
}

impl SweepRecord {
    pub fn classification(&self) -> &'static str {
        match (&self.result, &self.error) {
            (Some(r), _) => r.classification.label(),
            _ => "error",
        }
    }

    pub fn propagating_speed(&self) -> Option<f64> {
        match self.result.as_ref()?.classification {
            Classification::Propagating { c } => Some(c),
            _ => None,
        }
    }
}

/// Runs the front solver on each period (in parallel on `workers` threads)
/// and returns records in grid order.
pub fn scan_e<F>(
    family: F,
    l_grid: &[f64],
    cfg: &FrontConfig,
    budget: &RunBudget,
    workers: usize,
) -> Result<Vec<SweepRecord>, FrontError>
where
    F: Fn(f64) -> Result<ProblemInstance, ModelError> + Sync,
{
    if l_grid.windows(2).any(|w| !(w[1] > w[0]) && !(w[1] < w[0])) {
        return Err(FrontError::InvalidConfig(
            "period grid must be strictly monotone".into(),
        ));
    }
    let monotone = l_grid.windows(2).all(|w| w[1] > w[0]) || l_grid.windows(2).all(|w| w[1] < w[0]);
    if !monotone {
        return Err(FrontError::InvalidConfig(
            "period grid must be monotone".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| FrontError::InvalidConfig(e.to_string()))?;
    let results: Vec<Result<QuenchResult, String>> = pool.install(|| {
        l_grid
            .par_iter()
            .map(|&l| {
                let inst = family(l).map_err(|e| e.to_string())?;
                classify_quenching(&inst, cfg, budget).map_err(|e| e.to_string())
            })
            .collect()
    });
    let mut records: Vec<SweepRecord> = Vec::with_capacity(l_grid.len());
    for (&l, r) in l_grid.iter().zip(results) {
        let (result, error) = match r {
            Ok(q) => (Some(q), None),
            Err(e) => (None, Some(e)),
        };
        let mut rec = SweepRecord {
            l,
            result,
            error,
            continuous_with_previous: None,
        };
        if let (Some(prev), Some(c)) = (records.last(), rec.propagating_speed()) {
            if let Some(c_prev) = prev.propagating_speed() {
                let u = rec.result.as_ref().map(|q| q.uncertainty).unwrap_or(0.0)
                    + prev.result.as_ref().map(|q| q.uncertainty).unwrap_or(0.0);
                let rel_step = ((l - prev.l) / l.abs().max(prev.l.abs())).abs();
                rec.continuous_with_previous =
                    Some((c - c_prev).abs() <= 2.0 * u + rel_step * c.abs().max(c_prev.abs()));
            }
        }
        records.push(rec);
    }
    Ok(records)
}

pub(crate) fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.10e}")
    } else {
        "nan".to_string()
    }
}

/// `L,classification,c_level,c_period,uncertainty,pulsating_defect,stationary_residual`
pub fn write_scan_csv<W: Write>(records: &[SweepRecord], mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "L,classification,c_level,c_period,uncertainty,pulsating_defect,stationary_residual"
    )?;
    for r in records {
        let (cl, cp, u, d, s) = match &r.result {
            Some(q) => (
                q.c_level,
                q.c_period,
                q.uncertainty,
                q.pulsating_defect,
                q.stationary_residual,
            ),
            None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_num(r.l),
            r.classification(),
            fmt_num(cl),
            fmt_num(cp),
            fmt_num(u),
            fmt_num(d),
            fmt_num(s)
        )?;
    }
    Ok(())
}

/// One point of a quenching scan over the Xin family.
#[derive(Debug, Clone, Serialize)]
pub struct QuenchRecord {
    pub lambda: f64,
    pub result: Option<QuenchResult>,
    pub error: Option<String>,
}

impl QuenchRecord {
    pub fn classification(&self) -> &'static str {
        match &self.result {
            Some(r) => r.classification.label(),
            None => "error",
        }
    }

    /// `|c|` with its uncertainty: zero for stationary records, the level
    /// estimate for inconclusive ones when it exists.
    pub fn measured_speed(&self) -> Option<(f64, f64)> {
        let r = self.result.as_ref()?;
        match r.classification {
            Classification::Propagating { c } => Some((c.abs(), r.uncertainty)),
            Classification::Stationary => Some((0.0, 0.0)),
            Classification::Inconclusive if r.c_level.is_finite() => Some((r.c_level.abs(), 0.0)),
            Classification::Inconclusive => None,
        }
    }

    /// Stationary, or inconclusive with the level stuck within one period.
    pub fn pinning_evidence(&self) -> bool {
        match &self.result {
            Some(r) => match r.classification {
                Classification::Stationary => true,
                Classification::Inconclusive => r.displacement.is_some_and(|d| d.abs() < 1.0),
                Classification::Propagating { .. } => false,
            },
            None => false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuenchScan {
    pub delta: f64,
    pub mu: f64,
    /// Sorted by increasing `λ`.
    pub records: Vec<QuenchRecord>,
    /// `|c|` never grows along increasing `|λ|` beyond twice the combined
    /// speed uncertainty.
    pub non_increasing: bool,
    pub pinning_evidence: bool,
    /// Every stationary record has a residual below `tol_stat`.
    pub stationary_consistent: bool,
}

/// Classifies the Xin instance `(δ, λ, μ)` for each `λ` of the grid.
pub fn quench_scan(
    delta: f64,
    mu: f64,
    lambdas: &[f64],
    cfg: &FrontConfig,
    budget: &RunBudget,
    workers: usize,
) -> Result<QuenchScan, FrontError> {
    let mut grid = lambdas.to_vec();
    if grid.iter().any(|l| !l.is_finite()) {
        return Err(FrontError::InvalidConfig(
            "lambda grid must be finite".into(),
        ));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| FrontError::InvalidConfig(e.to_string()))?;
    let records: Vec<QuenchRecord> = pool.install(|| {
        grid.par_iter()
            .map(|&lambda| {
                let r = crate::model::make_xin_example(delta, lambda, mu)
                    .map_err(|e| e.to_string())
                    .and_then(|inst| {
                        classify_quenching(&inst, cfg, budget).map_err(|e| e.to_string())
                    });
                match r {
                    Ok(q) => QuenchRecord {
                        lambda,
                        result: Some(q),
                        error: None,
                    },
                    Err(e) => QuenchRecord {
                        lambda,
                        result: None,
                        error: Some(e),
                    },
                }
            })
            .collect()
    });

    let mut by_abs: Vec<&QuenchRecord> = records.iter().collect();
    by_abs.sort_by(|a, b| a.lambda.abs().total_cmp(&b.lambda.abs()));
    let mut non_increasing = true;
    for w in by_abs.windows(2) {
        if w[1].lambda.abs() == w[0].lambda.abs() {
            continue;
        }
        match (w[0].measured_speed(), w[1].measured_speed()) {
            (Some((c0, u0)), Some((c1, u1))) => non_increasing &= c1 <= c0 + 2.0 * (u0 + u1),
            _ => non_increasing = false,
        }
    }
    let pinning_evidence = records.iter().any(QuenchRecord::pinning_evidence);
    let stationary_consistent = records.iter().all(|r| match &r.result {
        Some(q) if q.classification == Classification::Stationary => {
            q.stationary_residual < cfg.tol_stat
        }
        _ => true,
    });
    Ok(QuenchScan {
        delta,
        mu,
        records,
        non_increasing,
        pinning_evidence,
        stationary_consistent,
    })
}

/// `lambda,classification,c_level,c_period,uncertainty,stationary_residual,displacement,error`
pub fn write_quench_csv<W: Write>(scan: &QuenchScan, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "lambda,classification,c_level,c_period,uncertainty,stationary_residual,displacement,error"
    )?;
    for r in &scan.records {
        let q = r.result.as_ref();
        let pick = |f: fn(&QuenchResult) -> f64| fmt_num(q.map(f).unwrap_or(f64::NAN));
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_num(r.lambda),
            r.classification(),
            pick(|q| q.c_level),
            pick(|q| q.c_period),
            pick(|q| q.uncertainty),
            pick(|q| q.stationary_residual),
            pick(|q| q.displacement.unwrap_or(f64::NAN)),
            r.error.as_deref().unwrap_or("").replace(',', ";")
        )?;
    }
    Ok(())
}
