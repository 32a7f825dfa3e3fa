//! Plot-data writers: whitespace-separated columns behind `#` comment
//! headers, readable by gnuplot as is.

use std::io::{self, Write};

use crate::fronts::{fmt_num, ProfileLattice};
use crate::homogenize::HomogenizedFront;
use crate::spectral::{EigenPair, SteadyState};

/// Comment block written at the top of every artifact.
#[derive(Debug, Clone, Default)]
pub struct PlotHeader {
    pub title: String,
    /// Hash of the configuration that produced the data.
    pub config_hash: String,
    /// Extra `key=value` lines.
    pub notes: Vec<String>,
    /// `(name, unit)` per column.
    pub columns: Vec<(String, String)>,
}

impl PlotHeader {
    pub fn new(title: impl Into<String>, config_hash: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            config_hash: config_hash.into(),
            ..Self::default()
        }
    }

    pub fn note(mut self, line: impl Into<String>) -> Self {
        self.notes.push(line.into());
        self
    }

    pub fn column(mut self, name: &str, unit: &str) -> Self {
        self.columns.push((name.to_string(), unit.to_string()));
        self
    }

    pub fn write<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "# {}", self.title)?;
        writeln!(out, "# config_hash={}", self.config_hash)?;
        for n in &self.notes {
            writeln!(out, "# {n}")?;
        }
        if !self.columns.is_empty() {
            let units: Vec<String> = self
                .columns
                .iter()
                .map(|(n, u)| format!("{n} [{u}]"))
                .collect();
            writeln!(out, "# units: {}", units.join(", "))?;
            let names: Vec<&str> = self.columns.iter().map(|(n, _)| n.as_str()).collect();
            writeln!(out, "# {}", names.join(" "))?;
        }
        Ok(())
    }
}

fn row<W: Write>(out: &mut W, values: &[f64]) -> io::Result<()> {
    let cols: Vec<String> = values.iter().map(|&v| fmt_num(v)).collect();
    writeln!(out, "{}", cols.join(" "))
}

/// `xi y phi` triples, one block per `ξ` separated by blank lines (`splot`).
pub fn write_profile<W: Write>(
    out: &mut W,
    lattice: &ProfileLattice,
    header: &PlotHeader,
) -> io::Result<()> {
    let mut h = header.clone();
    h.columns.clear();
    h.column("xi", "length")
        .column("y", "period fraction")
        .column("phi", "state")
        .write(out)?;
    for m in 0..lattice.n_xi {
        for j in 0..lattice.n_y {
            row(
                out,
                &[
                    lattice.xi(m),
                    j as f64 / lattice.n_y as f64,
                    lattice.at(m, j),
                ],
            )?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Generic two-column series, e.g. `t sup_error` or `t x_half`.
pub fn write_series<W: Write>(
    out: &mut W,
    series: &[(f64, f64)],
    names: [(&str, &str); 2],
    header: &PlotHeader,
) -> io::Result<()> {
    let mut h = header.clone();
    h.columns.clear();
    h.column(names[0].0, names[0].1)
        .column(names[1].0, names[1].1)
        .write(out)?;
    for &(a, b) in series {
        row(out, &[a, b])?;
    }
    Ok(())
}

/// `t sup_error` pairs of a stability run.
pub fn write_error_series<W: Write>(
    out: &mut W,
    series: &[(f64, f64)],
    header: &PlotHeader,
) -> io::Result<()> {
    write_series(out, series, [("t", "time"), ("sup_error", "state")], header)
}

/// `x u` over one period; the header records the period, `λ₁` and the class.
pub fn write_steady_state<W: Write>(
    out: &mut W,
    state: &SteadyState,
    header: &PlotHeader,
) -> io::Result<()> {
    let h = header.clone().note(format!(
        "L={} lambda1={} class={}",
        fmt_num(state.period),
        fmt_num(state.lambda1),
        state.class.label()
    ));
    let series: Vec<(f64, f64)> = state
        .x()
        .into_iter()
        .zip(state.values.iter().copied())
        .collect();
    write_series(out, &series, [("x", "length"), ("u", "state")], &h)
}

/// `x psi` of a principal eigenfunction.
pub fn write_eigenfunction<W: Write>(
    out: &mut W,
    pair: &EigenPair,
    header: &PlotHeader,
) -> io::Result<()> {
    let h = header.clone().note(format!(
        "lambda1={} potential={}",
        fmt_num(pair.lambda),
        pair.potential
    ));
    let series: Vec<(f64, f64)> = pair
        .x
        .iter()
        .copied()
        .zip(pair.psi.iter().copied())
        .collect();
    write_series(out, &series, [("x", "length"), ("psi", "normalized")], &h)
}

/// `xi phi0 dphi0` of the averaged front over its table range.
pub fn write_homogenized_front<W: Write>(
    out: &mut W,
    front: &HomogenizedFront,
    header: &PlotHeader,
) -> io::Result<()> {
    let mut h = header.clone().note(format!(
        "c0={} a_H={}",
        fmt_num(front.c0),
        fmt_num(front.a_h)
    ));
    h.columns.clear();
    h.column("xi", "length")
        .column("phi0", "state")
        .column("dphi0", "state/length")
        .write(out)?;
    for s in front.samples() {
        row(out, s)?;
    }
    Ok(())
}
