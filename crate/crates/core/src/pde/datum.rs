use serde::{Deserialize, Serialize};

use super::{Field, Grid1D};

/// Shape of a monotone front-like initial datum (1 on the left, 0 on the right).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "style", rename_all = "lowercase")]
pub enum DatumStyle {
    /// Linear transition over four grid steps.
    Step,
    /// Linear transition of the given width (at least four grid steps).
    Ramp { width: f64 },
    /// `(1 - tanh((x - x0) / width)) / 2`.
    Tanh { width: f64 },
}

pub fn front_initial_datum(grid: &Grid1D, style: DatumStyle, interface: f64) -> Field {
    let h = grid.h;
    let ramp = |width: f64, x: f64| (0.5 - (x - interface) / width).clamp(0.0, 1.0);
    let mut values: Vec<f64> = (0..grid.n)
        .map(|i| {
            let x = grid.x(i);
            match style {
                DatumStyle::Step => ramp(4.0 * h, x),
                DatumStyle::Ramp { width } => ramp(width.max(4.0 * h), x),
                DatumStyle::Tanh { width } => 0.5 * (1.0 - ((x - interface) / width.max(h)).tanh()),
            }
        })
        .collect();
    values[0] = 1.0;
    let last = grid.n - 1;
    values[last] = 0.0;
    Field { values, t: 0.0 }
}
