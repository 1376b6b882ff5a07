use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Playing surface and the relaxed region around it used by the filters.
/// The frame origin is the center of the launcher-side table edge; `x` runs
/// along the long edge and `z` is measured from the floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TableRegion {
    /// m
    pub length: f64,
    /// m
    pub width: f64,
    /// Surface height above the floor (m).
    pub height: f64,
    /// Relaxation along x (m).
    pub margin_x: f64,
    /// Relaxation along y (m).
    pub margin_y: f64,
}

impl Default for TableRegion {
    fn default() -> Self {
        Self {
            length: 2.74,
            width: 1.525,
            height: 0.76,
            margin_x: 0.5,
            margin_y: 0.5,
        }
    }
}

impl TableRegion {
    pub fn validate(&self) -> Result<()> {
        for (what, v) in [
            ("table.length", self.length),
            ("table.width", self.width),
            ("table.height", self.height),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::OutOfRange {
                    what,
                    value: v,
                    min: 0.0,
                    max: f64::INFINITY,
                });
            }
        }
        for (what, v) in [("table.margin_x", self.margin_x), ("table.margin_y", self.margin_y)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::OutOfRange {
                    what,
                    value: v,
                    min: 0.0,
                    max: f64::INFINITY,
                });
            }
        }
        Ok(())
    }

    /// Point on the playing surface itself, edges included.
    pub fn on_table(&self, x: f64, y: f64) -> bool {
        (0.0..=self.length).contains(&x) && y.abs() <= self.width / 2.0
    }

    /// Point inside the relaxed region `|x| ≤ length + Δx`, `|y| ≤ width/2 + Δy`.
    pub fn in_relaxed(&self, x: f64, y: f64) -> bool {
        x.abs() <= self.length + self.margin_x && y.abs() <= self.width / 2.0 + self.margin_y
    }
}
