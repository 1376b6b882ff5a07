//! Measured motor characteristic curves (actuation in percent to turning
//! speed in rev/min) and the per-wheel compensation built on top of them.

use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};

/// Piecewise-linear map from ESC actuation (percent) to motor speed (rev/min).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotorCurve {
    motor_id: String,
    points: Vec<(f64, f64)>,
}

impl MotorCurve {
    /// Builds a curve from `(actuation, speed)` knots.
    ///
    /// Knots must start at `(0, 0)`, be strictly increasing in actuation,
    /// non-decreasing in speed and stay inside `[0, 100]` percent.
    pub fn new(motor_id: impl Into<String>, points: Vec<(f64, f64)>) -> Result<Self> {
        let motor_id = motor_id.into();
        let invalid = |reason: &str| Error::InvalidCurve {
            id: motor_id.clone(),
            reason: reason.to_string(),
        };
        if points.len() < 2 {
            return Err(invalid("needs at least two knots"));
        }
        if points[0] != (0.0, 0.0) {
            return Err(invalid("first knot must be (0, 0)"));
        }
        for &(a, s) in &points {
            if !a.is_finite() || !s.is_finite() || !(0.0..=100.0).contains(&a) || s < 0.0 {
                return Err(invalid("knot outside actuation [0, 100] or negative speed"));
            }
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(invalid("actuation must be strictly increasing"));
            }
            if w[1].1 < w[0].1 {
                return Err(invalid("speed must be non-decreasing"));
            }
        }
        Ok(Self { motor_id, points })
    }

    pub fn motor_id(&self) -> &str {
        &self.motor_id
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn max_actuation(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    pub fn max_speed(&self) -> f64 {
        self.points[self.points.len() - 1].1
    }

    /// Speed at `actuation`, linearly interpolated between knots and exact at
    /// every knot. Actuations beyond the last knot (but within 100 %) hold the
    /// last speed.
    pub fn speed_at(&self, actuation: f64) -> Result<f64> {
        check_range("actuation", actuation, 0.0, 100.0)?;
        Ok(self.speed_unchecked(actuation))
    }

    fn speed_unchecked(&self, actuation: f64) -> f64 {
        let pts = &self.points;
        let idx = pts.partition_point(|&(a, _)| a <= actuation);
        // idx >= 1 because the first knot is at 0 and actuation >= 0
        let (a0, s0) = pts[idx - 1];
        if a0 == actuation || idx == pts.len() {
            return s0;
        }
        let (a1, s1) = pts[idx];
        s0 + (s1 - s0) * ((actuation - a0) / (a1 - a0))
    }

    /// Smallest actuation reaching `speed`. Saturates at the curve limits.
    pub fn actuation_for(&self, speed: f64) -> f64 {
        if speed <= 0.0 {
            return 0.0;
        }
        for w in self.points.windows(2) {
            let ((a0, s0), (a1, s1)) = (w[0], w[1]);
            if s1 >= speed && s1 > s0 {
                if speed <= s0 {
                    return a0;
                }
                return a0 + (speed - s0) / (s1 - s0) * (a1 - a0);
            }
        }
        self.max_actuation()
    }
}

/// Free-function form of [`MotorCurve::speed_at`].
pub fn interpolate_motor_speed(curve: &MotorCurve, actuation: f64) -> Result<f64> {
    curve.speed_at(actuation)
}

/// Wheel position on the launch unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wheel {
    Bottom,
    TopLeft,
    TopRight,
}

impl Wheel {
    pub const ALL: [Wheel; 3] = [Wheel::Bottom, Wheel::TopLeft, Wheel::TopRight];
}

/// Built-in motor families with tabulated curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotorModel {
    #[default]
    Mn5008,
    Mn4004,
}

/// The three motors of the launch unit plus the compensation reference.
///
/// Equal commanded actuations are meant to give equal wheel speeds, so the
/// commanded percentage is read through a common reference curve (the
/// knot-wise minimum of the three motors, reachable by every motor) and each
/// motor's own curve is only used to translate that target into its ESC
/// signal.
#[derive(Debug, Clone, PartialEq)]
pub struct MotorSet {
    name: String,
    curves: [MotorCurve; 3],
    reference: MotorCurve,
}

impl MotorSet {
    pub fn new(
        name: impl Into<String>,
        bottom: MotorCurve,
        top_left: MotorCurve,
        top_right: MotorCurve,
    ) -> Result<Self> {
        let name = name.into();
        let curves = [bottom, top_left, top_right];
        let mut knots: Vec<f64> = curves
            .iter()
            .flat_map(|c| c.points.iter().map(|p| p.0))
            .collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let points = knots
            .into_iter()
            .map(|a| {
                let s = curves
                    .iter()
                    .map(|c| c.speed_unchecked(a))
                    .fold(f64::INFINITY, f64::min);
                (a, s)
            })
            .collect();
        let reference = MotorCurve::new(format!("{name}-reference"), points)?;
        if reference.max_speed() <= 0.0 {
            return Err(Error::InvalidCurve {
                id: name,
                reason: "all speeds are zero".into(),
            });
        }
        Ok(Self {
            name,
            curves,
            reference,
        })
    }

    pub fn builtin(model: MotorModel) -> Self {
        let (name, b, tl, tr) = match model {
            MotorModel::Mn5008 => ("MN5008", MN5008_BOTTOM, MN5008_TOP_LEFT, MN5008_TOP_RIGHT),
            MotorModel::Mn4004 => ("MN4004", MN4004_BOTTOM, MN4004_TOP_LEFT, MN4004_TOP_RIGHT),
        };
        let curve = |suffix: &str, speeds: &[f64; 21]| {
            MotorCurve::new(format!("{name}-{suffix}"), tabulated(speeds))
                .expect("embedded curves are valid")
        };
        Self::new(
            name,
            curve("bottom", &b),
            curve("top-left", &tl),
            curve("top-right", &tr),
        )
        .expect("embedded curves are valid")
    }

    /// Loads a set from a curve CSV; curve ids must mention `bottom`, `left`
    /// and `right`.
    pub fn from_csv_file(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let curves = read_curves_csv(std::io::BufReader::new(file))?;
        let pick = |key: &str| {
            curves
                .iter()
                .find(|c| c.motor_id.to_ascii_lowercase().contains(key))
                .cloned()
                .ok_or_else(|| Error::Parse(format!("no curve with `{key}` in its id")))
        };
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "custom".into());
        Self::new(name, pick("bottom")?, pick("left")?, pick("right")?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn curve(&self, wheel: Wheel) -> &MotorCurve {
        &self.curves[wheel as usize]
    }

    pub fn curves(&self) -> &[MotorCurve; 3] {
        &self.curves
    }

    pub fn reference(&self) -> &MotorCurve {
        &self.reference
    }

    /// Compensated target speed (rev/min) for a commanded actuation.
    pub fn target_speed(&self, actuation: f64) -> Result<f64> {
        self.reference.speed_at(actuation)
    }

    /// Speed actually produced by `wheel` when its ESC signal, computed to
    /// hit `target`, is disturbed by `esc_offset` percent.
    pub fn perturbed_speed(&self, wheel: Wheel, target: f64, esc_offset: f64) -> f64 {
        let curve = self.curve(wheel);
        let signal = (curve.actuation_for(target) + esc_offset).clamp(0.0, 100.0);
        curve.speed_unchecked(signal)
    }
}

/// Reads curves from CSV text. A line that is not an `actuation,speed` pair
/// starts a new curve and names it; an `actuation,speed` column header is
/// skipped.
pub fn read_curves_csv<R: BufRead>(reader: R) -> Result<Vec<MotorCurve>> {
    let mut blocks: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        let pair = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(s), None) => a.parse::<f64>().ok().zip(s.parse::<f64>().ok()),
            _ => None,
        };
        match pair {
            Some(p) => match blocks.last_mut() {
                Some(block) => block.1.push(p),
                None => {
                    return Err(Error::Parse(format!(
                        "line {}: data before any motor_id header",
                        lineno + 1
                    )))
                }
            },
            None if line.eq_ignore_ascii_case("actuation,speed") => {}
            None => {
                let id = line.strip_prefix("motor_id,").unwrap_or(line).to_string();
                blocks.push((id, Vec::new()));
            }
        }
    }
    blocks
        .into_iter()
        .map(|(id, pts)| MotorCurve::new(id, pts))
        .collect()
}

pub fn write_curves_csv<W: std::io::Write>(mut out: W, curves: &[MotorCurve]) -> Result<()> {
    for c in curves {
        writeln!(out, "{}", c.motor_id)?;
        for (a, s) in &c.points {
            writeln!(out, "{a},{s}")?;
        }
    }
    Ok(())
}

fn tabulated(speeds: &[f64; 21]) -> Vec<(f64, f64)> {
    speeds
        .iter()
        .enumerate()
        .map(|(i, &s)| (5.0 * i as f64, s))
        .collect()
}

// Measured characteristic curves, one knot every 5 % actuation from 0 to 100.
const MN5008_BOTTOM: [f64; 21] = [
    0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 524.0, 1291.0, 1900.0, 2369.0, 2722.0, 2977.0, 3184.0, 3331.0,
    3435.0, 3529.0, 3613.0, 3681.0, 3933.0, 3957.0, 3960.0,
];
const MN5008_TOP_RIGHT: [f64; 21] = [
    0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 470.0, 1250.0, 1828.0, 2325.0, 2667.0, 2939.0, 3149.0, 3299.0,
    3418.0, 3509.0, 3600.0, 3678.0, 3937.0, 3961.0, 3963.0,
];
const MN5008_TOP_LEFT: [f64; 21] = [
    0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 489.0, 1278.0, 1865.0, 2354.0, 2694.0, 2959.0, 3170.0, 3321.0,
    3434.0, 3524.0, 3615.0, 3688.0, 3931.0, 3968.0, 3970.0,
];
const MN4004_BOTTOM: [f64; 21] = [
    0.0, 0.0, 0.0, 0.0, 183.0, 603.0, 1260.0, 1780.0, 2275.0, 2665.0, 3043.0, 3305.0, 3527.0,
    3706.0, 3865.0, 4046.0, 4210.0, 4484.0, 4763.0, 4962.0, 4964.0,
];
const MN4004_TOP_RIGHT: [f64; 21] = [
    0.0, 0.0, 0.0, 0.0, 0.0, 253.0, 963.0, 1460.0, 1952.0, 2346.0, 2724.0, 2984.0, 3235.0, 3429.0,
    3587.0, 3744.0, 3871.0, 3977.0, 4115.0, 4385.0, 4597.0,
];
const MN4004_TOP_LEFT: [f64; 21] = [
    0.0, 0.0, 0.0, 0.0, 200.0, 747.0, 1430.0, 1892.0, 2373.0, 2669.0, 3018.0, 3238.0, 3440.0,
    3601.0, 3781.0, 3870.0, 3950.0, 4170.0, 4437.0, 4615.0, 4616.0,
];

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bottom() -> MotorCurve {
        MotorSet::builtin(MotorModel::Mn5008)
            .curve(Wheel::Bottom)
            .clone()
    }

    #[test]
    fn knots_from_measurements() {
        let c = bottom();
        assert_eq!(c.speed_at(30.0).unwrap(), 524.0);
        assert_eq!(c.speed_at(0.0).unwrap(), 0.0);
        assert_eq!(c.speed_at(100.0).unwrap(), 3960.0);
    }

    #[test]
    fn midpoint_between_knots() {
        // halfway between (30, 524) and (35, 1291)
        assert_eq!(c_at(32.5), 524.0 + (1291.0 - 524.0) / 2.0);
        assert_eq!(c_at(32.5), 907.5);
    }

    fn c_at(a: f64) -> f64 {
        bottom().speed_at(a).unwrap()
    }

    #[test]
    fn out_of_range_actuation_is_rejected() {
        assert!(matches!(
            bottom().speed_at(100.5),
            Err(Error::OutOfRange { .. })
        ));
        assert!(bottom().speed_at(-1.0).is_err());
        assert!(bottom().speed_at(f64::NAN).is_err());
    }

    #[test]
    fn invalid_curves_are_rejected() {
        assert!(MotorCurve::new("x", vec![(0.0, 0.0)]).is_err());
        assert!(MotorCurve::new("x", vec![(0.0, 1.0), (10.0, 2.0)]).is_err());
        assert!(MotorCurve::new("x", vec![(0.0, 0.0), (10.0, 5.0), (10.0, 6.0)]).is_err());
        assert!(MotorCurve::new("x", vec![(0.0, 0.0), (10.0, 5.0), (20.0, 4.0)]).is_err());
        assert!(MotorCurve::new("x", vec![(0.0, 0.0), (110.0, 5.0)]).is_err());
    }

    #[test]
    fn all_zero_set_is_degenerate() {
        let z = MotorCurve::new("z", vec![(0.0, 0.0), (100.0, 0.0)]).unwrap();
        assert!(MotorSet::new("zero", z.clone(), z.clone(), z).is_err());
    }

    #[test]
    fn reference_is_knotwise_minimum() {
        let set = MotorSet::builtin(MotorModel::Mn5008);
        assert_eq!(set.reference().speed_at(100.0).unwrap(), 3960.0);
        assert_eq!(set.reference().speed_at(30.0).unwrap(), 470.0);
        for &(a, s) in set.reference().points() {
            for c in set.curves() {
                assert!(s <= c.speed_at(a).unwrap());
            }
        }
    }

    #[test]
    fn inverse_recovers_actuation() {
        let c = bottom();
        assert_eq!(c.actuation_for(0.0), 0.0);
        assert!((c.actuation_for(907.5) - 32.5).abs() < 1e-12);
        assert_eq!(c.actuation_for(1e6), 100.0);
    }

    #[test]
    fn csv_roundtrip() {
        let set = MotorSet::builtin(MotorModel::Mn4004);
        let mut buf = Vec::new();
        write_curves_csv(&mut buf, set.curves()).unwrap();
        let back = read_curves_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back.as_slice(), set.curves().as_slice());
    }

    #[test]
    fn csv_accepts_headers() {
        let text = "motor_id,wheel-bottom\nactuation,speed\n0,0\n50,100\n100,200\n";
        let curves = read_curves_csv(std::io::Cursor::new(text)).unwrap();
        assert_eq!(curves[0].motor_id(), "wheel-bottom");
        assert_eq!(curves[0].speed_at(75.0).unwrap(), 150.0);
        assert!(read_curves_csv(std::io::Cursor::new("0,0\n")).is_err());
    }

    proptest! {
        #[test]
        fn interpolation_is_monotone(a in 0.0f64..=100.0, b in 0.0f64..=100.0) {
            for model in [MotorModel::Mn5008, MotorModel::Mn4004] {
                let set = MotorSet::builtin(model);
                for c in set.curves().iter().chain(std::iter::once(set.reference())) {
                    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                    prop_assert!(c.speed_at(lo).unwrap() <= c.speed_at(hi).unwrap());
                }
            }
        }

        #[test]
        fn inverse_then_forward_is_identity(s in 1.0f64..3960.0) {
            let c = bottom();
            let back = c.speed_at(c.actuation_for(s)).unwrap();
            prop_assert!((back - s).abs() < 1e-9);
        }
    }
}
