//! The controllable launcher state and its hardware limits.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{check_range, Error, Result};

pub const ACTUATION_RANGE: (f64, f64) = (0.0, 100.0);
pub const AZIMUTH_RANGE_DEG: (f64, f64) = (-15.8, 15.6);
pub const ALTITUDE_RANGE_DEG: (f64, f64) = (6.4, 37.1);
pub const PINCH_RANGE_MM: (f64, f64) = (35.0, 40.0);
/// Upper bound accepted for the feed crank gain.
pub const STROKE_GAIN_MAX: f64 = 100.0;

/// Neutral launch orientation.
pub const DEFAULT_ALTITUDE_DEG: f64 = 19.9;

/// Commanded wheel actuations in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WheelActuation {
    pub bottom: f64,
    pub top_left: f64,
    pub top_right: f64,
}

impl WheelActuation {
    pub fn new(bottom: f64, top_left: f64, top_right: f64) -> Self {
        Self {
            bottom,
            top_left,
            top_right,
        }
    }

    pub fn equal(actuation: f64) -> Self {
        Self::new(actuation, actuation, actuation)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.bottom, self.top_left, self.top_right]
    }

    pub fn is_equal(&self) -> bool {
        self.bottom == self.top_left && self.bottom == self.top_right
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = ACTUATION_RANGE;
        check_range("bottom", self.bottom, lo, hi)?;
        check_range("top_left", self.top_left, lo, hi)?;
        check_range("top_right", self.top_right, lo, hi)
    }
}

/// Motor spin-up delay before the ball is fed, or motors kept running.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RampUp {
    Seconds(f64),
    Continuous,
}

impl RampUp {
    /// Delay between launch initiation and feed start.
    pub fn delay(&self) -> f64 {
        match *self {
            RampUp::Seconds(s) => s,
            RampUp::Continuous => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RampUp::Seconds(s) => check_range("ramp_up_time", s, 0.0, f64::MAX),
            RampUp::Continuous => Ok(()),
        }
    }
}

impl fmt::Display for RampUp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RampUp::Seconds(s) => write!(f, "{s}"),
            RampUp::Continuous => f.write_str("continuous"),
        }
    }
}

impl std::str::FromStr for RampUp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("continuous") {
            return Ok(RampUp::Continuous);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Parse(format!("ramp-up time `{s}`")))?;
        let r = RampUp::Seconds(v);
        r.validate()?;
        Ok(r)
    }
}

impl Serialize for RampUp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            RampUp::Seconds(v) => s.serialize_f64(v),
            RampUp::Continuous => s.serialize_str("continuous"),
        }
    }
}

impl<'de> Deserialize<'de> for RampUp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = RampUp;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("seconds or \"continuous\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<RampUp, E> {
                Ok(RampUp::Seconds(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<RampUp, E> {
                Ok(RampUp::Seconds(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<RampUp, E> {
                Ok(RampUp::Seconds(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<RampUp, E> {
                if v == "continuous" {
                    Ok(RampUp::Continuous)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Full controllable state of the launcher. Always within the hardware
/// limits: constructors and setters reject out-of-range values and leave the
/// state untouched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState")]
pub struct LauncherState {
    #[serde(flatten)]
    wheels: WheelActuation,
    azimuth_deg: f64,
    altitude_deg: f64,
    stroke_gain: f64,
    ramp_up_time: RampUp,
    pinch_diameter_mm: f64,
}

#[derive(Deserialize)]
struct RawState {
    #[serde(flatten)]
    wheels: WheelActuation,
    azimuth_deg: f64,
    altitude_deg: f64,
    stroke_gain: f64,
    ramp_up_time: RampUp,
    pinch_diameter_mm: f64,
}

impl TryFrom<RawState> for LauncherState {
    type Error = Error;

    fn try_from(r: RawState) -> Result<Self> {
        let s = LauncherState {
            wheels: r.wheels,
            azimuth_deg: r.azimuth_deg,
            altitude_deg: r.altitude_deg,
            stroke_gain: r.stroke_gain,
            ramp_up_time: r.ramp_up_time,
            pinch_diameter_mm: r.pinch_diameter_mm,
        };
        s.validate()?;
        Ok(s)
    }
}

impl Default for LauncherState {
    fn default() -> Self {
        Self {
            wheels: WheelActuation::equal(36.0),
            azimuth_deg: 0.0,
            altitude_deg: DEFAULT_ALTITUDE_DEG,
            stroke_gain: 1.0,
            ramp_up_time: RampUp::Continuous,
            pinch_diameter_mm: 37.0,
        }
    }
}

impl LauncherState {
    pub fn new(wheels: WheelActuation, azimuth_deg: f64, altitude_deg: f64) -> Result<Self> {
        let mut s = Self::default();
        s.set_wheels(wheels)?;
        s.set_orientation(azimuth_deg, altitude_deg)?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.wheels.validate()?;
        check_range(
            "azimuth_deg",
            self.azimuth_deg,
            AZIMUTH_RANGE_DEG.0,
            AZIMUTH_RANGE_DEG.1,
        )?;
        check_range(
            "altitude_deg",
            self.altitude_deg,
            ALTITUDE_RANGE_DEG.0,
            ALTITUDE_RANGE_DEG.1,
        )?;
        check_stroke_gain(self.stroke_gain)?;
        self.ramp_up_time.validate()?;
        check_range(
            "pinch_diameter_mm",
            self.pinch_diameter_mm,
            PINCH_RANGE_MM.0,
            PINCH_RANGE_MM.1,
        )
    }

    pub fn wheels(&self) -> WheelActuation {
        self.wheels
    }
    pub fn azimuth_deg(&self) -> f64 {
        self.azimuth_deg
    }
    pub fn altitude_deg(&self) -> f64 {
        self.altitude_deg
    }
    pub fn stroke_gain(&self) -> f64 {
        self.stroke_gain
    }
    pub fn ramp_up_time(&self) -> RampUp {
        self.ramp_up_time
    }
    pub fn pinch_diameter_mm(&self) -> f64 {
        self.pinch_diameter_mm
    }

    pub fn set_wheels(&mut self, wheels: WheelActuation) -> Result<()> {
        wheels.validate()?;
        self.wheels = wheels;
        Ok(())
    }

    pub fn set_orientation(&mut self, azimuth_deg: f64, altitude_deg: f64) -> Result<()> {
        let mut next = *self;
        next.azimuth_deg = azimuth_deg;
        next.altitude_deg = altitude_deg;
        next.validate()?;
        *self = next;
        Ok(())
    }

    pub fn set_stroke_gain(&mut self, gain: f64) -> Result<()> {
        check_stroke_gain(gain)?;
        self.stroke_gain = gain;
        Ok(())
    }

    pub fn set_ramp_up_time(&mut self, ramp: RampUp) -> Result<()> {
        ramp.validate()?;
        self.ramp_up_time = ramp;
        Ok(())
    }

    pub fn set_pinch_diameter_mm(&mut self, d: f64) -> Result<()> {
        check_range("pinch_diameter_mm", d, PINCH_RANGE_MM.0, PINCH_RANGE_MM.1)?;
        self.pinch_diameter_mm = d;
        Ok(())
    }

    pub fn with_wheels(mut self, wheels: WheelActuation) -> Result<Self> {
        self.set_wheels(wheels)?;
        Ok(self)
    }

    pub fn with_orientation(mut self, azimuth_deg: f64, altitude_deg: f64) -> Result<Self> {
        self.set_orientation(azimuth_deg, altitude_deg)?;
        Ok(self)
    }

    pub fn with_stroke_gain(mut self, gain: f64) -> Result<Self> {
        self.set_stroke_gain(gain)?;
        Ok(self)
    }

    pub fn with_ramp_up_time(mut self, ramp: RampUp) -> Result<Self> {
        self.set_ramp_up_time(ramp)?;
        Ok(self)
    }

    pub fn with_pinch_diameter_mm(mut self, d: f64) -> Result<Self> {
        self.set_pinch_diameter_mm(d)?;
        Ok(self)
    }

    /// Clamps arbitrary values into the hardware limits.
    pub fn clamped(wheels: [f64; 3], azimuth_deg: f64, altitude_deg: f64) -> Self {
        let c = |v: f64, (lo, hi): (f64, f64)| if v.is_finite() { v.clamp(lo, hi) } else { lo };
        Self {
            wheels: WheelActuation::new(
                c(wheels[0], ACTUATION_RANGE),
                c(wheels[1], ACTUATION_RANGE),
                c(wheels[2], ACTUATION_RANGE),
            ),
            azimuth_deg: c(azimuth_deg, AZIMUTH_RANGE_DEG),
            altitude_deg: c(altitude_deg, ALTITUDE_RANGE_DEG),
            ..Self::default()
        }
    }
}

fn check_stroke_gain(gain: f64) -> Result<()> {
    if gain.is_finite() && gain > 0.0 && gain <= STROKE_GAIN_MAX {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "stroke_gain",
            value: gain,
            min: 0.0,
            max: STROKE_GAIN_MAX,
        })
    }
}
