use nalgebra::{Rotation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::lab::trajectory::BallSample;
use crate::Vec3;

/// Raw tracking-system sample: nanosecond timestamp and camera-frame
/// position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawSample {
    pub t_ns: i64,
    pub position: [f64; 3],
}

/// Rigid transform from the tracking frame to the table frame:
/// `p_table = rotation · p_raw + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vec3,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: UnitQuaternion::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn from_translation(t: Vec3) -> Self {
        Self {
            translation: t,
            ..Self::identity()
        }
    }

    /// Rotation by roll, pitch and yaw (degrees, applied x, y, z) then
    /// translation.
    pub fn from_euler_deg(roll: f64, pitch: f64, yaw: f64, translation: Vec3) -> Self {
        let r = Rotation3::from_euler_angles(roll.to_radians(), pitch.to_radians(), yaw.to_radians());
        Self {
            rotation: UnitQuaternion::from_rotation_matrix(&r),
            translation,
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }
}

/// Converts raw samples to table-frame samples with times in seconds.
pub fn transform_to_table_frame(raw: &[RawSample], pose: &Pose) -> Vec<BallSample> {
    raw.iter()
        .map(|r| {
            let secs = r.t_ns.div_euclid(1_000_000_000) as f64;
            let frac = r.t_ns.rem_euclid(1_000_000_000) as f64 * 1e-9;
            BallSample::new(secs + frac, pose.apply(&Vec3::from(r.position)))
        })
        .collect()
}
