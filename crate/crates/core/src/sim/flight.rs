//! Ball flight under gravity, quadratic drag and Magnus lift, with one
//! rebound on the table surface.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lab::TableRegion;
use crate::sim::config::SimConfig;
use crate::sim::launch::LaunchOutcome;
use crate::Vec3;

/// Flights are abandoned after this long without leaving the region (s).
const MAX_FLIGHT_TIME: f64 = 5.0;
/// Horizontal distance beyond the table where the flight is abandoned (m).
const REGION_MARGIN: f64 = 3.0;
/// Bisection iterations for the contact time.
const CONTACT_BISECTIONS: usize = 60;

/// Ball state at one integration instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightSample {
    pub t: f64,
    pub position: Vec3,
    pub velocity: Vec3,
}

/// First table contact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub t: f64,
    /// Ball center at contact (m); `z` equals table height plus ball radius.
    pub position: Vec3,
    pub velocity_in: Vec3,
    pub velocity_out: Vec3,
}

/// Integrated ground-truth flight. Time 0 is the release from the tube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flight {
    /// Integration states; the contact instant appears twice, with the
    /// incoming and the outgoing velocity.
    pub samples: Vec<FlightSample>,
    pub contact: Option<Contact>,
    /// Spin during flight (rev/s).
    pub omega: Vec3,
}

impl Flight {
    pub fn start_time(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.t)
    }

    pub fn end_time(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    /// Position at time `t` by cubic Hermite interpolation between the
    /// bracketing integration states. `None` outside the flight.
    pub fn position_at(&self, t: f64) -> Option<Vec3> {
        let s = &self.samples;
        if s.is_empty() || !(t >= s[0].t) || t > s[s.len() - 1].t {
            return None;
        }
        let i = s.partition_point(|x| x.t <= t).saturating_sub(1);
        if i + 1 >= s.len() {
            return Some(s[i].position);
        }
        let (a, b) = (&s[i], &s[i + 1]);
        let h = b.t - a.t;
        if h <= 0.0 {
            return Some(a.position);
        }
        let u = (t - a.t) / h;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        Some(
            a.position * h00 + a.velocity * (h10 * h) + b.position * h01 + b.velocity * (h11 * h),
        )
    }

    /// First time the ball center descends through height `z`.
    pub fn first_descent_through(&self, z: f64) -> Option<f64> {
        let s = &self.samples;
        let k = s
            .windows(2)
            .position(|w| w[0].position.z >= z && w[1].position.z < z)?;
        let (mut lo, mut hi) = (s[k].t, s[k + 1].t);
        for _ in 0..CONTACT_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if self.position_at(mid)?.z >= z {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// Samples up to and including the incoming contact state.
    pub fn pre_contact(&self) -> &[FlightSample] {
        match self.contact {
            Some(c) => {
                let n = self.samples.partition_point(|s| s.t < c.t) + 1;
                &self.samples[..n.min(self.samples.len())]
            }
            None => &self.samples,
        }
    }
}

/// Aerodynamic and contact constants derived from a [`SimConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct FlightModel {
    /// Drag acceleration per squared speed (1/m).
    pub k_drag: f64,
    /// Magnus acceleration per (rad/s · m/s) (dimensionless).
    pub k_magnus: f64,
    pub gravity: f64,
    pub restitution_z: f64,
    pub tangential_retention: f64,
    pub ball_radius: f64,
    pub table: TableRegion,
    pub dt: f64,
    pub post_contact: f64,
}

impl FlightModel {
    pub fn from_config(cfg: &SimConfig) -> Self {
        let area = PI * cfg.ball_radius * cfg.ball_radius;
        Self {
            k_drag: 0.5 * cfg.air_density * cfg.drag_coefficient * area / cfg.ball_mass,
            k_magnus: cfg.magnus_coefficient * cfg.air_density * area * cfg.ball_radius
                / cfg.ball_mass,
            gravity: cfg.gravity,
            restitution_z: cfg.restitution_z,
            tangential_retention: cfg.tangential_retention,
            ball_radius: cfg.ball_radius,
            table: cfg.table.clone(),
            dt: cfg.integration_step,
            post_contact: cfg.post_contact_duration,
        }
    }

    /// Height of the ball center when touching the table.
    pub fn contact_height(&self) -> f64 {
        self.table.height + self.ball_radius
    }

    fn acceleration(&self, v: &Vec3, omega_rad: &Vec3) -> Vec3 {
        Vec3::new(0.0, 0.0, -self.gravity) - v * (self.k_drag * v.norm())
            + omega_rad.cross(v) * self.k_magnus
    }

    fn rk4(&self, p: &Vec3, v: &Vec3, w: &Vec3, h: f64) -> (Vec3, Vec3) {
        let a1 = self.acceleration(v, w);
        let v1 = *v;
        let v2 = v + a1 * (h / 2.0);
        let a2 = self.acceleration(&v2, w);
        let v3 = v + a2 * (h / 2.0);
        let a3 = self.acceleration(&v3, w);
        let v4 = v + a3 * h;
        let a4 = self.acceleration(&v4, w);
        let p_next = p + (v1 + v2 * 2.0 + v3 * 2.0 + v4) * (h / 6.0);
        let v_next = v + (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h / 6.0);
        (p_next, v_next)
    }

    fn over_table(&self, p: &Vec3) -> bool {
        p.x >= 0.0 && p.x <= self.table.length && p.y.abs() <= self.table.width / 2.0
    }

    fn out_of_region(&self, p: &Vec3) -> bool {
        p.z < 0.0
            || p.x < -REGION_MARGIN
            || p.x > self.table.length + REGION_MARGIN
            || p.y.abs() > self.table.width / 2.0 + REGION_MARGIN
    }

    /// Integrates from `p0`, `v0` with spin `omega` (rev/s) starting at `t0`.
    pub fn integrate(&self, t0: f64, p0: Vec3, v0: Vec3, omega: Vec3) -> Result<Flight> {
        let w = omega * (2.0 * PI);
        let zc = self.contact_height();
        let mut samples = vec![FlightSample {
            t: t0,
            position: p0,
            velocity: v0,
        }];
        let mut contact: Option<Contact> = None;
        let (mut t, mut p, mut v) = (t0, p0, v0);
        loop {
            let (p1, v1) = self.rk4(&p, &v, &w, self.dt);
            let t1 = t + self.dt;
            if !(p1.iter().chain(v1.iter()).all(|x| x.is_finite())) {
                return Err(Error::NonFinite { t: t1 });
            }
            if contact.is_none() && p.z >= zc && p1.z < zc {
                let (mut lo, mut hi) = (0.0, self.dt);
                for _ in 0..CONTACT_BISECTIONS {
                    let mid = 0.5 * (lo + hi);
                    if self.rk4(&p, &v, &w, mid).0.z >= zc {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let h = 0.5 * (lo + hi);
                let (mut pc, vc) = self.rk4(&p, &v, &w, h);
                if self.over_table(&pc) {
                    pc.z = zc;
                    let vout = Vec3::new(
                        vc.x * self.tangential_retention,
                        vc.y * self.tangential_retention,
                        -vc.z * self.restitution_z,
                    );
                    let tc = t + h;
                    contact = Some(Contact {
                        t: tc,
                        position: pc,
                        velocity_in: vc,
                        velocity_out: vout,
                    });
                    samples.push(FlightSample {
                        t: tc,
                        position: pc,
                        velocity: vc,
                    });
                    samples.push(FlightSample {
                        t: tc,
                        position: pc,
                        velocity: vout,
                    });
                    (t, p, v) = (tc, pc, vout);
                    continue;
                }
            }
            if p1.z < zc && (contact.is_some() || self.over_table(&p1)) {
                // a second bounce is not modeled, and a ball entering the
                // table area below its surface has hit the table side
                break;
            }
            samples.push(FlightSample {
                t: t1,
                position: p1,
                velocity: v1,
            });
            (t, p, v) = (t1, p1, v1);
            let done_after_contact = contact.is_some_and(|c| t1 >= c.t + self.post_contact);
            if done_after_contact || self.out_of_region(&p1) || t1 - t0 > MAX_FLIGHT_TIME {
                break;
            }
        }
        Ok(Flight {
            samples,
            contact,
            omega,
        })
    }
}

/// Integrates the flight of a launched ball. Time 0 is the release.
pub fn simulate_flight(outcome: &LaunchOutcome, cfg: &SimConfig) -> Result<Flight> {
    FlightModel::from_config(cfg).integrate(
        0.0,
        outcome.release_position,
        outcome.v0,
        outcome.omega0,
    )
}
