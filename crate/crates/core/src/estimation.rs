//! Roll/pitch estimation: accelerometer inclination, disturbance gating and
//! the complementary filter.

use serde::{Deserialize, Serialize};

use crate::dynamics::{euler_rates, Attitude, BodyRates};
use crate::error::{Error, Result};
use crate::geom::wrap_angle;
use crate::sensors::AccelReading;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    /// Weight of the gyro path, in (0, 1).
    pub alpha: f64,
    /// Smallest accepted |a|, g-units.
    pub accel_gate_low: f64,
    /// Largest accepted |a|, g-units.
    pub accel_gate_high: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            alpha: 0.98,
            accel_gate_low: 0.5,
            accel_gate_high: 1.5,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(
                "filter.alpha must lie in (0, 1)".into(),
            ));
        }
        if !(self.accel_gate_low > 0.0 && self.accel_gate_low < 1.0 && self.accel_gate_high > 1.0) {
            return Err(Error::InvalidConfig(
                "filter gates must satisfy 0 < accel_gate_low < 1 < accel_gate_high".into(),
            ));
        }
        Ok(())
    }
}

/// Inclination recovered from one accelerometer sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AccelAngles {
    pub roll: f64,
    pub pitch: f64,
    /// An arcsin argument fell outside [-1, 1] and was clamped.
    pub clamped: bool,
    /// cos(pitch) vanished, roll is unobservable and reported as 0.
    pub degenerate: bool,
}

/// pitch = asin(A_x), roll = asin(-A_y / cos(pitch)), with clamping.
pub fn accel_angles(a: &AccelReading) -> AccelAngles {
    let mut clamped = false;
    let mut clamp_unit = |v: f64| {
        if !(-1.0..=1.0).contains(&v) {
            clamped = true;
        }
        v.clamp(-1.0, 1.0)
    };
    let pitch = libm::asin(clamp_unit(a.x));
    let c = libm::cos(pitch);
    if c.abs() < 1e-9 {
        return AccelAngles {
            roll: 0.0,
            pitch,
            clamped,
            degenerate: true,
        };
    }
    let roll = libm::asin(clamp_unit(-a.y / c));
    AccelAngles {
        roll,
        pitch,
        clamped,
        degenerate: false,
    }
}

/// Accepts the sample iff its magnitude lies inside the gate.
pub fn disturbance_gate(a: &AccelReading, config: &FilterConfig) -> bool {
    let n = a.norm();
    config.accel_gate_low <= n && n <= config.accel_gate_high
}

/// One axis of the complementary filter.
///
/// Accepted: `alpha * (angle + rate * dt) + (1 - alpha) * accel_angle`.
/// Rejected: gyro-only propagation.
pub fn complementary_blend(
    angle: f64,
    gyro_rate: f64,
    accel_angle: f64,
    accepted: bool,
    alpha: f64,
    dt: f64,
) -> f64 {
    let predicted = angle + gyro_rate * dt;
    if accepted {
        alpha * predicted + (1.0 - alpha) * accel_angle
    } else {
        predicted
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FilterState {
    pub roll: f64,
    pub pitch: f64,
    pub last_accel_accepted: bool,
}

/// Updates both filtered axes. Roll integrates gyro x, pitch integrates gyro y.
pub fn complementary_update(
    state: &FilterState,
    gyro: &BodyRates,
    accel: &AccelAngles,
    accepted: bool,
    config: &FilterConfig,
    dt: f64,
) -> FilterState {
    FilterState {
        roll: complementary_blend(state.roll, gyro.x, accel.roll, accepted, config.alpha, dt),
        pitch: complementary_blend(state.pitch, gyro.y, accel.pitch, accepted, config.alpha, dt),
        last_accel_accepted: accepted,
    }
}

/// Full onboard attitude estimate plus the diagnostic signals plotted against
/// it (raw accelerometer angles and open-loop gyro integration).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AttitudeEstimator {
    pub filter: FilterState,
    /// Yaw from integrated gyro; the accelerometer cannot observe it.
    pub yaw: f64,
    pub gyro_only_roll: f64,
    pub gyro_only_pitch: f64,
    pub last_accel: AccelAngles,
}

impl AttitudeEstimator {
    pub fn new(initial: &Attitude) -> Self {
        Self {
            filter: FilterState {
                roll: initial.roll,
                pitch: initial.pitch,
                last_accel_accepted: true,
            },
            yaw: initial.yaw,
            gyro_only_roll: initial.roll,
            gyro_only_pitch: initial.pitch,
            last_accel: AccelAngles {
                roll: initial.roll,
                pitch: initial.pitch,
                ..Default::default()
            },
        }
    }

    pub fn update(
        &mut self,
        gyro: &BodyRates,
        accel: &AccelReading,
        config: &FilterConfig,
        dt: f64,
    ) -> Result<()> {
        let angles = accel_angles(accel);
        let accepted = disturbance_gate(accel, config) && !angles.degenerate;
        let yaw_rate = euler_rates(&self.attitude(), gyro)?.yaw;
        self.filter = complementary_update(&self.filter, gyro, &angles, accepted, config, dt);
        self.yaw = wrap_angle(self.yaw + yaw_rate * dt);
        self.gyro_only_roll += gyro.x * dt;
        self.gyro_only_pitch += gyro.y * dt;
        self.last_accel = angles;
        Ok(())
    }

    pub fn attitude(&self) -> Attitude {
        Attitude {
            yaw: self.yaw,
            pitch: self.filter.pitch,
            roll: self.filter.roll,
        }
    }
}
