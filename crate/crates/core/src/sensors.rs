//! MPU6050-style gyro/accelerometer and HC-SR04-style ultrasonic models.

use core::f64::consts::{FRAC_PI_4, TAU};

use serde::{Deserialize, Serialize};

use crate::dynamics::{Attitude, BodyRates, QuadState};
use crate::geom::Vec3;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GyroModel {
    /// Initial bias per body axis, rad/s.
    pub bias: BodyRates,
    /// Random-walk intensity of the bias, rad/s per sqrt(s).
    pub bias_walk_sigma: f64,
    /// White noise per sample, rad/s.
    pub white_sigma: f64,
}

impl Default for GyroModel {
    fn default() -> Self {
        Self {
            bias: BodyRates::new(0.003, -0.002, 0.001),
            bias_walk_sigma: 0.0002,
            white_sigma: 0.005,
        }
    }
}

impl GyroModel {
    pub fn ideal() -> Self {
        Self {
            bias: BodyRates::ZERO,
            bias_walk_sigma: 0.0,
            white_sigma: 0.0,
        }
    }
}

/// A gyro instance: the model plus its current (walking) bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gyro {
    pub model: GyroModel,
    pub bias: BodyRates,
}

impl Gyro {
    pub fn new(model: GyroModel) -> Self {
        Self {
            model,
            bias: model.bias,
        }
    }

    /// Reads `true_rates + bias + white noise`, then walks the bias by one step.
    pub fn sample(&mut self, true_rates: &BodyRates, rng: &mut RngStream, dt: f64) -> BodyRates {
        let w = self.model.white_sigma;
        let reading = BodyRates {
            x: true_rates.x + self.bias.x + rng.gaussian(w),
            y: true_rates.y + self.bias.y + rng.gaussian(w),
            z: true_rates.z + self.bias.z + rng.gaussian(w),
        };
        let step = self.model.bias_walk_sigma * libm::sqrt(dt);
        self.bias.x += rng.gaussian(step);
        self.bias.y += rng.gaussian(step);
        self.bias.z += rng.gaussian(step);
        reading
    }
}

/// Free-function form of [`Gyro::sample`].
pub fn sample_gyro(
    true_rates: &BodyRates,
    gyro: &mut Gyro,
    rng: &mut RngStream,
    dt: f64,
) -> BodyRates {
    gyro.sample(true_rates, rng, dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AccelModel {
    /// g-units
    pub white_sigma: f64,
    /// g-units, applied on every axis
    pub vibration_amplitude: f64,
    /// Hz
    pub vibration_freq: f64,
    /// Per-sample probability of a spike on one random axis.
    pub spike_probability: f64,
    /// g-units
    pub spike_magnitude: f64,
    /// Include translational acceleration in the reading. Off by default: the
    /// sensor then acts as a pure inclinometer.
    #[serde(default)]
    pub include_translational: bool,
}

impl Default for AccelModel {
    fn default() -> Self {
        Self {
            white_sigma: 0.02,
            vibration_amplitude: 0.15,
            vibration_freq: 47.0,
            spike_probability: 0.01,
            spike_magnitude: 1.0,
            include_translational: false,
        }
    }
}

impl AccelModel {
    pub fn ideal() -> Self {
        Self {
            white_sigma: 0.0,
            vibration_amplitude: 0.0,
            vibration_freq: 0.0,
            spike_probability: 0.0,
            spike_magnitude: 0.0,
            include_translational: false,
        }
    }
}

/// Accelerometer output (A_x, A_y, A_z) in g-units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AccelReading {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl AccelReading {
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
    }
}

/// Noiseless reading for a given world-frame specific force.
///
/// The axes follow the convention in which a static sensor reads
/// `(sin(pitch), -sin(roll)cos(pitch), cos(roll)cos(pitch))`, i.e. the body
/// x and y components of `R^T f / g` with their signs flipped.
pub fn ideal_accel(attitude: &Attitude, specific_force_world: Vec3, gravity: f64) -> AccelReading {
    let f = attitude.rotation().apply_inverse(specific_force_world) * (1.0 / gravity);
    AccelReading {
        x: -f.x,
        y: -f.y,
        z: f.z,
    }
}

/// Vibration phase offsets per axis so the three axes are not identical.
const VIBRATION_PHASE: [f64; 3] = [0.0, TAU / 3.0, 2.0 * TAU / 3.0];

pub fn sample_accel(
    attitude: &Attitude,
    specific_force_world: Vec3,
    gravity: f64,
    model: &AccelModel,
    rng: &mut RngStream,
    sim_time: f64,
) -> AccelReading {
    let force = if model.include_translational {
        specific_force_world
    } else {
        Vec3::UNIT_Z * gravity
    };
    let ideal = ideal_accel(attitude, force, gravity);
    let mut out = [ideal.x, ideal.y, ideal.z];
    let omega = TAU * model.vibration_freq * sim_time;
    for (axis, v) in out.iter_mut().enumerate() {
        *v += rng.gaussian(model.white_sigma)
            + model.vibration_amplitude * libm::sin(omega + VIBRATION_PHASE[axis]);
    }
    if rng.chance(model.spike_probability) {
        let axis = rng.index(3);
        let sign = if rng.chance(0.5) { 1.0 } else { -1.0 };
        out[axis] += sign * model.spike_magnitude;
    }
    AccelReading {
        x: out[0],
        y: out[1],
        z: out[2],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UltrasonicModel {
    /// m/s
    pub sound_speed: f64,
    /// Echo-time noise, s.
    pub noise_sigma: f64,
    /// m
    pub max_range: f64,
}

impl Default for UltrasonicModel {
    fn default() -> Self {
        Self {
            sound_speed: 343.0,
            noise_sigma: 5e-6,
            max_range: 4.0,
        }
    }
}

impl UltrasonicModel {
    pub fn ideal() -> Self {
        Self {
            noise_sigma: 0.0,
            ..Self::default()
        }
    }

    /// Inverts a noiseless echo back to vertical altitude for the given tilt.
    pub fn altitude_from_echo(&self, echo_time: f64, attitude: &Attitude) -> f64 {
        echo_time * self.sound_speed * libm::cos(attitude.pitch) * libm::cos(attitude.roll) / 2.0
    }
}

/// Tilt beyond which the echo is lost.
pub const ULTRASONIC_MAX_TILT: f64 = FRAC_PI_4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Echo {
    /// Round-trip time, s.
    Time(f64),
    OutOfRange,
}

impl Echo {
    pub fn time(self) -> Option<f64> {
        match self {
            Echo::Time(t) => Some(t),
            Echo::OutOfRange => None,
        }
    }
}

pub fn sample_ultrasonic(state: &QuadState, model: &UltrasonicModel, rng: &mut RngStream) -> Echo {
    let noise = rng.gaussian(model.noise_sigma);
    let att = &state.attitude;
    if att.pitch.abs() > ULTRASONIC_MAX_TILT || att.roll.abs() > ULTRASONIC_MAX_TILT {
        return Echo::OutOfRange;
    }
    let slant = state.position.z / (libm::cos(att.pitch) * libm::cos(att.roll));
    if slant > model.max_range {
        return Echo::OutOfRange;
    }
    Echo::Time((2.0 * slant / model.sound_speed + noise).max(0.0))
}

/// One tick's sensor outputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorReadings {
    pub gyro: BodyRates,
    pub accel: AccelReading,
    pub echo: Echo,
}
