//! Quadcopter truth model.
//!
//! Rotational kinematics use the Z-Y-X body-rate to Euler-rate transform.
//! The plant is deliberately small: point-mass translation under collective
//! thrust, and a first-order torque response per axis with linear damping.

use serde::{Deserialize, Serialize};

use crate::control::MotorCommands;
use crate::error::{Error, Result};
use crate::geom::{wrap_angle, Rotation, Vec3};
use crate::sim::SimConfig;

/// Below this |cos(pitch)| the Euler-rate transform is treated as singular.
pub const GIMBAL_TOLERANCE: f64 = 1e-6;

/// Pitch saturation bound used by [`integrate_attitude`].
pub const PITCH_LIMIT: f64 = core::f64::consts::FRAC_PI_2 - 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Attitude {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl Attitude {
    pub const LEVEL: Attitude = Attitude {
        yaw: 0.0,
        pitch: 0.0,
        roll: 0.0,
    };

    pub fn new(yaw: f64, pitch: f64, roll: f64) -> Self {
        Self { yaw, pitch, roll }
    }

    pub fn rotation(&self) -> Rotation {
        Rotation::from_euler(self.yaw, self.pitch, self.roll)
    }

    pub fn is_finite(&self) -> bool {
        self.yaw.is_finite() && self.pitch.is_finite() && self.roll.is_finite()
    }
}

/// Angular velocity about the body axes, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyRates {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BodyRates {
    pub const ZERO: BodyRates = BodyRates {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Time derivatives of the Euler angles, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerRates {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantParams {
    /// kg
    pub mass: f64,
    /// Thrust with all four motors at full command, N.
    pub max_total_thrust: f64,
    /// Angular acceleration per unit differential command, rad/s^2,
    /// ordered (roll, pitch, yaw).
    pub torque_gain: [f64; 3],
    /// Linear rotational damping, 1/s.
    pub rotational_damping: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            mass: 1.2,
            max_total_thrust: 26.0,
            torque_gain: [40.0, 40.0, 10.0],
            rotational_damping: 1.0,
        }
    }
}

impl PlantParams {
    pub fn validate(&self, gravity: f64) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::InvalidConfig("plant.mass must be > 0".into()));
        }
        if !(self.max_total_thrust > self.mass * gravity) {
            return Err(Error::InvalidConfig(
                "plant.max_total_thrust must exceed mass * gravity so hover is feasible".into(),
            ));
        }
        if self.torque_gain.iter().any(|g| !g.is_finite()) || !self.rotational_damping.is_finite() {
            return Err(Error::InvalidConfig("plant gains must be finite".into()));
        }
        Ok(())
    }

    /// Collective command that balances gravity when level.
    pub fn hover_command(&self, gravity: f64) -> f64 {
        self.mass * gravity / self.max_total_thrust
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QuadState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub attitude: Attitude,
    pub rates: BodyRates,
    pub motors: MotorCommands,
}

impl QuadState {
    pub fn is_finite(&self) -> bool {
        self.position.is_finite()
            && self.velocity.is_finite()
            && self.attitude.is_finite()
            && self.rates.is_finite()
            && self.motors.0.iter().all(|m| m.is_finite())
    }
}

/// Body rates to Euler-angle rates (Z-Y-X sequence).
pub fn euler_rates(attitude: &Attitude, rates: &BodyRates) -> Result<EulerRates> {
    let (sr, cr) = (libm::sin(attitude.roll), libm::cos(attitude.roll));
    let cp = libm::cos(attitude.pitch);
    if cp.abs() <= GIMBAL_TOLERANCE {
        return Err(Error::GimbalLock {
            pitch: attitude.pitch,
        });
    }
    let tp = libm::sin(attitude.pitch) / cp;
    Ok(EulerRates {
        roll: rates.x + sr * tp * rates.y + cr * tp * rates.z,
        pitch: cr * rates.y - sr * rates.z,
        yaw: (sr * rates.y + cr * rates.z) / cp,
    })
}

/// One explicit step `angle += rate * dt`; yaw wraps, pitch saturates.
pub fn integrate_attitude(attitude: &Attitude, rates: &EulerRates, dt: f64) -> Attitude {
    Attitude {
        yaw: wrap_angle(attitude.yaw + rates.yaw * dt),
        pitch: (attitude.pitch + rates.pitch * dt).clamp(-PITCH_LIMIT, PITCH_LIMIT),
        roll: attitude.roll + rates.roll * dt,
    }
}

/// Collective thrust magnitude along body z, N.
pub fn total_thrust(motors: &MotorCommands, params: &PlantParams) -> f64 {
    params.max_total_thrust * motors.mean()
}

/// World-frame linear acceleration (gravity included), m/s^2.
pub fn linear_acceleration(state: &QuadState, params: &PlantParams, gravity: f64) -> Vec3 {
    let thrust_body = Vec3::new(0.0, 0.0, total_thrust(&state.motors, params) / params.mass);
    state.attitude.rotation().apply(thrust_body) - Vec3::UNIT_Z * gravity
}

/// Differential commands (roll, pitch, yaw) seen by the torque model.
pub fn differential_commands(motors: &MotorCommands) -> [f64; 3] {
    let [m1, m2, m3, m4] = motors.0;
    [(m3 - m4) / 2.0, (m1 - m2) / 2.0, (m3 + m4 - m1 - m2) / 4.0]
}

/// Body angular acceleration, rad/s^2.
pub fn angular_acceleration(state: &QuadState, params: &PlantParams) -> BodyRates {
    let diff = differential_commands(&state.motors);
    let d = params.rotational_damping;
    BodyRates {
        x: params.torque_gain[0] * diff[0] - d * state.rates.x,
        y: params.torque_gain[1] * diff[1] - d * state.rates.y,
        z: params.torque_gain[2] * diff[2] - d * state.rates.z,
    }
}

/// Advances the truth state by `config.dt` with semi-implicit Euler.
pub fn propagate(state: &QuadState, params: &PlantParams, config: &SimConfig) -> Result<QuadState> {
    propagate_dt(state, params, config.gravity, config.dt)
}

pub(crate) fn propagate_dt(
    state: &QuadState,
    params: &PlantParams,
    gravity: f64,
    dt: f64,
) -> Result<QuadState> {
    let mut motors = state.motors;
    motors.saturate();
    let state = QuadState { motors, ..*state };

    let alpha = angular_acceleration(&state, params);
    let rates = BodyRates {
        x: state.rates.x + alpha.x * dt,
        y: state.rates.y + alpha.y * dt,
        z: state.rates.z + alpha.z * dt,
    };
    let euler = euler_rates(&state.attitude, &rates)?;
    let attitude = integrate_attitude(&state.attitude, &euler, dt);

    let accel = linear_acceleration(&state, params, gravity);
    let mut velocity = state.velocity + accel * dt;
    let mut position = state.position + velocity * dt;
    if position.z < 0.0 {
        position.z = 0.0;
        if velocity.z < 0.0 {
            velocity.z = 0.0;
        }
    }

    Ok(QuadState {
        position,
        velocity,
        attitude,
        rates,
        motors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_6, PI};

    const G: f64 = 9.81;

    fn level_state(cmd: f64) -> QuadState {
        QuadState {
            position: Vec3::new(0.0, 0.0, 50.0),
            motors: MotorCommands([cmd; 4]),
            ..Default::default()
        }
    }

    #[test]
    fn level_attitude_maps_rates_by_permutation() {
        let r = euler_rates(&Attitude::LEVEL, &BodyRates::new(0.1, 0.2, 0.3)).unwrap();
        assert_eq!((r.yaw, r.pitch, r.roll), (0.3, 0.2, 0.1));
    }

    #[test]
    fn zero_rates_give_zero_euler_rates() {
        let r = euler_rates(&Attitude::new(1.0, 0.4, -0.7), &BodyRates::ZERO).unwrap();
        assert_eq!((r.yaw, r.pitch, r.roll), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rolled_attitude_hand_values() {
        let r = euler_rates(
            &Attitude::new(0.0, 0.0, FRAC_PI_6),
            &BodyRates::new(0.0, 0.2, 0.3),
        )
        .unwrap();
        let c = libm::cos(FRAC_PI_6);
        assert!((r.pitch - (c * 0.2 - 0.5 * 0.3)).abs() < 1e-15);
        assert!((r.pitch - 0.023_205_080_756_887_7).abs() < 1e-12);
        assert!((r.yaw - 0.359_807_621_135_331_6).abs() < 1e-12);
        assert!(r.roll.abs() < 1e-15);
    }

    #[test]
    fn gimbal_lock_is_an_error() {
        let att = Attitude::new(0.0, PI / 2.0, 0.0);
        assert!(matches!(
            euler_rates(&att, &BodyRates::new(0.0, 0.1, 0.0)),
            Err(Error::GimbalLock { .. })
        ));
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn integrate_examples() {
        let a = Attitude::new(0.3, 0.2, 0.1);
        assert_eq!(integrate_attitude(&a, &EulerRates::default(), 0.01), a);

        let a = integrate_attitude(
            &Attitude::LEVEL,
            &EulerRates {
                yaw: 0.5,
                ..Default::default()
            },
            0.02,
        );
        assert!((a.yaw - 0.01).abs() < 1e-15);

        let a = integrate_attitude(
            &Attitude::new(3.14, 0.0, 0.0),
            &EulerRates {
                yaw: 1.0,
                ..Default::default()
            },
            0.01,
        );
        assert!((a.yaw - (-3.133_185_307_179_586)).abs() < 1e-12);
    }

    #[test]
    fn pitch_saturates_instead_of_crossing_singularity() {
        let a = integrate_attitude(
            &Attitude::new(0.0, 1.5, 0.0),
            &EulerRates {
                pitch: 10.0,
                ..Default::default()
            },
            0.1,
        );
        assert_eq!(a.pitch, PITCH_LIMIT);
    }

    #[test]
    fn hover_trim_balances_gravity() {
        let p = PlantParams::default();
        let s = level_state(p.hover_command(G));
        assert!(linear_acceleration(&s, &p, G).z.abs() < 1e-12);
    }

    #[test]
    fn motors_off_is_free_fall() {
        let p = PlantParams::default();
        let a = linear_acceleration(&level_state(0.0), &p, G);
        assert_eq!(a.z, -9.81);
    }

    #[test]
    fn over_thrust_gives_expected_climb() {
        let p = PlantParams::default();
        let cmd = 1.2 * p.mass * G / p.max_total_thrust;
        let a = linear_acceleration(&level_state(cmd), &p, G);
        assert!((a.z - 1.962).abs() < 1e-12);
    }

    #[test]
    fn free_fall_step_drops_velocity_by_g_dt() {
        let cfg = SimConfig::default();
        let next = propagate(&level_state(0.0), &PlantParams::default(), &cfg).unwrap();
        assert!((next.velocity.z + G * cfg.dt).abs() < 1e-15);
    }

    #[test]
    fn ground_clamps_height_and_downward_velocity() {
        let mut s = level_state(0.0);
        s.position.z = 0.001;
        s.velocity.z = -2.0;
        let next = propagate(&s, &PlantParams::default(), &SimConfig::default()).unwrap();
        assert_eq!(next.position.z, 0.0);
        assert_eq!(next.velocity.z, 0.0);
    }

    #[test]
    fn free_fall_speed_grows_monotonically() {
        let p = PlantParams {
            rotational_damping: 0.0,
            ..Default::default()
        };
        let cfg = SimConfig::default();
        let mut s = level_state(0.0);
        s.velocity = Vec3::new(1.0, -0.5, -0.3);
        let mut last = s.velocity.norm();
        while s.position.z > 1.0 {
            s = propagate(&s, &p, &cfg).unwrap();
            let speed = s.velocity.norm();
            assert!(speed > last);
            last = speed;
        }
    }

    /// Local one-step error against a 10x finer integration shrinks like dt^2.
    #[test]
    fn step_error_is_second_order_in_dt() {
        let p = PlantParams::default();
        let start = QuadState {
            position: Vec3::new(0.0, 0.0, 20.0),
            velocity: Vec3::new(1.0, 0.5, 0.0),
            attitude: Attitude::new(0.2, 0.15, -0.1),
            rates: BodyRates::new(0.3, -0.2, 0.1),
            motors: MotorCommands([0.6, 0.4, 0.55, 0.45]),
        };
        let one_step_error = |dt: f64| {
            let coarse = propagate_dt(&start, &p, G, dt).unwrap();
            let mut fine = start;
            for _ in 0..10 {
                fine = propagate_dt(&fine, &p, G, dt / 10.0).unwrap();
            }
            let dp = coarse.position - fine.position;
            let da = Vec3::new(
                coarse.attitude.yaw - fine.attitude.yaw,
                coarse.attitude.pitch - fine.attitude.pitch,
                coarse.attitude.roll - fine.attitude.roll,
            );
            dp.norm() + da.norm()
        };
        let e1 = one_step_error(0.02);
        let e2 = one_step_error(0.01);
        let ratio = e1 / e2;
        assert!(ratio > 3.0 && ratio < 5.0, "ratio {ratio}");
    }
}
