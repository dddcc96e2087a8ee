//! PID loops for yaw, pitch, roll and altitude, and the plus-frame mixer.

use serde::{Deserialize, Serialize};

use crate::dynamics::Attitude;
use crate::error::{Error, Result};
use crate::geom::wrap_angle;
use crate::sensors::Echo;

/// Largest roll/pitch setpoint magnitude, rad (30 degrees).
pub const MAX_TILT_SETPOINT: f64 = core::f64::consts::FRAC_PI_6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl PidGains {
    pub const fn new(kp: f64, ki: f64, kd: f64) -> Self {
        Self { kp, ki, kd }
    }

    fn validate(&self, name: &str) -> Result<()> {
        let ok = [self.kp, self.ki, self.kd]
            .iter()
            .all(|g| g.is_finite() && *g >= 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(alloc::format!(
                "control.{name} gains must be finite and non-negative"
            )))
        }
    }
}

/// How the integral term accumulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integration {
    /// `integral += e * dt`
    #[default]
    Rectangular,
    /// `integral += (e + prev_e) / 2 * dt`
    Trapezoidal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidState {
    pub integral: f64,
    pub prev_error: f64,
    pub integral_limit: f64,
}

impl PidState {
    pub fn new(integral_limit: f64) -> Self {
        Self {
            integral: 0.0,
            prev_error: 0.0,
            integral_limit,
        }
    }
}

/// Discrete PID step on `e = setpoint - measurement`. Derivative acts on the
/// error, so setpoint steps produce a derivative kick.
pub fn pid_update(
    gains: &PidGains,
    state: &PidState,
    setpoint: f64,
    measurement: f64,
    dt: f64,
    integration: Integration,
) -> (f64, PidState) {
    pid_update_error(gains, state, setpoint - measurement, dt, integration)
}

pub fn pid_update_error(
    gains: &PidGains,
    state: &PidState,
    error: f64,
    dt: f64,
    integration: Integration,
) -> (f64, PidState) {
    let increment = match integration {
        Integration::Rectangular => error * dt,
        Integration::Trapezoidal => 0.5 * (error + state.prev_error) * dt,
    };
    let limit = state.integral_limit;
    let integral = (state.integral + increment).clamp(-limit, limit);
    let derivative = (error - state.prev_error) / dt;
    let u = gains.kp * error + gains.ki * integral + gains.kd * derivative;
    (
        u,
        PidState {
            integral,
            prev_error: error,
            integral_limit: limit,
        },
    )
}

/// Altitude error in echo-time units: `2 * target / c - echo`.
/// `None` when the echo is out of range.
pub fn altitude_error_from_echo(echo: Echo, target_altitude: f64, sound_speed: f64) -> Option<f64> {
    echo.time().map(|t| 2.0 * target_altitude / sound_speed - t)
}

/// Normalized motor commands m1..m4.
///
/// m1/m2 form the pitch pair and m3/m4 the roll pair of a plus frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MotorCommands(pub [f64; 4]);

impl MotorCommands {
    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / 4.0
    }

    pub fn saturate(&mut self) {
        for m in &mut self.0 {
            *m = m.clamp(0.0, 1.0);
        }
    }
}

/// Plus-frame mixing before saturation.
pub fn mix_unsaturated(base: f64, u_yaw: f64, u_pitch: f64, u_roll: f64) -> [f64; 4] {
    [
        base + u_pitch - u_yaw,
        base - u_pitch - u_yaw,
        base + u_roll + u_yaw,
        base - u_roll + u_yaw,
    ]
}

pub fn mix(base: f64, u_yaw: f64, u_pitch: f64, u_roll: f64) -> MotorCommands {
    let mut cmds = MotorCommands(mix_unsaturated(base, u_yaw, u_pitch, u_roll));
    cmds.saturate();
    cmds
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Setpoints {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    /// m
    pub altitude: f64,
}

impl Setpoints {
    /// Clamps roll/pitch into the +-30 degree envelope.
    pub fn limited(mut self) -> Self {
        self.pitch = self.pitch.clamp(-MAX_TILT_SETPOINT, MAX_TILT_SETPOINT);
        self.roll = self.roll.clamp(-MAX_TILT_SETPOINT, MAX_TILT_SETPOINT);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlConfig {
    pub roll: PidGains,
    pub pitch: PidGains,
    pub yaw: PidGains,
    /// Gains act on the echo-time error (s), output is collective command.
    pub altitude: PidGains,
    pub integral_limit: f64,
    #[serde(default)]
    pub integration: Integration,
    /// Divide collective by cos(roll) cos(pitch) of the estimate.
    pub tilt_compensation: bool,
    /// When false all motors are held at zero.
    pub armed: bool,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            roll: PidGains::new(0.625, 0.1, 0.2),
            pitch: PidGains::new(0.625, 0.1, 0.2),
            yaw: PidGains::new(0.5, 0.05, 0.3),
            altitude: PidGains::new(18.0, 2.0, 21.0),
            integral_limit: 1.0,
            integration: Integration::Rectangular,
            tilt_compensation: true,
            armed: true,
        }
    }
}

impl ControlConfig {
    pub fn validate(&self) -> Result<()> {
        self.roll.validate("roll")?;
        self.pitch.validate("pitch")?;
        self.yaw.validate("yaw")?;
        self.altitude.validate("altitude")?;
        if !(self.integral_limit >= 0.0) {
            return Err(Error::InvalidConfig(
                "control.integral_limit must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// The four loops of the stabilizer and their state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightController {
    pub config: ControlConfig,
    pub hover_command: f64,
    pub sound_speed: f64,
    pub roll: PidState,
    pub pitch: PidState,
    pub yaw: PidState,
    pub altitude: PidState,
    /// Last altitude-loop output, held while the echo is out of range.
    pub altitude_output: f64,
}

impl FlightController {
    pub fn new(config: ControlConfig, hover_command: f64, sound_speed: f64) -> Self {
        let limit = config.integral_limit;
        Self {
            config,
            hover_command,
            sound_speed,
            roll: PidState::new(limit),
            pitch: PidState::new(limit),
            yaw: PidState::new(limit),
            altitude: PidState::new(limit),
            altitude_output: 0.0,
        }
    }

    pub fn update(
        &mut self,
        setpoints: &Setpoints,
        estimate: &Attitude,
        echo: Echo,
        dt: f64,
    ) -> MotorCommands {
        if !self.config.armed {
            return MotorCommands::default();
        }
        let sp = setpoints.limited();
        let cfg = self.config;
        let integ = cfg.integration;

        let (u_roll, roll) = pid_update(&cfg.roll, &self.roll, sp.roll, estimate.roll, dt, integ);
        let (u_pitch, pitch) =
            pid_update(&cfg.pitch, &self.pitch, sp.pitch, estimate.pitch, dt, integ);
        let yaw_error = wrap_angle(sp.yaw - estimate.yaw);
        let (u_yaw, yaw) = pid_update_error(&cfg.yaw, &self.yaw, yaw_error, dt, integ);
        self.roll = roll;
        self.pitch = pitch;
        self.yaw = yaw;

        if let Some(e) = altitude_error_from_echo(echo, sp.altitude, self.sound_speed) {
            let (u_alt, alt) = pid_update_error(&cfg.altitude, &self.altitude, e, dt, integ);
            self.altitude = alt;
            self.altitude_output = u_alt;
        }

        let mut base = self.hover_command + self.altitude_output;
        if cfg.tilt_compensation {
            let tilt = libm::cos(estimate.roll) * libm::cos(estimate.pitch);
            base /= tilt.max(0.5);
        }
        mix(base.clamp(0.0, 1.0), u_yaw, u_pitch, u_roll)
    }
}
