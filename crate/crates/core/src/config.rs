//! Aggregate configuration for one simulation run.

use serde::{Deserialize, Serialize};

use crate::control::ControlConfig;
use crate::detection::{CameraModel, DetectorModel, SsdConfig};
use crate::dynamics::PlantParams;
use crate::error::{Error, Result};
use crate::estimation::FilterConfig;
use crate::mission::{NavConfig, Scenario};
use crate::sensors::{AccelModel, GyroModel, UltrasonicModel};
use crate::sim::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissionConfig {
    /// Fractional overlap between adjacent swaths.
    pub overlap: f64,
    /// Radius for associating detections to victims during scoring, m.
    pub assoc_radius: f64,
    /// A new detection within this distance of a logged one is dropped, m.
    pub dedup_radius: f64,
}

impl Default for MissionConfig {
    fn default() -> Self {
        Self {
            overlap: 0.1,
            assoc_radius: 3.0,
            dedup_radius: 3.0,
        }
    }
}

/// Initial attitude of the vehicle, rad.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConditions {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub sim: SimConfig,
    pub plant: PlantParams,
    pub gyro: GyroModel,
    pub accel: AccelModel,
    pub ultrasonic: UltrasonicModel,
    pub filter: FilterConfig,
    pub control: ControlConfig,
    pub navigation: NavConfig,
    pub camera: CameraModel,
    pub detector: DetectorModel,
    pub ssd: SsdConfig,
    pub mission: MissionConfig,
    pub scenario: Scenario,
    pub initial: InitialConditions,
}

impl Config {
    /// Defaults with every sensor noise source switched off.
    pub fn noiseless() -> Self {
        Self {
            gyro: GyroModel::ideal(),
            accel: AccelModel::ideal(),
            ultrasonic: UltrasonicModel::ideal(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.plant.validate(self.sim.gravity)?;
        let sigmas = [
            self.gyro.bias_walk_sigma,
            self.gyro.white_sigma,
            self.accel.white_sigma,
            self.accel.vibration_amplitude,
            self.accel.spike_magnitude,
            self.ultrasonic.noise_sigma,
        ];
        if sigmas.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::InvalidConfig(
                "sensor noise levels must be >= 0".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.accel.spike_probability) {
            return Err(Error::InvalidConfig(
                "accel.spike_probability must lie in [0, 1]".into(),
            ));
        }
        if !(self.ultrasonic.sound_speed > 0.0 && self.ultrasonic.max_range > 0.0) {
            return Err(Error::InvalidConfig(
                "ultrasonic.sound_speed and ultrasonic.max_range must be > 0".into(),
            ));
        }
        self.filter.validate()?;
        self.control.validate()?;
        self.camera.validate()?;
        self.detector.validate()?;
        self.ssd.validate()?;
        if !(0.0..1.0).contains(&self.mission.overlap) {
            return Err(Error::InvalidConfig(
                "mission.overlap must lie in [0, 1)".into(),
            ));
        }
        if !(self.mission.assoc_radius > 0.0) {
            return Err(Error::InvalidConfig(
                "mission.assoc_radius must be > 0".into(),
            ));
        }
        self.scenario.validate()
    }
}
