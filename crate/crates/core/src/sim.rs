//! Simulation clock and the per-tick loop:
//! sensors -> estimation -> control -> (detector) -> dynamics.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::control::MotorCommands;
use crate::control::{FlightController, Setpoints};
use crate::detection::{project_victim, simulate_detection, Detection, SsdHead, VisibleTarget};
use crate::dynamics::{self, Attitude, QuadState};
use crate::error::{Error, Result};
use crate::estimation::{AccelAngles, AttitudeEstimator};
use crate::geom::Vec3;
use crate::mission::{
    evaluate_mission, geolocate, plan_lawnmower, GroundPoint, Guidance, LogEntry, MissionLog,
    MissionMetrics, Pattern, Pose,
};
use crate::rng::RngStreams;
use crate::sensors::{sample_accel, sample_ultrasonic, Echo, Gyro, SensorReadings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Physics tick, s.
    pub dt: f64,
    /// Upper bound on simulated time, s.
    pub duration: f64,
    pub seed: u64,
    /// m/s^2
    pub gravity: f64,
    /// Detector frame rate, Hz.
    pub detector_fps: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            duration: 1200.0,
            seed: 42,
            gravity: 9.81,
            detector_fps: 3.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidConfig("sim.dt must be > 0".into()));
        }
        if !(self.duration >= self.dt) {
            return Err(Error::InvalidConfig(
                "sim.duration must be >= sim.dt".into(),
            ));
        }
        if !(self.detector_fps > 0.0) {
            return Err(Error::InvalidConfig("sim.detector_fps must be > 0".into()));
        }
        if !(self.dt <= 1.0 / self.detector_fps) {
            return Err(Error::InvalidConfig(
                "sim.dt must not exceed the detector period".into(),
            ));
        }
        if !(self.gravity > 0.0) {
            return Err(Error::InvalidConfig("sim.gravity must be > 0".into()));
        }
        Ok(())
    }

    /// Number of physics ticks in `duration`.
    pub fn total_ticks(&self) -> u64 {
        libm::round(self.duration / self.dt) as u64
    }
}

/// Whether a detector frame is due. `last_frame_time = None` means no frame
/// has run yet.
pub fn detector_tick(sim_time: f64, detector_fps: f64, last_frame_time: Option<f64>) -> bool {
    match last_frame_time {
        None => true,
        Some(last) => sim_time - last >= 1.0 / detector_fps,
    }
}

/// All mutable simulation state.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub tick: u64,
    pub time: f64,
    pub quad: QuadState,
    pub gyro: Gyro,
    pub estimator: AttitudeEstimator,
    pub controller: FlightController,
    /// Nominal time of the last detector frame.
    pub last_frame_time: Option<f64>,
    pub frames: u64,
}

/// What one detector frame saw.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutcome {
    pub visible: usize,
    pub raw_detections: usize,
    pub detections: Vec<Detection>,
    pub logged: usize,
}

/// Per-tick observables, sampled before the dynamics update.
#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub tick: u64,
    pub time: f64,
    pub truth: Attitude,
    pub altitude: f64,
    pub estimate: Attitude,
    pub accel: AccelAngles,
    pub accel_accepted: bool,
    pub gyro_only_roll: f64,
    pub gyro_only_pitch: f64,
    pub echo: Echo,
    /// Altitude reconstructed from the echo and the estimated tilt.
    pub echo_altitude: Option<f64>,
    pub setpoints: Setpoints,
    pub frame: Option<FrameOutcome>,
}

pub struct Simulation {
    config: Config,
    world: WorldState,
    rng: RngStreams,
    guidance: Option<Guidance>,
    hover_point: Vec3,
    ssd: SsdHead,
    log: MissionLog,
}

impl Simulation {
    pub fn new(config: Config) -> Result<Self> {
        config.validate()?;
        let sc = &config.scenario;
        let (guidance, start) = match sc.pattern {
            Pattern::Lawnmower => {
                let plan = plan_lawnmower(sc, &config.camera, config.mission.overlap)?;
                let start = plan.waypoints[0];
                (
                    Some(Guidance::new(&plan, sc.cruise_speed, config.navigation)),
                    start,
                )
            }
            Pattern::Hover => {
                let a = &sc.area;
                let center = Vec3::new(
                    (a.x_min + a.x_max) / 2.0,
                    (a.y_min + a.y_max) / 2.0,
                    sc.search_altitude,
                );
                (None, center)
            }
        };
        let init = config.initial;
        let attitude = Attitude::new(init.yaw, init.pitch, init.roll);
        let hover = config.plant.hover_command(config.sim.gravity);
        let quad = QuadState {
            position: start,
            velocity: Vec3::ZERO,
            attitude,
            rates: Default::default(),
            motors: MotorCommands([hover; 4]),
        };
        let world = WorldState {
            tick: 0,
            time: 0.0,
            quad,
            gyro: Gyro::new(config.gyro),
            estimator: AttitudeEstimator::new(&attitude),
            controller: FlightController::new(config.control, hover, config.ultrasonic.sound_speed),
            last_frame_time: None,
            frames: 0,
        };
        Ok(Self {
            rng: RngStreams::new(config.sim.seed),
            ssd: SsdHead::new(config.ssd.clone()),
            guidance,
            hover_point: start,
            world,
            log: MissionLog::default(),
            config,
        })
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn log(&self) -> &MissionLog {
        &self.log
    }

    pub fn guidance(&self) -> Option<&Guidance> {
        self.guidance.as_ref()
    }

    /// Out of time, or the search plan has been flown.
    pub fn is_done(&self) -> bool {
        self.world.tick >= self.config.sim.total_ticks()
            || self.guidance.as_ref().is_some_and(Guidance::finished)
    }

    pub fn metrics(&self) -> MissionMetrics {
        evaluate_mission(
            &self.log,
            &self.config.scenario,
            self.config.mission.assoc_radius,
        )
    }

    /// Advances the world by one tick.
    pub fn step(&mut self) -> Result<TickRecord> {
        let cfg = &self.config;
        let dt = cfg.sim.dt;
        let g = cfg.sim.gravity;
        let w = &mut self.world;
        let t = w.tick as f64 * dt;
        w.time = t;

        let specific_force =
            dynamics::linear_acceleration(&w.quad, &cfg.plant, g) + Vec3::UNIT_Z * g;
        let readings = SensorReadings {
            gyro: w.gyro.sample(&w.quad.rates, &mut self.rng.gyro, dt),
            accel: sample_accel(
                &w.quad.attitude,
                specific_force,
                g,
                &cfg.accel,
                &mut self.rng.accel,
                t,
            ),
            echo: sample_ultrasonic(&w.quad, &cfg.ultrasonic, &mut self.rng.ultrasonic),
        };

        w.estimator
            .update(&readings.gyro, &readings.accel, &cfg.filter, dt)?;
        let estimate = w.estimator.attitude();

        let setpoints = match self.guidance.as_mut() {
            Some(guide) => guide.setpoints(&w.quad, g),
            None => Setpoints {
                altitude: self.hover_point.z,
                ..Default::default()
            },
        };
        let motors = w
            .controller
            .update(&setpoints, &estimate, readings.echo, dt);

        let frame = if detector_tick(t, cfg.sim.detector_fps, w.last_frame_time) {
            w.last_frame_time = Some(match w.last_frame_time {
                None => t,
                Some(last) => last + 1.0 / cfg.sim.detector_fps,
            });
            w.frames += 1;
            Some(run_frame(
                cfg,
                w,
                &self.ssd,
                &mut self.rng,
                &mut self.log,
                t,
            ))
        } else {
            None
        };

        let record = TickRecord {
            tick: w.tick,
            time: t,
            truth: w.quad.attitude,
            altitude: w.quad.position.z,
            estimate,
            accel: w.estimator.last_accel,
            accel_accepted: w.estimator.filter.last_accel_accepted,
            gyro_only_roll: w.estimator.gyro_only_roll,
            gyro_only_pitch: w.estimator.gyro_only_pitch,
            echo: readings.echo,
            echo_altitude: readings
                .echo
                .time()
                .map(|e| cfg.ultrasonic.altitude_from_echo(e, &estimate)),
            setpoints,
            frame,
        };

        w.quad.motors = motors;
        w.quad = dynamics::propagate(&w.quad, &cfg.plant, &cfg.sim)?;
        w.tick += 1;
        w.time = w.tick as f64 * dt;

        if !w.quad.is_finite() {
            return Err(Error::NonFinite {
                tick: record.tick,
                what: "vehicle state",
            });
        }
        if !(estimate.roll.is_finite() && estimate.pitch.is_finite() && estimate.yaw.is_finite()) {
            return Err(Error::NonFinite {
                tick: record.tick,
                what: "attitude estimate",
            });
        }
        Ok(record)
    }

    /// Steps until [`Simulation::is_done`], handing each record to `sink`.
    pub fn run<F: FnMut(&TickRecord)>(&mut self, mut sink: F) -> Result<()> {
        while !self.is_done() {
            let rec = self.step()?;
            sink(&rec);
        }
        Ok(())
    }
}

fn run_frame(
    cfg: &Config,
    w: &WorldState,
    ssd: &SsdHead,
    rng: &mut RngStreams,
    log: &mut MissionLog,
    t: f64,
) -> FrameOutcome {
    let targets: Vec<VisibleTarget> = cfg
        .scenario
        .victims
        .iter()
        .filter_map(|v| project_victim(v.x, v.y, v.height, &w.quad, &cfg.camera))
        .map(|p| VisibleTarget {
            bbox: p.bbox,
            apparent_px: p.apparent_px,
            slant: p.slant,
        })
        .collect();
    let raw: Vec<Detection> = simulate_detection(&targets, &cfg.detector, &mut rng.detector)
        .into_iter()
        .map(|d| d.detection)
        .collect();
    let detections = ssd.infer(&raw, &mut rng.detector);

    let mut logged = 0;
    for det in &detections {
        let geo = geolocate(&det.bbox, &w.quad, &cfg.camera).map(|(x, y)| GroundPoint { x, y });
        if let Some(gp) = geo {
            if log.has_nearby(gp.x, gp.y, cfg.mission.dedup_radius) {
                continue;
            }
        }
        log.push(LogEntry {
            time: t,
            pose: Pose::from_state(&w.quad),
            bbox: det.bbox,
            conf: det.conf,
            geo,
        });
        logged += 1;
    }
    FrameOutcome {
        visible: targets.len(),
        raw_detections: raw.len(),
        detections,
        logged,
    }
}
