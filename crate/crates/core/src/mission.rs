//! Search-and-rescue layer: scenarios, lawnmower planning, waypoint guidance,
//! detection geolocation and mission scoring.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::control::Setpoints;
use crate::detection::{BBox, CameraModel};
use crate::dynamics::QuadState;
use crate::error::{Error, Result};
use crate::geom::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Area {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Area {
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Victim {
    pub x: f64,
    pub y: f64,
    /// Body length, m.
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    /// Fly the lawnmower plan over the area.
    #[default]
    Lawnmower,
    /// Hold a level hover at the area center.
    Hover,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub area: Area,
    pub victims: Vec<Victim>,
    /// m
    pub search_altitude: f64,
    /// m/s
    pub cruise_speed: f64,
    #[serde(default)]
    pub pattern: Pattern,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            area: Area {
                x_min: 0.0,
                y_min: 0.0,
                x_max: 100.0,
                y_max: 100.0,
            },
            victims: vec![
                Victim {
                    x: 18.0,
                    y: 23.0,
                    height: 1.7,
                },
                Victim {
                    x: 72.5,
                    y: 11.0,
                    height: 1.6,
                },
                Victim {
                    x: 45.0,
                    y: 52.0,
                    height: 1.8,
                },
                Victim {
                    x: 88.0,
                    y: 77.5,
                    height: 1.7,
                },
                Victim {
                    x: 30.5,
                    y: 91.0,
                    height: 1.5,
                },
            ],
            search_altitude: 3.5,
            cruise_speed: 3.0,
            pattern: Pattern::Lawnmower,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let a = &self.area;
        if !(a.x_max > a.x_min && a.y_max > a.y_min) {
            return Err(Error::InvalidConfig(
                "scenario.area must have positive extent".into(),
            ));
        }
        if !(self.search_altitude > 0.0) {
            return Err(Error::InvalidConfig(
                "scenario.search_altitude must be > 0".into(),
            ));
        }
        if !(self.cruise_speed > 0.0) {
            return Err(Error::InvalidConfig(
                "scenario.cruise_speed must be > 0".into(),
            ));
        }
        for (i, v) in self.victims.iter().enumerate() {
            if !a.contains(v.x, v.y) {
                return Err(Error::InvalidConfig(alloc::format!(
                    "scenario.victims[{i}] lies outside the search area"
                )));
            }
            if !(v.height > 0.0) {
                return Err(Error::InvalidConfig(alloc::format!(
                    "scenario.victims[{i}].height must be > 0"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchPlan {
    pub waypoints: Vec<Vec3>,
    /// m
    pub swath: f64,
}

/// Ground width imaged across track: `2 h tan(horizontal half-fov) (1 - overlap)`.
pub fn swath_width(altitude: f64, cam: &CameraModel, overlap: f64) -> f64 {
    2.0 * altitude * libm::tan(cam.horizontal_half_fov()) * (1.0 - overlap)
}

/// Number of transects needed to cover `extent` with the given swath.
pub fn transect_count(extent: f64, swath: f64) -> usize {
    (libm::ceil(extent / swath) as usize).max(1)
}

/// Back-and-forth transects along x, spaced in y, the image width pointing
/// across track.
pub fn plan_lawnmower(scenario: &Scenario, cam: &CameraModel, overlap: f64) -> Result<SearchPlan> {
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::InvalidConfig(
            "mission.overlap must lie in [0, 1)".into(),
        ));
    }
    let a = &scenario.area;
    let z = scenario.search_altitude;
    let swath = swath_width(z, cam, overlap);
    let n = transect_count(a.height(), swath);
    let ys: Vec<f64> = if n == 1 {
        vec![(a.y_min + a.y_max) / 2.0]
    } else {
        let first = a.y_min + swath / 2.0;
        let last = a.y_max - swath / 2.0;
        (0..n)
            .map(|k| first + (last - first) * k as f64 / (n - 1) as f64)
            .collect()
    };
    let mut waypoints = Vec::with_capacity(2 * n);
    for (k, y) in ys.into_iter().enumerate() {
        let (x0, x1) = if k % 2 == 0 {
            (a.x_min, a.x_max)
        } else {
            (a.x_max, a.x_min)
        };
        waypoints.push(Vec3::new(x0, y, z));
        waypoints.push(Vec3::new(x1, y, z));
    }
    Ok(SearchPlan { waypoints, swath })
}

/// Intersects the ray through the box center with the ground plane z = 0.
pub fn geolocate(det: &BBox, drone: &QuadState, cam: &CameraModel) -> Option<(f64, f64)> {
    if !(drone.position.z > 0.0) {
        return None;
    }
    let ray = cam.pixel_ray(det.c_x, det.c_y, drone);
    if !(ray.z < 0.0) {
        return None;
    }
    let t = -drone.position.z / ray.z;
    Some((drone.position.x + t * ray.x, drone.position.y + t * ray.y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NavConfig {
    /// Position error to velocity command, 1/s.
    pub position_gain: f64,
    /// Velocity error to acceleration command, 1/s.
    pub velocity_gain: f64,
    /// Largest tilt setpoint issued by guidance, rad.
    pub max_tilt: f64,
    /// Distance at which a waypoint counts as reached, m.
    pub waypoint_radius: f64,
}

impl Default for NavConfig {
    fn default() -> Self {
        Self {
            position_gain: 0.8,
            velocity_gain: 1.2,
            max_tilt: 10f64.to_radians(),
            waypoint_radius: 1.0,
        }
    }
}

/// Waypoint follower producing attitude and altitude setpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Guidance {
    pub config: NavConfig,
    pub waypoints: Vec<Vec3>,
    pub next: usize,
    pub cruise_speed: f64,
}

impl Guidance {
    pub fn new(plan: &SearchPlan, cruise_speed: f64, config: NavConfig) -> Self {
        Self {
            config,
            waypoints: plan.waypoints.clone(),
            next: 0,
            cruise_speed,
        }
    }

    pub fn finished(&self) -> bool {
        self.next >= self.waypoints.len()
    }

    pub fn setpoints(&mut self, state: &QuadState, gravity: f64) -> Setpoints {
        while let Some(wp) = self.waypoints.get(self.next) {
            let d = *wp - state.position;
            if libm::hypot(d.x, d.y) > self.config.waypoint_radius {
                break;
            }
            self.next += 1;
        }
        let target = match self.waypoints.get(self.next).or(self.waypoints.last()) {
            Some(t) => *t,
            None => state.position,
        };
        let err = target - state.position;
        let mut vx = self.config.position_gain * err.x;
        let mut vy = self.config.position_gain * err.y;
        let speed = libm::hypot(vx, vy);
        if speed > self.cruise_speed {
            vx *= self.cruise_speed / speed;
            vy *= self.cruise_speed / speed;
        }
        let ax = self.config.velocity_gain * (vx - state.velocity.x);
        let ay = self.config.velocity_gain * (vy - state.velocity.y);
        // Rotate the demand into the yaw frame.
        let (s, c) = (libm::sin(state.attitude.yaw), libm::cos(state.attitude.yaw));
        let fwd = c * ax + s * ay;
        let left = -s * ax + c * ay;
        let lim = self.config.max_tilt;
        Setpoints {
            yaw: 0.0,
            pitch: libm::atan(fwd / gravity).clamp(-lim, lim),
            roll: (-libm::atan(left / gravity)).clamp(-lim, lim),
            altitude: target.z,
        }
    }
}

/// Drone pose snapshot stored with each logged detection.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl Pose {
    pub fn from_state(s: &QuadState) -> Self {
        Self {
            x: s.position.x,
            y: s.position.y,
            z: s.position.z,
            roll: s.attitude.roll,
            pitch: s.attitude.pitch,
            yaw: s.attitude.yaw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundPoint {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub time: f64,
    pub pose: Pose,
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub conf: f64,
    pub geo: Option<GroundPoint>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MissionLog {
    pub entries: Vec<LogEntry>,
}

impl MissionLog {
    /// Appends an entry; times must be non-decreasing.
    pub fn push(&mut self, entry: LogEntry) {
        debug_assert!(self.entries.last().is_none_or(|e| e.time <= entry.time));
        self.entries.push(entry);
    }

    /// Whether a geolocated detection already exists within `radius` of (x, y).
    pub fn has_nearby(&self, x: f64, y: f64, radius: f64) -> bool {
        self.entries
            .iter()
            .filter_map(|e| e.geo)
            .any(|g| libm::hypot(g.x - x, g.y - y) <= radius)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionMetrics {
    /// `None` when the scenario has no victims.
    pub recall: Option<f64>,
    pub matched: usize,
    pub false_positives: usize,
    pub total_detections: usize,
    /// Mean distance between matched detections and their victims, m.
    pub mean_localization_error: Option<f64>,
    /// Per victim, time of the detection it was matched to.
    pub time_to_first_detection: Vec<Option<f64>>,
}

/// Greedy association in log order: each detection takes the nearest
/// still-unmatched victim within `assoc_radius`; anything else, including a
/// repeat detection of a matched victim, is a false positive.
pub fn evaluate_mission(
    log: &MissionLog,
    scenario: &Scenario,
    assoc_radius: f64,
) -> MissionMetrics {
    let victims = &scenario.victims;
    let mut first: Vec<Option<f64>> = vec![None; victims.len()];
    let mut errors: Vec<f64> = Vec::new();
    let mut false_positives = 0;

    for entry in &log.entries {
        let Some(g) = entry.geo else {
            false_positives += 1;
            continue;
        };
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in victims.iter().enumerate() {
            if first[i].is_some() {
                continue;
            }
            let d = libm::hypot(g.x - v.x, g.y - v.y);
            if d <= assoc_radius && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        match best {
            Some((i, d)) => {
                first[i] = Some(entry.time);
                errors.push(d);
            }
            None => false_positives += 1,
        }
    }

    let matched = errors.len();
    MissionMetrics {
        recall: (!victims.is_empty()).then(|| matched as f64 / victims.len() as f64),
        matched,
        false_positives,
        total_detections: log.entries.len(),
        mean_localization_error: (matched > 0).then(|| errors.iter().sum::<f64>() / matched as f64),
        time_to_first_detection: first,
    }
}
