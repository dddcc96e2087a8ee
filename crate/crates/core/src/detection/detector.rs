//! Stochastic stand-in for the trained network.
//!
//! Detection probability is a logistic in apparent pixel height, scaled by a
//! working-range window with a 20% linear roll-off outside each limit.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::boxes::{BBox, Detection};
use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorModel {
    pub p_max: f64,
    /// Apparent height (px) at which the logistic term is 0.5.
    pub pixel_height_50: f64,
    /// Logistic slope scale, px.
    pub steepness: f64,
    pub conf_mean: f64,
    pub conf_noise_sigma: f64,
    /// Normalized-coordinate jitter on detected box centers.
    pub center_jitter_sigma: f64,
    /// Relative jitter on detected box sizes.
    pub size_jitter_sigma: f64,
    /// m
    pub near_limit: f64,
    /// m
    pub far_limit: f64,
    /// Probability of one spurious detection per frame.
    pub false_positive_rate: f64,
    pub false_positive_conf: f64,
}

impl Default for DetectorModel {
    /// Calibrated for 640x480, 60 degree vertical fov and 1.7 m victims:
    /// apparent height is about 35 px at 20 m and 71 px at 10 m.
    fn default() -> Self {
        Self {
            p_max: 0.97,
            pixel_height_50: 24.0,
            steepness: 3.0,
            conf_mean: 0.8,
            conf_noise_sigma: 0.05,
            center_jitter_sigma: 0.004,
            size_jitter_sigma: 0.03,
            near_limit: 1.0,
            far_limit: 20.0,
            false_positive_rate: 0.01,
            false_positive_conf: 0.55,
        }
    }
}

impl DetectorModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_max) {
            return Err(Error::InvalidConfig(
                "detector.p_max must lie in [0, 1]".into(),
            ));
        }
        if !(self.pixel_height_50 > 0.0) || !(self.steepness > 0.0) {
            return Err(Error::InvalidConfig(
                "detector.pixel_height_50 and detector.steepness must be > 0".into(),
            ));
        }
        if !(self.near_limit >= 0.0 && self.far_limit > self.near_limit) {
            return Err(Error::InvalidConfig(
                "detector limits must satisfy 0 <= near < far".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.false_positive_rate) {
            return Err(Error::InvalidConfig(
                "detector.false_positive_rate must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    pub fn range_factor(&self, slant: f64) -> f64 {
        if slant > self.far_limit {
            (1.0 - (slant - self.far_limit) / (0.2 * self.far_limit)).max(0.0)
        } else if slant < self.near_limit {
            (1.0 - (self.near_limit - slant) / (0.2 * self.near_limit)).max(0.0)
        } else {
            1.0
        }
    }

    pub fn detection_probability(&self, apparent_px: f64, slant: f64) -> f64 {
        let logistic =
            1.0 / (1.0 + libm::exp(-(apparent_px - self.pixel_height_50) / self.steepness));
        self.p_max * logistic * self.range_factor(slant)
    }
}

/// A victim in frame, as handed to the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibleTarget {
    pub bbox: BBox,
    pub apparent_px: f64,
    pub slant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulatedDetection {
    pub detection: Detection,
    /// Index of the visible target this came from; `None` for false alarms.
    pub target: Option<usize>,
}

/// One frame of detector output. Each target consumes a fixed number of
/// draws whether or not it is detected.
pub fn simulate_detection(
    targets: &[VisibleTarget],
    model: &DetectorModel,
    rng: &mut RngStream,
) -> Vec<SimulatedDetection> {
    let mut out = Vec::new();
    for (i, t) in targets.iter().enumerate() {
        let p = model.detection_probability(t.apparent_px, t.slant);
        let hit = rng.chance(p);
        let conf = (model.conf_mean + rng.gaussian(model.conf_noise_sigma)).clamp(0.0, 1.0);
        let dx = rng.gaussian(model.center_jitter_sigma);
        let dy = rng.gaussian(model.center_jitter_sigma);
        let sw = 1.0 + rng.gaussian(model.size_jitter_sigma);
        let sh = 1.0 + rng.gaussian(model.size_jitter_sigma);
        if hit {
            let bbox = BBox::new(
                t.bbox.c_x + dx,
                t.bbox.c_y + dy,
                t.bbox.w * sw.max(0.1),
                t.bbox.h * sh.max(0.1),
            );
            out.push(SimulatedDetection {
                detection: Detection { bbox, conf },
                target: Some(i),
            });
        }
    }
    if rng.chance(model.false_positive_rate) {
        let bbox = BBox::new(
            rng.uniform_range(0.1, 0.9),
            rng.uniform_range(0.1, 0.9),
            rng.uniform_range(0.05, 0.3),
            rng.uniform_range(0.05, 0.3),
        );
        let conf =
            (model.false_positive_conf + rng.gaussian(model.conf_noise_sigma)).clamp(0.0, 1.0);
        out.push(SimulatedDetection {
            detection: Detection { bbox, conf },
            target: None,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::camera::CameraModel;
    use crate::rng::Subsystem;

    fn apparent(slant: f64) -> f64 {
        CameraModel::default().focal_px() * 1.7 / slant
    }

    #[test]
    fn calibrated_range_behaviour() {
        let m = DetectorModel::default();
        for d in [1.0, 2.0, 5.0, 10.0, 15.0, 20.0] {
            assert!(m.detection_probability(apparent(d), d) > 0.9, "d = {d}");
        }
        for d in [25.0, 30.0, 60.0] {
            assert!(m.detection_probability(apparent(d), d) < 0.2, "d = {d}");
        }
    }

    #[test]
    fn range_window_rolls_off_linearly() {
        let m = DetectorModel::default();
        assert_eq!(m.range_factor(22.0), 0.5);
        assert_eq!(m.range_factor(24.0), 0.0);
        assert!((m.range_factor(0.9) - 0.5).abs() < 1e-12);
        assert_eq!(m.range_factor(10.0), 1.0);
    }

    #[test]
    fn zero_peak_probability_never_detects() {
        let m = DetectorModel {
            p_max: 0.0,
            false_positive_rate: 0.0,
            ..Default::default()
        };
        let t = VisibleTarget {
            bbox: BBox::new(0.5, 0.5, 0.1, 0.2),
            apparent_px: 200.0,
            slant: 3.0,
        };
        let mut rng = RngStream::fork(1, Subsystem::Detector);
        for _ in 0..1000 {
            assert!(simulate_detection(&[t, t], &m, &mut rng).is_empty());
        }
    }

    #[test]
    fn false_alarms_are_tagged() {
        let m = DetectorModel {
            false_positive_rate: 1.0,
            ..Default::default()
        };
        let mut rng = RngStream::fork(1, Subsystem::Detector);
        let out = simulate_detection(&[], &m, &mut rng);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].target, None);
    }
}
