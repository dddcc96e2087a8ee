//! Multibox head: spreads each raw detection over its matched anchors as
//! noisy loc regressions, then collapses them with NMS.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::anchors::{default_pyramid, generate_anchors, FeatureMapSpec};
use super::boxes::{decode, iou, BBox, Detection, LocOffset};
use super::matching::match_anchors;
use super::nms::nms;
use crate::error::Result;
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsdConfig {
    pub feature_maps: Vec<FeatureMapSpec>,
    pub match_iou: f64,
    pub nms_iou: f64,
    /// Noise on each anchor's loc regression, normalized units.
    pub loc_noise_sigma: f64,
    /// Confidence lost per unit of (1 - IoU) between anchor and target.
    pub conf_decay: f64,
    /// Detections below this confidence are dropped after NMS.
    pub min_conf: f64,
}

impl Default for SsdConfig {
    fn default() -> Self {
        Self {
            feature_maps: default_pyramid(),
            match_iou: 0.5,
            nms_iou: 0.45,
            loc_noise_sigma: 0.003,
            conf_decay: 0.3,
            min_conf: 0.5,
        }
    }
}

impl SsdConfig {
    pub fn validate(&self) -> Result<()> {
        for spec in &self.feature_maps {
            spec.validate()?;
        }
        if self.feature_maps.is_empty() {
            return Err(crate::error::Error::InvalidConfig(
                "ssd.feature_maps must not be empty".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SsdHead {
    pub config: SsdConfig,
    pub anchors: Vec<BBox>,
}

impl SsdHead {
    pub fn new(config: SsdConfig) -> Self {
        let anchors = generate_anchors(&config.feature_maps);
        Self { config, anchors }
    }

    /// Anchor-level candidates for a set of raw detections.
    pub fn candidates(&self, raw: &[Detection], rng: &mut RngStream) -> Vec<Detection> {
        let mut out = Vec::new();
        let sigma = self.config.loc_noise_sigma;
        for det in raw {
            let matched = match_anchors(&self.anchors, &[det.bbox], self.config.match_iou);
            for (i, _, loc) in matched.positives() {
                let noisy = LocOffset {
                    d_cx: loc.d_cx + rng.gaussian(sigma),
                    d_cy: loc.d_cy + rng.gaussian(sigma),
                    d_w: loc.d_w + rng.gaussian(sigma),
                    d_h: loc.d_h + rng.gaussian(sigma),
                };
                let anchor = &self.anchors[i];
                if let Ok(bbox) = decode(anchor, &noisy) {
                    let overlap = iou(anchor, &det.bbox);
                    let conf = (det.conf * (1.0 - self.config.conf_decay * (1.0 - overlap)))
                        .clamp(0.0, 1.0);
                    out.push(Detection { bbox, conf });
                }
            }
        }
        out
    }

    /// Candidates, then NMS, then the confidence floor.
    pub fn infer(&self, raw: &[Detection], rng: &mut RngStream) -> Vec<Detection> {
        let cands = self.candidates(raw, rng);
        nms(&cands, self.config.nms_iou)
            .into_iter()
            .filter(|d| d.conf >= self.config.min_conf)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Subsystem;

    #[test]
    fn one_raw_detection_survives_as_one_box() {
        let head = SsdHead::new(SsdConfig::default());
        let mut rng = RngStream::fork(5, Subsystem::Detector);
        let raw = Detection {
            bbox: BBox::new(0.42, 0.55, 0.16, 0.43),
            conf: 0.85,
        };
        let cands = head.candidates(&[raw], &mut rng);
        assert!(!cands.is_empty());
        let out = head.infer(&[raw], &mut rng);
        assert_eq!(out.len(), 1);
        assert!((out[0].bbox.c_x - raw.bbox.c_x).abs() < 0.02);
        assert!((out[0].bbox.c_y - raw.bbox.c_y).abs() < 0.02);
    }

    #[test]
    fn noiseless_head_reproduces_raw_box() {
        let cfg = SsdConfig {
            loc_noise_sigma: 0.0,
            ..Default::default()
        };
        let head = SsdHead::new(cfg);
        let mut rng = RngStream::fork(5, Subsystem::Detector);
        let raw = Detection {
            bbox: BBox::new(0.3, 0.7, 0.2, 0.35),
            conf: 0.9,
        };
        let out = head.infer(&[raw], &mut rng);
        assert_eq!(out.len(), 1);
        assert!((out[0].bbox.c_x - 0.3).abs() < 1e-12);
        assert!((out[0].bbox.h - 0.35).abs() < 1e-12);
    }
}
