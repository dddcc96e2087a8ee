//! SSD box machinery, the downward camera, and the stochastic detector.

pub mod anchors;
pub mod boxes;
pub mod camera;
pub mod detector;
pub mod matching;
pub mod nms;
pub mod ssd;

pub use anchors::{generate_anchors, FeatureMapSpec};
pub use boxes::{decode, encode, iou, BBox, Detection, LocOffset};
pub use camera::{project_victim, CameraModel, Projection};
pub use detector::{simulate_detection, DetectorModel, SimulatedDetection, VisibleTarget};
pub use matching::{match_anchors, AnchorLabel, MatchResult};
pub use nms::nms;
pub use ssd::{SsdConfig, SsdHead};
