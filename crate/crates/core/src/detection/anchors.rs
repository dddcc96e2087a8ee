use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::boxes::BBox;
use crate::error::{Error, Result};

/// One level of the anchor pyramid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureMapSpec {
    /// Cells per side.
    pub grid: usize,
    /// Box sizes as a fraction of the image.
    pub scales: Vec<f64>,
    /// Width / height ratios.
    pub aspect_ratios: Vec<f64>,
}

impl FeatureMapSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid == 0 {
            return Err(Error::InvalidConfig("feature map grid must be >= 1".into()));
        }
        let positive = |v: &[f64]| !v.is_empty() && v.iter().all(|x| *x > 0.0 && x.is_finite());
        if !positive(&self.scales) || !positive(&self.aspect_ratios) {
            return Err(Error::InvalidConfig(
                "feature map scales and aspect_ratios must be non-empty and positive".into(),
            ));
        }
        Ok(())
    }

    pub fn anchors_per_cell(&self) -> usize {
        self.scales.len() * self.aspect_ratios.len()
    }
}

/// The two-level pyramid used by default: 8x8 and 4x4 maps, four anchors per cell.
pub fn default_pyramid() -> Vec<FeatureMapSpec> {
    alloc::vec![
        FeatureMapSpec {
            grid: 8,
            scales: alloc::vec![0.15, 0.3],
            aspect_ratios: alloc::vec![0.5, 1.0]
        },
        FeatureMapSpec {
            grid: 4,
            scales: alloc::vec![0.45, 0.7],
            aspect_ratios: alloc::vec![0.5, 1.0]
        },
    ]
}

/// Anchors ordered by map, then row-major cell, then scale, then ratio.
pub fn generate_anchors(specs: &[FeatureMapSpec]) -> Vec<BBox> {
    let total = specs
        .iter()
        .map(|s| s.grid * s.grid * s.anchors_per_cell())
        .sum();
    let mut out = Vec::with_capacity(total);
    for spec in specs {
        let g = spec.grid as f64;
        for row in 0..spec.grid {
            for col in 0..spec.grid {
                let c_x = (col as f64 + 0.5) / g;
                let c_y = (row as f64 + 0.5) / g;
                for &s in &spec.scales {
                    for &r in &spec.aspect_ratios {
                        let sr = libm::sqrt(r);
                        out.push(BBox::new(c_x, c_y, s * sr, s / sr));
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn single_map_count() {
        let spec = FeatureMapSpec {
            grid: 8,
            scales: vec![0.2],
            aspect_ratios: vec![1.0],
        };
        assert_eq!(generate_anchors(&[spec]).len(), 64);
    }

    #[test]
    fn default_pyramid_has_320_anchors() {
        let pyramid = default_pyramid();
        assert!(pyramid.iter().all(|s| s.anchors_per_cell() == 4));
        assert_eq!(generate_anchors(&pyramid).len(), 320);
    }

    #[test]
    fn first_cell_center() {
        let spec = FeatureMapSpec {
            grid: 4,
            scales: vec![0.2],
            aspect_ratios: vec![1.0],
        };
        assert_eq!(
            generate_anchors(&[spec])[0],
            BBox::new(0.125, 0.125, 0.2, 0.2)
        );
    }

    #[test]
    fn ordering_is_row_major_then_scale_then_ratio() {
        let spec = FeatureMapSpec {
            grid: 2,
            scales: vec![0.1, 0.2],
            aspect_ratios: vec![1.0, 4.0],
        };
        let a = generate_anchors(&[spec]);
        assert_eq!(a[1], BBox::new(0.25, 0.25, 0.2, 0.05));
        assert_eq!(a[2], BBox::new(0.25, 0.25, 0.2, 0.2));
        // Second cell moves along x first.
        assert_eq!((a[4].c_x, a[4].c_y), (0.75, 0.25));
        assert_eq!((a[8].c_x, a[8].c_y), (0.25, 0.75));
    }

    #[test]
    fn count_formula() {
        let specs = vec![
            FeatureMapSpec {
                grid: 5,
                scales: vec![0.1, 0.2, 0.3],
                aspect_ratios: vec![1.0, 2.0],
            },
            FeatureMapSpec {
                grid: 3,
                scales: vec![0.5],
                aspect_ratios: vec![0.5, 1.0, 2.0],
            },
        ];
        assert_eq!(generate_anchors(&specs).len(), 25 * 6 + 9 * 3);
    }
}
