use alloc::vec;
use alloc::vec::Vec;

use super::boxes::{encode, iou, BBox, LocOffset};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnchorLabel {
    Negative,
    Positive { gt: usize, loc: LocOffset },
}

impl AnchorLabel {
    pub fn is_positive(&self) -> bool {
        matches!(self, AnchorLabel::Positive { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub labels: Vec<AnchorLabel>,
}

impl MatchResult {
    pub fn positives(&self) -> impl Iterator<Item = (usize, usize, LocOffset)> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| match *l {
                AnchorLabel::Positive { gt, loc } => Some((i, gt, loc)),
                AnchorLabel::Negative => None,
            })
    }

    pub fn positive_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_positive()).count()
    }
}

/// Assigns anchors to ground-truth boxes.
///
/// Every ground truth first claims its highest-IoU anchor that no earlier
/// ground truth claimed (lowest anchor index on ties). Any remaining anchor
/// whose best IoU exceeds `iou_threshold` becomes positive for that best
/// ground truth (lowest GT index on ties). All other anchors are negative.
pub fn match_anchors(anchors: &[BBox], ground_truth: &[BBox], iou_threshold: f64) -> MatchResult {
    let mut labels = vec![AnchorLabel::Negative; anchors.len()];
    if ground_truth.is_empty() || anchors.is_empty() {
        return MatchResult { labels };
    }

    for (i, anchor) in anchors.iter().enumerate() {
        let mut best = (0usize, f64::NEG_INFINITY);
        for (g, gt) in ground_truth.iter().enumerate() {
            let v = iou(anchor, gt);
            if v > best.1 {
                best = (g, v);
            }
        }
        if best.1 > iou_threshold {
            let gt = best.0;
            labels[i] = AnchorLabel::Positive {
                gt,
                loc: encode(anchor, &ground_truth[gt]),
            };
        }
    }

    let mut forced = vec![false; anchors.len()];
    for (g, gt) in ground_truth.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (i, anchor) in anchors.iter().enumerate() {
            if forced[i] {
                continue;
            }
            let v = iou(anchor, gt);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        if let Some((i, _)) = best {
            forced[i] = true;
            labels[i] = AnchorLabel::Positive {
                gt: g,
                loc: encode(&anchors[i], gt),
            };
        }
    }

    MatchResult { labels }
}
