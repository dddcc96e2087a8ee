use alloc::vec::Vec;

use super::boxes::{iou, Detection};

/// Greedy non-maximum suppression.
///
/// Candidates are visited by descending confidence (input order on ties);
/// each kept box suppresses every later candidate with IoU above the
/// threshold. Output is in keep order.
pub fn nms(detections: &[Detection], iou_threshold: f64) -> Vec<Detection> {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| detections[b].conf.total_cmp(&detections[a].conf));

    let mut kept: Vec<Detection> = Vec::new();
    for idx in order {
        let cand = &detections[idx];
        if kept
            .iter()
            .all(|k| iou(&k.bbox, &cand.bbox) <= iou_threshold)
        {
            kept.push(*cand);
        }
    }
    kept
}
