//! Greedy confidence-ordered matching of detections to ground truth.
//!
//! The protocol is the de-facto challenge standard: detections are visited in
//! descending confidence order (ties broken by input index), and each claims
//! the highest-IoU unmatched ground-truth box of the same class with IoU at
//! or above the threshold. Matching is one-to-one.

use crate::dataset::{Detection, GroundTruthBox};

/// One matched (detection, ground truth) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    pub det_idx: usize,
    pub gt_idx: usize,
    pub iou: f64,
}

/// Outcome of matching one image's detections against its ground truth.
/// `pairs` is in match order (confidence descending); the unmatched index
/// lists are ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub threshold: f64,
    pub pairs: Vec<MatchPair>,
    pub unmatched_dets: Vec<usize>,
    pub unmatched_gts: Vec<usize>,
}

impl MatchResult {
    pub fn true_positives(&self) -> usize {
        self.pairs.len()
    }

    pub fn false_positives(&self) -> usize {
        self.unmatched_dets.len()
    }

    pub fn false_negatives(&self) -> usize {
        self.unmatched_gts.len()
    }

    /// For each detection index, the matched ground-truth index if any.
    pub fn matched_gt_of_det(&self, det_count: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; det_count];
        for pair in &self.pairs {
            out[pair.det_idx] = Some(pair.gt_idx);
        }
        out
    }
}

/// Indices 0..n sorted by confidence descending, ties by index ascending.
pub(crate) fn confidence_order(dets: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].confidence.total_cmp(&dets[a].confidence));
    order
}

pub(crate) fn iou_matrix(dets: &[Detection], gts: &[GroundTruthBox]) -> Vec<Vec<f64>> {
    dets.iter()
        .map(|d| gts.iter().map(|g| d.bbox.iou(&g.bbox)).collect())
        .collect()
}

pub(crate) fn greedy_from_matrix(
    dets: &[Detection],
    gts: &[GroundTruthBox],
    matrix: &[Vec<f64>],
    iou_threshold: f64,
) -> MatchResult {
    let mut gt_taken = vec![false; gts.len()];
    let mut det_matched = vec![false; dets.len()];
    let mut pairs = Vec::new();

    for &d in &confidence_order(dets) {
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if gt_taken[g] || gt.label != dets[d].label {
                continue;
            }
            let iou = matrix[d][g];
            if iou < iou_threshold {
                continue;
            }
            // strict greater keeps the lowest gt index on IoU ties
            if best.is_none_or(|(_, b)| iou > b) {
                best = Some((g, iou));
            }
        }
        if let Some((g, iou)) = best {
            gt_taken[g] = true;
            det_matched[d] = true;
            pairs.push(MatchPair {
                det_idx: d,
                gt_idx: g,
                iou,
            });
        }
    }

    MatchResult {
        threshold: iou_threshold,
        pairs,
        unmatched_dets: (0..dets.len()).filter(|&d| !det_matched[d]).collect(),
        unmatched_gts: (0..gts.len()).filter(|&g| !gt_taken[g]).collect(),
    }
}

/// Match one image's detections to its ground-truth boxes at the given IoU
/// threshold (in `(0, 1]`).
pub fn match_detections(
    gts: &[GroundTruthBox],
    dets: &[Detection],
    iou_threshold: f64,
) -> MatchResult {
    let matrix = iou_matrix(dets, gts);
    greedy_from_matrix(dets, gts, &matrix, iou_threshold)
}
