//! Error-category breakdown of false positives and false negatives.
//!
//! Two failure modes dominate qualitative review of crack detectors: a single
//! predicted box spanning several closely annotated ground-truth boxes (the
//! prediction overlaps each of them, but below the match threshold), and
//! misses on very small boxes. The thresholds here are configurable because
//! the source analysis gives the FN area cutoff without explicit units; the
//! default treats it as square pixels.

use crate::dataset::{Detection, GroundTruthBox};
use crate::metrics::MatchResult;

/// Default area (px^2) under which a missed ground-truth box counts as tiny.
pub const DEFAULT_FN_AREA_THRESHOLD: f64 = 600.0;

/// Category counts; `merged_box_fp + other_fp` equals the total FP count of
/// the match, and likewise for FNs.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBreakdown {
    pub merged_box_fp: usize,
    pub other_fp: usize,
    pub tiny_fn: usize,
    pub other_fn: usize,
    pub fn_area_threshold: f64,
}

impl ErrorBreakdown {
    pub fn empty(fn_area_threshold: f64) -> Self {
        Self {
            merged_box_fp: 0,
            other_fp: 0,
            tiny_fn: 0,
            other_fn: 0,
            fn_area_threshold,
        }
    }

    pub fn total_fp(&self) -> usize {
        self.merged_box_fp + self.other_fp
    }

    pub fn total_fn(&self) -> usize {
        self.tiny_fn + self.other_fn
    }

    pub fn merge(&mut self, other: &ErrorBreakdown) {
        self.merged_box_fp += other.merged_box_fp;
        self.other_fp += other.other_fp;
        self.tiny_fn += other.tiny_fn;
        self.other_fn += other.other_fn;
    }
}

/// Categorize one image's unmatched detections and ground truths.
///
/// A false positive is `merged-box` when it overlaps at least two same-class
/// ground-truth boxes, each at an IoU strictly inside `(0, threshold)` — the
/// signature of one joint box drawn over several adjacent annotations. A
/// false negative is `tiny` when the missed box's area is below
/// `fn_area_threshold`.
pub fn error_breakdown(
    matched: &MatchResult,
    gts: &[GroundTruthBox],
    dets: &[Detection],
    fn_area_threshold: f64,
) -> ErrorBreakdown {
    let mut out = ErrorBreakdown::empty(fn_area_threshold);
    for &d in &matched.unmatched_dets {
        let det = &dets[d];
        let near_misses = gts
            .iter()
            .filter(|gt| gt.label == det.label)
            .map(|gt| det.bbox.iou(&gt.bbox))
            .filter(|&iou| iou > 0.0 && iou < matched.threshold)
            .count();
        if near_misses >= 2 {
            out.merged_box_fp += 1;
        } else {
            out.other_fp += 1;
        }
    }
    for &g in &matched.unmatched_gts {
        if gts[g].bbox.area() < fn_area_threshold {
            out.tiny_fn += 1;
        } else {
            out.other_fn += 1;
        }
    }
    out
}
