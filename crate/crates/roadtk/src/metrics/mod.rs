//! Detection evaluation: competition F1 plus the COCO-style AP family.
//!
//! F1 is pooled (micro): a single tp/fp/fn triple across all images and
//! classes at the competition IoU. AP is computed per class from a global
//! confidence sweep, then averaged over classes; mAP additionally averages
//! over the ten IoU thresholds 0.50:0.05:0.95. Size-restricted APs partition
//! ground truth by box area; a false positive, having no ground truth, is
//! attributed to a bucket by its own size. Classes without ground-truth
//! instances are excluded from class means rather than scored zero.

mod ap;
mod breakdown;
mod matching;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::dataset::{ClassLabel, DatasetSplit, Detection, DetectionMap, GroundTruthBox};
use crate::error::{Error, Result};
use crate::geometry::SizeBucket;

pub use ap::{average_precision, PrCurve, PrPoint};
pub use breakdown::{error_breakdown, ErrorBreakdown, DEFAULT_FN_AREA_THRESHOLD};
pub use matching::{match_detections, MatchPair, MatchResult};

/// Minimum IoU for a correct detection under the competition rule.
pub const COMPETITION_IOU: f64 = 0.5;

/// IoU thresholds averaged by mAP: 0.50 to 0.95, step 0.05.
pub const IOU_THRESHOLDS: [f64; 10] = [0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95];

/// Precision, recall, and F1 from pooled counts. Each value is defined as 0
/// when its denominator is 0, which keeps empty predictions scoreable.
pub fn precision_recall_f1(tp: usize, fp: usize, fn_count: usize) -> (f64, f64, f64) {
    let precision = if tp + fp > 0 {
        tp as f64 / (tp + fp) as f64
    } else {
        0.0
    };
    let recall = if tp + fn_count > 0 {
        tp as f64 / (tp + fn_count) as f64
    } else {
        0.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    (precision, recall, f1)
}

/// Evaluation knobs; the defaults reproduce the competition setup.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    /// IoU threshold for the pooled F1 and the error breakdown.
    pub f1_iou: f64,
    /// Area cutoff for the tiny-FN error category.
    pub fn_area_threshold: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            f1_iou: COMPETITION_IOU,
            fn_area_threshold: DEFAULT_FN_AREA_THRESHOLD,
        }
    }
}

/// Per-class slice of the report, at the F1 IoU threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub gt_count: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub ap50: f64,
}

/// One stored precision-recall curve (per class, per IoU threshold).
#[derive(Debug, Clone, PartialEq)]
pub struct PrCurveEntry {
    pub label: ClassLabel,
    pub iou: f64,
    pub curve: PrCurve,
}

/// The full metric suite for one split + detection set.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub f1_iou: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// AP averaged over classes and over IoU 0.50:0.05:0.95.
    pub map: f64,
    pub ap50: f64,
    pub ap75: f64,
    pub ap_small: f64,
    pub ap_medium: f64,
    pub ap_large: f64,
    pub per_class: BTreeMap<ClassLabel, ClassReport>,
    pub errors: ErrorBreakdown,
    pub curves: Vec<PrCurveEntry>,
}

/// Evaluate with the default (competition) configuration.
pub fn evaluate(split: &DatasetSplit, detections: &DetectionMap) -> Result<EvalReport> {
    evaluate_with(split, detections, &EvalConfig::default())
}

struct ImageEval {
    det_labels: Vec<ClassLabel>,
    det_confs: Vec<f64>,
    det_buckets: Vec<SizeBucket>,
    gt_labels: Vec<ClassLabel>,
    gt_buckets: Vec<SizeBucket>,
    /// matched_at[t][d] = matched gt index at IOU_THRESHOLDS[t].
    matched_at: Vec<Vec<Option<usize>>>,
    f1_match: MatchResult,
    breakdown: ErrorBreakdown,
}

fn evaluate_image(gts: &[GroundTruthBox], dets: &[Detection], config: &EvalConfig) -> ImageEval {
    let matrix = matching::iou_matrix(dets, gts);
    let matched_at = IOU_THRESHOLDS
        .iter()
        .map(|&t| matching::greedy_from_matrix(dets, gts, &matrix, t).matched_gt_of_det(dets.len()))
        .collect();
    let f1_match = matching::greedy_from_matrix(dets, gts, &matrix, config.f1_iou);
    let breakdown = error_breakdown(&f1_match, gts, dets, config.fn_area_threshold);
    ImageEval {
        det_labels: dets.iter().map(|d| d.label).collect(),
        det_confs: dets.iter().map(|d| d.confidence).collect(),
        det_buckets: dets.iter().map(|d| d.bbox.size_bucket()).collect(),
        gt_labels: gts.iter().map(|g| g.label).collect(),
        gt_buckets: gts.iter().map(|g| g.bbox.size_bucket()).collect(),
        matched_at,
        f1_match,
        breakdown,
    }
}

fn class_mean(values: &[Option<f64>]) -> f64 {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.is_empty() {
        0.0
    } else {
        present.iter().sum::<f64>() / present.len() as f64
    }
}

/// Evaluate detections against a split. Every detection key must name an
/// image of the split.
pub fn evaluate_with(
    split: &DatasetSplit,
    detections: &DetectionMap,
    config: &EvalConfig,
) -> Result<EvalReport> {
    for image_id in detections.keys() {
        if split.get(image_id).is_none() {
            return Err(Error::UnknownImageId(image_id.clone()));
        }
    }

    static EMPTY: Vec<Detection> = Vec::new();
    let per_image: Vec<ImageEval> = split
        .records()
        .par_iter()
        .map(|record| {
            let dets = detections.get(&record.image_id).unwrap_or(&EMPTY);
            evaluate_image(&record.boxes, dets, config)
        })
        .collect();

    // pooled counts and error categories at the F1 threshold
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_count = 0;
    let mut errors = ErrorBreakdown::empty(config.fn_area_threshold);
    for image in &per_image {
        tp += image.f1_match.true_positives();
        fp += image.f1_match.false_positives();
        fn_count += image.f1_match.false_negatives();
        errors.merge(&image.breakdown);
    }
    let (precision, recall, f1) = precision_recall_f1(tp, fp, fn_count);

    // ground-truth totals per class
    let gt_totals: BTreeMap<ClassLabel, usize> = ClassLabel::ALL
        .iter()
        .map(|&c| {
            let count = per_image
                .iter()
                .map(|im| im.gt_labels.iter().filter(|&&l| l == c).count())
                .sum();
            (c, count)
        })
        .collect();

    // per-class AP at each IoU threshold, from a global confidence sweep
    let mut curves = Vec::with_capacity(ClassLabel::ALL.len() * IOU_THRESHOLDS.len());
    let mut ap_by_class_threshold: BTreeMap<ClassLabel, Vec<f64>> = BTreeMap::new();
    for &class in &ClassLabel::ALL {
        let positives = gt_totals[&class];
        let mut aps = Vec::with_capacity(IOU_THRESHOLDS.len());
        for (t_idx, &iou) in IOU_THRESHOLDS.iter().enumerate() {
            let mut ranked = Vec::new();
            for image in &per_image {
                for d in 0..image.det_labels.len() {
                    if image.det_labels[d] == class {
                        ranked.push((image.det_confs[d], image.matched_at[t_idx][d].is_some()));
                    }
                }
            }
            let curve = PrCurve::from_ranked(&ranked, positives);
            aps.push(average_precision(&curve));
            curves.push(PrCurveEntry {
                label: class,
                iou,
                curve,
            });
        }
        ap_by_class_threshold.insert(class, aps);
    }

    let ap_at = |t_idx: usize| -> f64 {
        let values: Vec<Option<f64>> = ClassLabel::ALL
            .iter()
            .map(|c| (gt_totals[c] > 0).then(|| ap_by_class_threshold[c][t_idx]))
            .collect();
        class_mean(&values)
    };
    let ap50 = ap_at(0);
    let ap75 = ap_at(5);
    let map = (0..IOU_THRESHOLDS.len()).map(ap_at).sum::<f64>() / IOU_THRESHOLDS.len() as f64;

    // size-restricted AP, pinned at IoU 0.50 like AP50: ground truth
    // partitioned by its bucket; matched detections follow their ground
    // truth, unmatched ones fall in their own bucket
    let bucket_ap = |bucket: SizeBucket| -> f64 {
        let values: Vec<Option<f64>> = ClassLabel::ALL
            .iter()
            .map(|&class| {
                let positives: usize = per_image
                    .iter()
                    .map(|im| {
                        (0..im.gt_labels.len())
                            .filter(|&g| im.gt_labels[g] == class && im.gt_buckets[g] == bucket)
                            .count()
                    })
                    .sum();
                if positives == 0 {
                    return None;
                }
                let mut ranked = Vec::new();
                for image in &per_image {
                    for d in 0..image.det_labels.len() {
                        if image.det_labels[d] != class {
                            continue;
                        }
                        match image.matched_at[0][d] {
                            Some(g) => {
                                if image.gt_buckets[g] == bucket {
                                    ranked.push((image.det_confs[d], true));
                                }
                            }
                            None => {
                                if image.det_buckets[d] == bucket {
                                    ranked.push((image.det_confs[d], false));
                                }
                            }
                        }
                    }
                }
                Some(average_precision(&PrCurve::from_ranked(&ranked, positives)))
            })
            .collect();
        class_mean(&values)
    };
    let ap_small = bucket_ap(SizeBucket::Small);
    let ap_medium = bucket_ap(SizeBucket::Medium);
    let ap_large = bucket_ap(SizeBucket::Large);

    // per-class pooled counts at the F1 threshold
    let mut per_class = BTreeMap::new();
    for &class in &ClassLabel::ALL {
        let mut ctp = 0;
        let mut cfp = 0;
        let mut cfn = 0;
        for image in &per_image {
            ctp += image
                .f1_match
                .pairs
                .iter()
                .filter(|p| image.det_labels[p.det_idx] == class)
                .count();
            cfp += image
                .f1_match
                .unmatched_dets
                .iter()
                .filter(|&&d| image.det_labels[d] == class)
                .count();
            cfn += image
                .f1_match
                .unmatched_gts
                .iter()
                .filter(|&&g| image.gt_labels[g] == class)
                .count();
        }
        let (cp, cr, cf1) = precision_recall_f1(ctp, cfp, cfn);
        per_class.insert(
            class,
            ClassReport {
                gt_count: gt_totals[&class],
                true_positives: ctp,
                false_positives: cfp,
                false_negatives: cfn,
                precision: cp,
                recall: cr,
                f1: cf1,
                ap50: ap_by_class_threshold[&class][0],
            },
        );
    }

    Ok(EvalReport {
        f1_iou: config.f1_iou,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_count,
        precision,
        recall,
        f1,
        map,
        ap50,
        ap75,
        ap_small,
        ap_medium,
        ap_large,
        per_class,
        errors,
        curves,
    })
}

impl EvalReport {
    /// CSV form: `metric,value` rows, global metrics first, then per-class.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        let mut row = |k: &str, v: String| out.push_str(&format!("{k},{v}\n"));
        row("tp", self.true_positives.to_string());
        row("fp", self.false_positives.to_string());
        row("fn", self.false_negatives.to_string());
        row("precision", format!("{}", self.precision));
        row("recall", format!("{}", self.recall));
        row("f1", format!("{}", self.f1));
        row("map", format!("{}", self.map));
        row("ap50", format!("{}", self.ap50));
        row("ap75", format!("{}", self.ap75));
        row("ap_small", format!("{}", self.ap_small));
        row("ap_medium", format!("{}", self.ap_medium));
        row("ap_large", format!("{}", self.ap_large));
        for (label, class) in &self.per_class {
            row(&format!("f1_{label}"), format!("{}", class.f1));
            row(&format!("ap50_{label}"), format!("{}", class.ap50));
        }
        row("merged_box_fp", self.errors.merged_box_fp.to_string());
        row("other_fp", self.errors.other_fp.to_string());
        row("tiny_fn", self.errors.tiny_fn.to_string());
        row("other_fn", self.errors.other_fn.to_string());
        out
    }

    /// PR curves as CSV with `class,iou,recall,precision` rows.
    pub fn pr_curves_csv(&self) -> String {
        let mut out = String::from("class,iou,recall,precision\n");
        for entry in &self.curves {
            for point in &entry.curve.points {
                out.push_str(&format!(
                    "{},{:.2},{},{}\n",
                    entry.label, entry.iou, point.recall, point.precision
                ));
            }
        }
        out
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "pooled @ IoU {:.2}: tp {}  fp {}  fn {}",
            self.f1_iou, self.true_positives, self.false_positives, self.false_negatives
        )?;
        writeln!(
            f,
            "precision {:.4}  recall {:.4}  f1 {:.4}",
            self.precision, self.recall, self.f1
        )?;
        writeln!(
            f,
            "mAP@[.50:.95] {:.4}  AP50 {:.4}  AP75 {:.4}",
            self.map, self.ap50, self.ap75
        )?;
        writeln!(
            f,
            "AP by size: small {:.4}  medium {:.4}  large {:.4}",
            self.ap_small, self.ap_medium, self.ap_large
        )?;
        writeln!(
            f,
            "{:<6} {:>6} {:>6} {:>6} {:>6} {:>8} {:>8}",
            "class", "gt", "tp", "fp", "fn", "f1", "ap50"
        )?;
        for (label, class) in &self.per_class {
            writeln!(
                f,
                "{:<6} {:>6} {:>6} {:>6} {:>6} {:>8.4} {:>8.4}",
                label.name(),
                class.gt_count,
                class.true_positives,
                class.false_positives,
                class.false_negatives,
                class.f1,
                class.ap50
            )?;
        }
        writeln!(
            f,
            "errors: merged-box fp {}  other fp {}  tiny fn {} (area < {})  other fn {}",
            self.errors.merged_box_fp,
            self.errors.other_fp,
            self.errors.tiny_fn,
            self.errors.fn_area_threshold,
            self.errors.other_fn
        )
    }
}
