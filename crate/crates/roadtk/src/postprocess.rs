//! Inference-time post-processing: non-maximum suppression and
//! validation-driven per-class confidence thresholds.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::dataset::{ClassLabel, DatasetSplit, Detection, DetectionMap};
use crate::error::{Error, Result};
use crate::metrics::{match_detections, precision_recall_f1, COMPETITION_IOU};

/// Default NMS IoU threshold. The method is standard; the cutoff is a knob.
pub const DEFAULT_NMS_IOU: f64 = 0.5;

/// Classic greedy per-class NMS: repeatedly keep the highest-confidence
/// remaining detection and discard same-class detections overlapping it at
/// `iou_threshold` or more. Cross-class pairs never suppress each other —
/// crack classes overlap legitimately (a longitudinal crack crossing a
/// transverse one). Output is sorted by confidence descending; ties keep
/// input order.
pub fn nms(dets: &[Detection], iou_threshold: f64) -> Result<Vec<Detection>> {
    if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
        return Err(Error::InvalidIouThreshold(iou_threshold));
    }
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].confidence.total_cmp(&dets[a].confidence));

    let mut suppressed = vec![false; dets.len()];
    let mut kept = Vec::new();
    for (rank, &i) in order.iter().enumerate() {
        if suppressed[i] {
            continue;
        }
        kept.push(dets[i]);
        for &j in &order[rank + 1..] {
            if suppressed[j] || dets[j].label != dets[i].label {
                continue;
            }
            if dets[i].bbox.iou(&dets[j].bbox) >= iou_threshold {
                suppressed[j] = true;
            }
        }
    }
    Ok(kept)
}

/// Run [`nms`] image by image over a detection map.
pub fn nms_map(dets: &DetectionMap, iou_threshold: f64) -> Result<DetectionMap> {
    dets.iter()
        .map(|(id, v)| Ok((id.clone(), nms(v, iou_threshold)?)))
        .collect()
}

/// Chosen threshold for one class plus the validation F1 it achieved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdEntry {
    pub threshold: f64,
    /// Validation F1 at `threshold`; `None` when the table was parsed from a
    /// file rather than swept.
    pub f1: Option<f64>,
    /// Set when the class had no detections at all, making every grid value
    /// equivalent.
    pub degenerate: bool,
}

/// Per-class confidence thresholds, always covering all four classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTable {
    entries: BTreeMap<ClassLabel, ThresholdEntry>,
}

impl ThresholdTable {
    pub fn new(entries: BTreeMap<ClassLabel, ThresholdEntry>) -> Result<Self> {
        for class in ClassLabel::ALL {
            if !entries.contains_key(&class) {
                return Err(Error::MissingThreshold(class.name().to_string()));
            }
        }
        Ok(Self { entries })
    }

    /// Same threshold for every class.
    pub fn uniform(threshold: f64) -> Self {
        let entry = ThresholdEntry {
            threshold,
            f1: None,
            degenerate: false,
        };
        Self {
            entries: ClassLabel::ALL.iter().map(|&c| (c, entry)).collect(),
        }
    }

    pub fn get(&self, label: ClassLabel) -> ThresholdEntry {
        self.entries[&label]
    }

    pub fn entries(&self) -> impl Iterator<Item = (ClassLabel, ThresholdEntry)> + '_ {
        self.entries.iter().map(|(&c, &e)| (c, e))
    }

    /// Key-value text form, `D00=0.41` per line. Sweep results carry their
    /// validation F1 as comments, which the parser skips.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (class, entry) in &self.entries {
            if let Some(f1) = entry.f1 {
                out.push_str(&format!("# {class}: validation f1 {f1}"));
                if entry.degenerate {
                    out.push_str(" (degenerate: no detections)");
                }
                out.push('\n');
            }
            out.push_str(&format!("{}={}\n", class, entry.threshold));
        }
        out
    }

    /// Parse the key-value text form. All four classes must be present.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ThresholdLine {
                line: idx + 1,
                msg: "expected CLASS=VALUE".to_string(),
            })?;
            let class = ClassLabel::from_name(key.trim()).map_err(|e| Error::ThresholdLine {
                line: idx + 1,
                msg: e.to_string(),
            })?;
            let threshold: f64 = value.trim().parse().map_err(|_| Error::ThresholdLine {
                line: idx + 1,
                msg: format!("threshold {value:?} is not a number"),
            })?;
            if !(0.0..=1.0).contains(&threshold) {
                return Err(Error::ThresholdLine {
                    line: idx + 1,
                    msg: format!("threshold {threshold} outside [0, 1]"),
                });
            }
            entries.insert(
                class,
                ThresholdEntry {
                    threshold,
                    f1: None,
                    degenerate: false,
                },
            );
        }
        Self::new(entries)
    }
}

impl fmt::Display for ThresholdTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// The default search grid: 0.05 to 0.95 in steps of 0.01.
pub fn default_grid() -> Vec<f64> {
    (5..=95).map(|i| i as f64 / 100.0).collect()
}

/// Pooled F1 for one class over the whole split, counting only that class's
/// detections at or above `conf_threshold`.
fn class_f1(
    split: &DatasetSplit,
    dets: &DetectionMap,
    class: ClassLabel,
    conf_threshold: f64,
) -> f64 {
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_count = 0;
    static EMPTY: Vec<Detection> = Vec::new();
    for record in split.records() {
        let gts: Vec<_> = record
            .boxes
            .iter()
            .filter(|g| g.label == class)
            .copied()
            .collect();
        let kept: Vec<_> = dets
            .get(&record.image_id)
            .unwrap_or(&EMPTY)
            .iter()
            .filter(|d| d.label == class && d.confidence >= conf_threshold)
            .copied()
            .collect();
        let m = match_detections(&gts, &kept, COMPETITION_IOU);
        tp += m.true_positives();
        fp += m.false_positives();
        fn_count += m.false_negatives();
    }
    precision_recall_f1(tp, fp, fn_count).2
}

/// For each class independently, pick the grid value maximizing that class's
/// validation F1; ties go to the lowest threshold (favoring recall on unseen
/// data). The search is exhaustive over the grid.
pub fn sweep_thresholds(
    split: &DatasetSplit,
    dets: &DetectionMap,
    grid: &[f64],
) -> Result<ThresholdTable> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for &value in grid {
        if !(0.0..=1.0).contains(&value) || !value.is_finite() {
            return Err(Error::InvalidGridValue(value));
        }
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();

    let entries: BTreeMap<ClassLabel, ThresholdEntry> = ClassLabel::ALL
        .par_iter()
        .map(|&class| {
            let has_dets = dets.values().any(|v| v.iter().any(|d| d.label == class));
            if !has_dets {
                return (
                    class,
                    ThresholdEntry {
                        threshold: sorted[0],
                        f1: Some(0.0),
                        degenerate: true,
                    },
                );
            }
            let scores: Vec<f64> = sorted
                .par_iter()
                .map(|&t| class_f1(split, dets, class, t))
                .collect();
            let mut best = 0usize;
            for (i, &score) in scores.iter().enumerate() {
                if score > scores[best] {
                    best = i;
                }
            }
            (
                class,
                ThresholdEntry {
                    threshold: sorted[best],
                    f1: Some(scores[best]),
                    degenerate: false,
                },
            )
        })
        .collect();
    ThresholdTable::new(entries)
}

/// Keep each detection iff its confidence is at or above its class threshold.
/// Order is preserved; image keys survive even when emptied.
pub fn apply_thresholds(dets: &DetectionMap, table: &ThresholdTable) -> Result<DetectionMap> {
    Ok(dets
        .iter()
        .map(|(id, v)| {
            let kept = v
                .iter()
                .filter(|d| d.confidence >= table.get(d.label).threshold)
                .copied()
                .collect();
            (id.clone(), kept)
        })
        .collect())
}
