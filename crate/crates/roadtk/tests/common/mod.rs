//! Shared test-side oracles, independent of the library's implementation
//! paths: a pixel-counting IoU for integer boxes, a naive reference
//! evaluator (fresh matching loop + per-true-positive AP enumeration,
//! no envelope integration), and a seeded random micro-instance generator.

// compiled once per integration-test target; not every target uses every item
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use roadtk::dataset::{Detection, DetectionMap, GroundTruthBox, ImageRecord};
use roadtk::{BoundingBox, ClassLabel, DatasetSplit};

pub const ORACLE_IOU_THRESHOLDS: [f64; 10] =
    [0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95];

/// Pixel-counting IoU under the half-open convention; exact for
/// integer-coordinate boxes inside the grid.
pub fn raster_iou(a: &BoundingBox, b: &BoundingBox, grid: u32) -> f64 {
    let covers = |bx: &BoundingBox, x: u32, y: u32| {
        (x as f64) >= bx.xmin()
            && (x as f64) < bx.xmax()
            && (y as f64) >= bx.ymin()
            && (y as f64) < bx.ymax()
    };
    let mut inter = 0u64;
    let mut union = 0u64;
    for y in 0..grid {
        for x in 0..grid {
            let in_a = covers(a, x, y);
            let in_b = covers(b, x, y);
            if in_a && in_b {
                inter += 1;
            }
            if in_a || in_b {
                union += 1;
            }
        }
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Reference IoU written from the definition, independent of the library.
fn iou_ref(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let overlap_w = (a.xmax().min(b.xmax()) - a.xmin().max(b.xmin())).max(0.0);
    let overlap_h = (a.ymax().min(b.ymax()) - a.ymin().max(b.ymin())).max(0.0);
    let inter = overlap_w * overlap_h;
    if inter == 0.0 {
        return 0.0;
    }
    let area_a = (a.xmax() - a.xmin()) * (a.ymax() - a.ymin());
    let area_b = (b.xmax() - b.xmin()) * (b.ymax() - b.ymin());
    inter / (area_a + area_b - inter)
}

fn bucket_of_area(area: f64) -> usize {
    if area < 1024.0 {
        0
    } else if area <= 9216.0 {
        1
    } else {
        2
    }
}

fn bucket_of(b: &BoundingBox) -> usize {
    bucket_of_area((b.xmax() - b.xmin()) * (b.ymax() - b.ymin()))
}

/// Naive greedy matching: confidence-descending, ties by input order, each
/// detection scans all ground truths for the best same-class unmatched one.
/// Returns, per detection, the matched gt index.
fn naive_match(gts: &[GroundTruthBox], dets: &[Detection], threshold: f64) -> Vec<Option<usize>> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&x, &y| dets[y].confidence.total_cmp(&dets[x].confidence));
    let mut taken = vec![false; gts.len()];
    let mut matched = vec![None; dets.len()];
    for &d in &order {
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if taken[g] || gt.label != dets[d].label {
                continue;
            }
            let iou = iou_ref(&dets[d].bbox, &gt.bbox);
            if iou >= threshold && best.is_none_or(|(_, bi)| iou > bi) {
                best = Some((g, iou));
            }
        }
        if let Some((g, _)) = best {
            taken[g] = true;
            matched[d] = Some(g);
        }
    }
    matched
}

/// All-point interpolated AP by per-true-positive enumeration: for the k-th
/// true positive, take the best precision among prefixes holding at least k
/// true positives; average the maxima over the positive count. No envelope,
/// no integration.
fn enumerated_ap(flags: &[(f64, bool)], positives: usize) -> f64 {
    if positives == 0 {
        return 0.0;
    }
    let mut ranked: Vec<(f64, bool)> = flags.to_vec();
    ranked.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut prefix_tp = Vec::with_capacity(ranked.len());
    let mut tp = 0usize;
    for (i, &(_, hit)) in ranked.iter().enumerate() {
        if hit {
            tp += 1;
        }
        prefix_tp.push((tp, tp as f64 / (i + 1) as f64));
    }
    let total_tp = tp;
    let mut sum = 0.0;
    for k in 1..=total_tp {
        let best = prefix_tp
            .iter()
            .filter(|&&(count, _)| count >= k)
            .map(|&(_, precision)| precision)
            .fold(0.0f64, f64::max);
        sum += best;
    }
    sum / positives as f64
}

#[derive(Debug, Clone, Copy)]
pub struct OracleScores {
    pub f1: f64,
    pub ap50: f64,
    pub ap75: f64,
    pub map: f64,
    pub ap_small: f64,
    pub ap_medium: f64,
    pub ap_large: f64,
}

fn class_mean(values: &[Option<f64>]) -> f64 {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.is_empty() {
        0.0
    } else {
        present.iter().sum::<f64>() / present.len() as f64
    }
}

/// The reference evaluator. Conventions follow the documented protocol:
/// pooled micro F1 at IoU 0.5, per-class AP with zero-ground-truth classes
/// excluded from means, size buckets partitioned by ground-truth box size
/// with unmatched detections attributed by their own size.
pub fn oracle_evaluate(split: &DatasetSplit, detections: &DetectionMap) -> OracleScores {
    let empty: Vec<Detection> = Vec::new();
    let images: Vec<(&[GroundTruthBox], &[Detection])> = split
        .records()
        .iter()
        .map(|r| {
            (
                r.boxes.as_slice(),
                detections
                    .get(&r.image_id)
                    .map(|v| v.as_slice())
                    .unwrap_or(&empty),
            )
        })
        .collect();

    // pooled F1 at 0.5
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_count = 0usize;
    for &(gts, dets) in &images {
        let matched = naive_match(gts, dets, 0.5);
        let hits = matched.iter().flatten().count();
        tp += hits;
        fp += dets.len() - hits;
        fn_count += gts.len() - hits;
    }
    let f1 = {
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
        if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        }
    };

    let gt_count_for = |class: ClassLabel| -> usize {
        images
            .iter()
            .map(|&(gts, _)| gts.iter().filter(|g| g.label == class).count())
            .sum()
    };

    let ap_for = |class: ClassLabel, threshold: f64| -> Option<f64> {
        let positives = gt_count_for(class);
        if positives == 0 {
            return None;
        }
        let mut flags = Vec::new();
        for &(gts, dets) in &images {
            let matched = naive_match(gts, dets, threshold);
            for (d, det) in dets.iter().enumerate() {
                if det.label == class {
                    flags.push((det.confidence, matched[d].is_some()));
                }
            }
        }
        Some(enumerated_ap(&flags, positives))
    };

    let mean_ap_at = |threshold: f64| -> f64 {
        let values: Vec<Option<f64>> = ClassLabel::ALL
            .iter()
            .map(|&c| ap_for(c, threshold))
            .collect();
        class_mean(&values)
    };

    let ap50 = mean_ap_at(0.50);
    let ap75 = mean_ap_at(0.75);
    let map = ORACLE_IOU_THRESHOLDS
        .iter()
        .map(|&t| mean_ap_at(t))
        .sum::<f64>()
        / ORACLE_IOU_THRESHOLDS.len() as f64;

    let bucket_ap = |bucket: usize| -> f64 {
        let values: Vec<Option<f64>> = ClassLabel::ALL
            .iter()
            .map(|&class| {
                let positives: usize = images
                    .iter()
                    .map(|&(gts, _)| {
                        gts.iter()
                            .filter(|g| g.label == class && bucket_of(&g.bbox) == bucket)
                            .count()
                    })
                    .sum();
                if positives == 0 {
                    return None;
                }
                let mut flags = Vec::new();
                for &(gts, dets) in &images {
                    let matched = naive_match(gts, dets, 0.5);
                    for (d, det) in dets.iter().enumerate() {
                        if det.label != class {
                            continue;
                        }
                        match matched[d] {
                            Some(g) => {
                                if bucket_of(&gts[g].bbox) == bucket {
                                    flags.push((det.confidence, true));
                                }
                            }
                            None => {
                                if bucket_of(&det.bbox) == bucket {
                                    flags.push((det.confidence, false));
                                }
                            }
                        }
                    }
                }
                Some(enumerated_ap(&flags, positives))
            })
            .collect();
        class_mean(&values)
    };

    OracleScores {
        f1,
        ap50,
        ap75,
        map,
        ap_small: bucket_ap(0),
        ap_medium: bucket_ap(1),
        ap_large: bucket_ap(2),
    }
}

fn random_box(rng: &mut ChaCha8Rng, width: u32, height: u32) -> BoundingBox {
    let x0 = rng.random_range(0..width - 1);
    let y0 = rng.random_range(0..height - 1);
    let w = rng.random_range(1..=(width - x0).min(120));
    let h = rng.random_range(1..=(height - y0).min(120));
    BoundingBox::new(x0 as f64, y0 as f64, (x0 + w) as f64, (y0 + h) as f64).unwrap()
}

fn random_class(rng: &mut ChaCha8Rng) -> ClassLabel {
    ClassLabel::ALL[rng.random_range(0..4)]
}

/// Jitter an existing box by up to +/-10 px per edge, clipped to the image.
fn jitter_box(rng: &mut ChaCha8Rng, b: &BoundingBox, width: u32, height: u32) -> BoundingBox {
    let mut wiggle = |v: f64| (v + rng.random_range(-10..=10) as f64).max(0.0);
    let x0 = wiggle(b.xmin()).min(width as f64 - 1.0);
    let y0 = wiggle(b.ymin()).min(height as f64 - 1.0);
    let x1 = wiggle(b.xmax()).clamp(x0 + 1.0, width as f64);
    let y1 = wiggle(b.ymax()).clamp(y0 + 1.0, height as f64);
    BoundingBox::new(x0, y0, x1, y1).unwrap()
}

/// One random micro-instance: up to 8 images, up to 6 ground-truth boxes and
/// 6 detections per image, confidences drawn continuously (ties have
/// probability zero). About half the detections are jittered copies of a
/// ground-truth box, so instances carry a realistic TP/FP mix.
pub fn random_instance(seed: u64) -> (DatasetSplit, DetectionMap) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_images = rng.random_range(1..=8);
    let mut records = Vec::new();
    let mut detections = DetectionMap::new();
    for i in 0..n_images {
        let width = rng.random_range(80..=400);
        let height = rng.random_range(80..=400);
        let image_id = format!("img_{i:03}");
        let n_gts = rng.random_range(0..=6);
        let boxes: Vec<GroundTruthBox> = (0..n_gts)
            .map(|_| GroundTruthBox {
                bbox: random_box(&mut rng, width, height),
                label: random_class(&mut rng),
            })
            .collect();
        let n_dets = rng.random_range(0..=6);
        let dets: Vec<Detection> = (0..n_dets)
            .map(|_| {
                let (bbox, label) = if !boxes.is_empty() && rng.random::<f64>() < 0.5 {
                    let gt = boxes[rng.random_range(0..boxes.len())];
                    let label = if rng.random::<f64>() < 0.8 {
                        gt.label
                    } else {
                        random_class(&mut rng)
                    };
                    (jitter_box(&mut rng, &gt.bbox, width, height), label)
                } else {
                    (random_box(&mut rng, width, height), random_class(&mut rng))
                };
                Detection {
                    bbox,
                    label,
                    confidence: rng.random::<f64>(),
                }
            })
            .collect();
        detections.insert(image_id.clone(), dets);
        records.push(ImageRecord::new(image_id, width, height, boxes).unwrap());
    }
    let split = DatasetSplit::new("micro", records).unwrap();
    (split, detections)
}
