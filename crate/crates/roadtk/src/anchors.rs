//! Anchor aspect-ratio search: 1-D k-means over ground-truth box shapes.
//!
//! Ratio space is multiplicative — 0.5 and 2.0 are mirror shapes — so the
//! clustering runs over `log2(w/h)`, where the Euclidean objective is
//! meaningful and the result is invariant under uniform box scaling.
//! Initialization is k-means++ from an explicit seed; reproducibility is
//! worth more here than the last fraction of clustering quality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::DatasetSplit;
use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

/// Ratio count used for the crack-detection configuration; larger models use
/// eight.
pub const DEFAULT_RATIO_COUNT: usize = 7;

const CONVERGENCE_SHIFT: f64 = 1e-6;
const MAX_ITERATIONS: usize = 300;

/// The clustered aspect ratios plus convergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorRatioSet {
    /// Cluster-center aspect ratios (w/h), sorted ascending, length `k`.
    pub ratios: Vec<f64>,
    pub k: usize,
    /// Mean IoU between each box shape and its assigned anchor ratio,
    /// comparing equal-area boxes of the two ratios.
    pub mean_ratio_iou: f64,
    /// Lloyd iterations executed.
    pub iterations: usize,
    /// Within-cluster variance after each iteration; non-increasing.
    pub objective_history: Vec<f64>,
}

/// IoU of two concentric, equal-area boxes with aspect ratios `a` and `b`.
fn ratio_iou(a: f64, b: f64) -> f64 {
    let s = (a.min(b) / a.max(b)).sqrt();
    s / (2.0 - s)
}

fn nearest(centroids: &[f64], value: f64) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, &c) in centroids.iter().enumerate() {
        let d = (value - c) * (value - c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    (best, best_d)
}

fn kmeans_plus_plus_init(features: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(features[rng.random_range(0..features.len())]);
    while centroids.len() < k {
        let weights: Vec<f64> = features.iter().map(|&f| nearest(&centroids, f).1).collect();
        let total: f64 = weights.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = features.len() - 1;
            for (i, &w) in weights.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            features[chosen]
        } else {
            // every remaining point coincides with a centroid
            features[rng.random_range(0..features.len())]
        };
        centroids.push(next);
    }
    centroids
}

/// Cluster box aspect ratios into `k` anchor ratios.
pub fn kmeans_ratios(boxes: &[BoundingBox], k: usize, seed: u64) -> Result<AnchorRatioSet> {
    if k == 0 {
        return Err(Error::ZeroClusters);
    }
    if boxes.len() < k {
        return Err(Error::NotEnoughBoxes {
            k,
            boxes: boxes.len(),
        });
    }
    let features: Vec<f64> = boxes.iter().map(|b| b.aspect_ratio().log2()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_plus_plus_init(&features, k, &mut rng);

    let mut assignment = vec![0usize; features.len()];
    let mut objective_history = Vec::new();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        for (i, &f) in features.iter().enumerate() {
            assignment[i] = nearest(&centroids, f).0;
        }
        let mut sums = vec![0.0f64; k];
        let mut counts = vec![0usize; k];
        for (&a, &f) in assignment.iter().zip(&features) {
            sums[a] += f;
            counts[a] += 1;
        }
        let mut shift = 0.0f64;
        for c in 0..k {
            if counts[c] > 0 {
                let updated = sums[c] / counts[c] as f64;
                shift = shift.max((updated - centroids[c]).abs());
                centroids[c] = updated;
            }
        }
        let objective: f64 = assignment
            .iter()
            .zip(&features)
            .map(|(&a, &f)| (f - centroids[a]) * (f - centroids[a]))
            .sum();
        objective_history.push(objective);
        if shift < CONVERGENCE_SHIFT {
            break;
        }
    }

    centroids.sort_by(f64::total_cmp);
    let ratios: Vec<f64> = centroids.iter().map(|&c| c.exp2()).collect();
    let mean_ratio_iou = if features.is_empty() {
        0.0
    } else {
        features
            .iter()
            .map(|&f| {
                let (a, _) = nearest(&centroids, f);
                ratio_iou(f.exp2(), ratios[a])
            })
            .sum::<f64>()
            / features.len() as f64
    };

    Ok(AnchorRatioSet {
        ratios,
        k,
        mean_ratio_iou,
        iterations,
        objective_history,
    })
}

/// Rescale every ground-truth box as if its image were resized, aspect
/// preserved, so the longer image side equals `target_resolution`. Input
/// resolution belongs in the ratio calculation because anchors live on the
/// network's input grid, not on the raw photograph.
pub fn ratio_features(split: &DatasetSplit, target_resolution: u32) -> Vec<BoundingBox> {
    assert!(target_resolution > 0, "target resolution must be positive");
    let mut out = Vec::new();
    for record in split.records() {
        let longer = record.width.max(record.height) as f64;
        let scale = target_resolution as f64 / longer;
        for gt in &record.boxes {
            if let Ok(scaled) = gt.bbox.scale(scale, scale) {
                out.push(scaled);
            }
        }
    }
    out
}
