//! Precision-recall curves and all-point interpolated average precision.

/// One point of a precision-recall sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
}

/// The precision-recall curve generated by sweeping detections in descending
/// confidence order: one point per ranked detection, cumulative counts.
/// Recall is non-decreasing along `points` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
    pub total_positives: usize,
}

impl PrCurve {
    /// Build a curve from `(confidence, is_true_positive)` flags and the
    /// number of ground-truth positives. The input is ranked by confidence
    /// descending internally; equal confidences keep their input order.
    pub fn from_ranked(flags: &[(f64, bool)], total_positives: usize) -> PrCurve {
        let mut ranked: Vec<(f64, bool)> = flags.to_vec();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut tp = 0usize;
        let mut fp = 0usize;
        let points = ranked
            .iter()
            .map(|&(_, hit)| {
                if hit {
                    tp += 1;
                } else {
                    fp += 1;
                }
                PrPoint {
                    recall: if total_positives > 0 {
                        tp as f64 / total_positives as f64
                    } else {
                        0.0
                    },
                    precision: tp as f64 / (tp + fp) as f64,
                }
            })
            .collect();
        PrCurve {
            points,
            total_positives,
        }
    }

    /// The interpolated precision envelope `p(r) = max over r' >= r of
    /// precision(r')`, evaluated at each sweep point. Non-increasing.
    pub fn envelope(&self) -> Vec<f64> {
        let mut env: Vec<f64> = self.points.iter().map(|p| p.precision).collect();
        for i in (0..env.len().saturating_sub(1)).rev() {
            env[i] = env[i].max(env[i + 1]);
        }
        env
    }
}

/// Area under the interpolated envelope over recall (all-point
/// interpolation). Zero when the class has no positives.
pub fn average_precision(curve: &PrCurve) -> f64 {
    if curve.total_positives == 0 {
        return 0.0;
    }
    let env = curve.envelope();
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (point, env_precision) in curve.points.iter().zip(&env) {
        ap += (point.recall - prev_recall) * env_precision;
        prev_recall = point.recall;
    }
    ap
}
