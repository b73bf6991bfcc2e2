//! Find the per-class confidence threshold maximizing validation F1, then
//! apply the resulting table at inference time.
//!
//! Run with: `cargo run --example threshold_sweep`

use roadtk::dataset::{Detection, DetectionMap, GroundTruthBox, ImageRecord};
use roadtk::metrics::evaluate;
use roadtk::postprocess::{apply_thresholds, default_grid, sweep_thresholds};
use roadtk::{BoundingBox, ClassLabel, DatasetSplit};

fn main() -> roadtk::Result<()> {
    let gt = |label, b: (f64, f64, f64, f64)| GroundTruthBox {
        bbox: BoundingBox::new(b.0, b.1, b.2, b.3).unwrap(),
        label,
    };
    let det = |label, b: (f64, f64, f64, f64), c| Detection {
        bbox: BoundingBox::new(b.0, b.1, b.2, b.3).unwrap(),
        label,
        confidence: c,
    };

    let split = DatasetSplit::new(
        "val",
        vec![ImageRecord::new(
            "v1",
            600,
            600,
            vec![
                gt(ClassLabel::D00, (100.0, 0.0, 140.0, 600.0)),
                gt(ClassLabel::D20, (300.0, 300.0, 500.0, 500.0)),
            ],
        )?],
    )?;

    // correct hits at high confidence, hallucinations at low confidence
    let mut val_dets = DetectionMap::new();
    val_dets.insert(
        "v1".to_string(),
        vec![
            det(ClassLabel::D00, (100.0, 0.0, 140.0, 600.0), 0.82),
            det(ClassLabel::D20, (302.0, 300.0, 504.0, 500.0), 0.67),
            det(ClassLabel::D00, (400.0, 0.0, 460.0, 80.0), 0.21),
            det(ClassLabel::D20, (0.0, 0.0, 60.0, 60.0), 0.34),
        ],
    );

    let table = sweep_thresholds(&split, &val_dets, &default_grid())?;
    println!("swept thresholds:\n{}", table.to_text());

    let filtered = apply_thresholds(&val_dets, &table)?;
    let report = evaluate(&split, &filtered)?;
    println!("pooled F1 after the table is applied: {:.4}", report.f1);
    Ok(())
}
