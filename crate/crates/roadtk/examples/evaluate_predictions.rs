//! Score a detection set against ground truth and print the full report:
//! pooled F1, mAP@[.50:.95], AP50/AP75, size-restricted APs, per-class
//! metrics, and the FP/FN error categories.
//!
//! Run with: `cargo run --example evaluate_predictions`

use roadtk::dataset::{Detection, DetectionMap, GroundTruthBox, ImageRecord};
use roadtk::metrics::evaluate;
use roadtk::{BoundingBox, ClassLabel, DatasetSplit};

fn gt(label: ClassLabel, b: (f64, f64, f64, f64)) -> GroundTruthBox {
    GroundTruthBox {
        bbox: BoundingBox::new(b.0, b.1, b.2, b.3).unwrap(),
        label,
    }
}

fn det(label: ClassLabel, b: (f64, f64, f64, f64), confidence: f64) -> Detection {
    Detection {
        bbox: BoundingBox::new(b.0, b.1, b.2, b.3).unwrap(),
        label,
        confidence,
    }
}

fn main() -> roadtk::Result<()> {
    let records = vec![
        ImageRecord::new(
            "scene_a",
            600,
            600,
            vec![
                gt(ClassLabel::D00, (250.0, 0.0, 290.0, 600.0)),
                gt(ClassLabel::D20, (50.0, 350.0, 250.0, 550.0)),
            ],
        )?,
        ImageRecord::new(
            "scene_b",
            600,
            600,
            vec![
                gt(ClassLabel::D40, (10.0, 10.0, 25.0, 25.0)), // tiny pothole
                gt(ClassLabel::D10, (0.0, 290.0, 600.0, 330.0)),
            ],
        )?,
    ];
    let split = DatasetSplit::new("demo-val", records)?;

    let mut detections = DetectionMap::new();
    detections.insert(
        "scene_a".to_string(),
        vec![
            det(ClassLabel::D00, (252.0, 0.0, 292.0, 600.0), 0.93), // good hit
            det(ClassLabel::D20, (40.0, 340.0, 260.0, 560.0), 0.81), // good hit
            det(ClassLabel::D10, (100.0, 100.0, 400.0, 140.0), 0.40), // phantom
        ],
    );
    detections.insert(
        "scene_b".to_string(),
        vec![
            det(ClassLabel::D10, (0.0, 300.0, 590.0, 332.0), 0.77), // good hit
                                                                    // the tiny pothole is missed
        ],
    );

    let report = evaluate(&split, &detections)?;
    println!("{report}");
    println!("machine-readable form:\n{}", report.to_csv());
    Ok(())
}
