//! Cluster ground-truth box shapes into anchor aspect ratios, accounting
//! for the network input resolution.
//!
//! Run with: `cargo run --example anchor_ratios`

use roadtk::anchors::{kmeans_ratios, ratio_features, DEFAULT_RATIO_COUNT};
use roadtk::dataset::{GroundTruthBox, ImageRecord};
use roadtk::{BoundingBox, ClassLabel, DatasetSplit};

fn main() -> roadtk::Result<()> {
    // a synthetic split: tall longitudinal cracks, wide transverse cracks,
    // squat alligator patches, small squarish potholes
    let mut records = Vec::new();
    for i in 0..40u32 {
        let f = 1.0 + (i % 5) as f64 * 0.1;
        let boxes = vec![
            GroundTruthBox {
                bbox: BoundingBox::new(100.0, 0.0, 100.0 + 30.0 * f, 520.0)?,
                label: ClassLabel::D00,
            },
            GroundTruthBox {
                bbox: BoundingBox::new(0.0, 200.0, 560.0, 200.0 + 35.0 * f)?,
                label: ClassLabel::D10,
            },
            GroundTruthBox {
                bbox: BoundingBox::new(300.0, 300.0, 300.0 + 180.0 * f, 450.0)?,
                label: ClassLabel::D20,
            },
            GroundTruthBox {
                bbox: BoundingBox::new(30.0, 30.0, 30.0 + 40.0 * f, 75.0)?,
                label: ClassLabel::D40,
            },
        ];
        records.push(ImageRecord::new(format!("img_{i:03}"), 600, 600, boxes)?);
    }
    let split = DatasetSplit::new("train", records)?;

    let boxes = ratio_features(&split, 512);
    println!("{} boxes rescaled to the 512-px input grid", boxes.len());

    let result = kmeans_ratios(&boxes, DEFAULT_RATIO_COUNT, 0)?;
    let formatted: Vec<String> = result.ratios.iter().map(|r| format!("{r:.4}")).collect();
    println!("{} anchor ratios: {}", result.k, formatted.join(","));
    println!(
        "mean ratio-IoU {:.4} after {} iterations",
        result.mean_ratio_iou, result.iterations
    );
    Ok(())
}
