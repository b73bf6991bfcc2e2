//! Prune overlapping detections with per-class greedy NMS.
//!
//! Run with: `cargo run --example nms_filtering`

use roadtk::dataset::Detection;
use roadtk::postprocess::{nms, DEFAULT_NMS_IOU};
use roadtk::{BoundingBox, ClassLabel};

fn main() -> roadtk::Result<()> {
    let detections = vec![
        Detection {
            bbox: BoundingBox::new(100.0, 100.0, 300.0, 160.0)?,
            label: ClassLabel::D10,
            confidence: 0.92,
        },
        // near-duplicate of the first: suppressed
        Detection {
            bbox: BoundingBox::new(105.0, 102.0, 305.0, 158.0)?,
            label: ClassLabel::D10,
            confidence: 0.78,
        },
        // same box, different class: kept (cracks may legitimately cross)
        Detection {
            bbox: BoundingBox::new(100.0, 100.0, 300.0, 160.0)?,
            label: ClassLabel::D00,
            confidence: 0.55,
        },
        // far away: kept
        Detection {
            bbox: BoundingBox::new(400.0, 400.0, 480.0, 480.0)?,
            label: ClassLabel::D40,
            confidence: 0.70,
        },
    ];

    println!("{} detections in", detections.len());
    let kept = nms(&detections, DEFAULT_NMS_IOU)?;
    println!("{} detections out at IoU {DEFAULT_NMS_IOU}:", kept.len());
    for d in &kept {
        println!(
            "  {} conf {:.2}  [{}, {}, {}, {}]",
            d.label,
            d.confidence,
            d.bbox.xmin(),
            d.bbox.ymin(),
            d.bbox.xmax(),
            d.bbox.ymax()
        );
    }
    Ok(())
}
