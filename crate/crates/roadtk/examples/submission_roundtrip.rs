//! Write detections in the submission text format and parse them back.
//!
//! Run with: `cargo run --example submission_roundtrip`

use roadtk::dataset::{parse_predictions, write_submission, Detection, DetectionMap};
use roadtk::{BoundingBox, ClassLabel};

fn main() -> roadtk::Result<()> {
    let mut detections = DetectionMap::new();
    detections.insert(
        "Japan_000001".to_string(),
        vec![
            Detection {
                bbox: BoundingBox::new(10.0, 20.0, 110.0, 220.0)?,
                label: ClassLabel::D20,
                confidence: 0.91,
            },
            Detection {
                bbox: BoundingBox::new(300.0, 40.0, 340.0, 560.0)?,
                label: ClassLabel::D00,
                confidence: 0.64,
            },
        ],
    );
    detections.insert("Japan_000002".to_string(), vec![]); // undamaged image

    let text = write_submission(&detections, true);
    println!("submission text:\n{text}");

    let parsed = parse_predictions(&text)?;
    assert_eq!(parsed, detections);
    println!(
        "parsed back {} images, identical to the input",
        parsed.len()
    );

    // without confidence values the codes and coordinates still round-trip
    let bare = write_submission(&detections, false);
    println!("\nwithout confidences:\n{bare}");
    Ok(())
}
