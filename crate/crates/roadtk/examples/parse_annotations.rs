//! Parse a PASCAL-VOC annotation and print split statistics.
//!
//! Run with: `cargo run --example parse_annotations`

use roadtk::dataset::{dataset_stats, parse_voc_annotation, ParseMode};
use roadtk::DatasetSplit;

const SAMPLE: &str = r#"<annotation>
  <folder>demo</folder>
  <filename>Japan_000042.jpg</filename>
  <size><width>600</width><height>600</height><depth>3</depth></size>
  <object>
    <name>D20</name>
    <bndbox><xmin>10</xmin><ymin>20</ymin><xmax>110</xmax><ymax>220</ymax></bndbox>
  </object>
  <object>
    <name>D00</name>
    <bndbox><xmin>250</xmin><ymin>0</ymin><xmax>290</xmax><ymax>600</ymax></bndbox>
  </object>
</annotation>"#;

fn main() -> roadtk::Result<()> {
    let parsed = parse_voc_annotation(SAMPLE, ParseMode::Strict)?;
    println!(
        "image {} ({}x{}), {} boxes",
        parsed.record.image_id,
        parsed.record.width,
        parsed.record.height,
        parsed.record.boxes.len()
    );
    for gt in &parsed.record.boxes {
        println!(
            "  {} ({})  [{}, {}, {}, {}]  area {}",
            gt.label,
            gt.label.description(),
            gt.bbox.xmin(),
            gt.bbox.ymin(),
            gt.bbox.xmax(),
            gt.bbox.ymax(),
            gt.bbox.area()
        );
    }

    let split = DatasetSplit::new("demo", vec![parsed.record])?;
    println!("\n{}", dataset_stats(&split));
    Ok(())
}
