//! Ground-truth and prediction ingestion: the damage-class taxonomy, PASCAL-VOC
//! annotation parsing, the prediction/submission text format, and dataset
//! statistics.
//!
//! Two parse modes are supported everywhere: `Strict` aborts on the first
//! violation (the right choice for CI), `Lenient` clips or skips offending
//! entries and tallies them for a report (field data is messy).

mod predictions;
mod stats;
mod voc;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

pub use predictions::{parse_predictions, write_submission, DetectionMap};
pub use stats::{dataset_stats, StatsTable};
pub use voc::{
    load_split, parse_voc_annotation, FileFailure, LoadReport, ParseWarnings, SplitLoad, VocParse,
};

/// JRA damage classes used by the 2020 challenge. The set is closed: any
/// other class string is a parse error in strict mode and a counted skip in
/// lenient mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassLabel {
    /// Longitudinal crack.
    D00,
    /// Transverse crack.
    D10,
    /// Alligator crack.
    D20,
    /// Pothole.
    D40,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 4] = [
        ClassLabel::D00,
        ClassLabel::D10,
        ClassLabel::D20,
        ClassLabel::D40,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::D00 => "D00",
            ClassLabel::D10 => "D10",
            ClassLabel::D20 => "D20",
            ClassLabel::D40 => "D40",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ClassLabel::D00 => "longitudinal crack",
            ClassLabel::D10 => "transverse crack",
            ClassLabel::D20 => "alligator crack",
            ClassLabel::D40 => "pothole",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "D00" => Ok(ClassLabel::D00),
            "D10" => Ok(ClassLabel::D10),
            "D20" => Ok(ClassLabel::D20),
            "D40" => Ok(ClassLabel::D40),
            other => Err(Error::UnknownClass(other.to_string())),
        }
    }

    /// Ordinal code used by the submission format; a bijection with 1..=4.
    pub fn ordinal(self) -> u8 {
        match self {
            ClassLabel::D00 => 1,
            ClassLabel::D10 => 2,
            ClassLabel::D20 => 3,
            ClassLabel::D40 => 4,
        }
    }

    pub fn from_ordinal(code: i64) -> Result<Self> {
        match code {
            1 => Ok(ClassLabel::D00),
            2 => Ok(ClassLabel::D10),
            3 => Ok(ClassLabel::D20),
            4 => Ok(ClassLabel::D40),
            other => Err(Error::UnknownOrdinal(other)),
        }
    }
}

impl std::fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One annotated box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthBox {
    pub bbox: BoundingBox,
    pub label: ClassLabel,
}

/// One predicted box with a confidence score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: BoundingBox,
    pub label: ClassLabel,
    pub confidence: f64,
}

/// Parse strictness; see the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Strict,
    Lenient,
}

/// One image's identity, pixel dimensions, and ground-truth boxes. `boxes`
/// may be empty (an undamaged image).
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecord {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub boxes: Vec<GroundTruthBox>,
}

impl ImageRecord {
    /// Build a record, checking that dimensions are positive and every box
    /// lies inside `[0, width] x [0, height]`.
    pub fn new(
        image_id: impl Into<String>,
        width: u32,
        height: u32,
        boxes: Vec<GroundTruthBox>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions {
                width: width as i64,
                height: height as i64,
            });
        }
        for gt in &boxes {
            if gt.bbox.xmax() > width as f64 || gt.bbox.ymax() > height as f64 {
                return Err(Error::BoxOutsideImage {
                    xmin: gt.bbox.xmin(),
                    ymin: gt.bbox.ymin(),
                    xmax: gt.bbox.xmax(),
                    ymax: gt.bbox.ymax(),
                    width,
                    height,
                });
            }
        }
        Ok(Self {
            image_id: image_id.into(),
            width,
            height,
            boxes,
        })
    }
}

/// A named collection of records with unique image ids, kept sorted by id so
/// every traversal is deterministic.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub name: String,
    records: Vec<ImageRecord>,
}

impl DatasetSplit {
    pub fn new(name: impl Into<String>, mut records: Vec<ImageRecord>) -> Result<Self> {
        records.sort_by(|a, b| a.image_id.cmp(&b.image_id));
        for pair in records.windows(2) {
            if pair[0].image_id == pair[1].image_id {
                return Err(Error::DuplicateImageId(pair[0].image_id.clone()));
            }
        }
        Ok(Self {
            name: name.into(),
            records,
        })
    }

    pub fn records(&self) -> &[ImageRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, image_id: &str) -> Option<&ImageRecord> {
        self.records
            .binary_search_by(|r| r.image_id.as_str().cmp(image_id))
            .ok()
            .map(|i| &self.records[i])
    }

    /// Total ground-truth boxes per class.
    pub fn class_counts(&self) -> BTreeMap<ClassLabel, usize> {
        let mut counts: BTreeMap<ClassLabel, usize> =
            ClassLabel::ALL.iter().map(|&c| (c, 0)).collect();
        for record in &self.records {
            for gt in &record.boxes {
                *counts.get_mut(&gt.label).expect("all classes present") += 1;
            }
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordinal_mapping_is_a_bijection() {
        for class in ClassLabel::ALL {
            assert_eq!(
                ClassLabel::from_ordinal(class.ordinal() as i64).unwrap(),
                class
            );
        }
        for code in 1..=4i64 {
            assert_eq!(
                ClassLabel::from_ordinal(code).unwrap().ordinal() as i64,
                code
            );
        }
        assert!(matches!(
            ClassLabel::from_ordinal(5),
            Err(Error::UnknownOrdinal(5))
        ));
        assert!(matches!(
            ClassLabel::from_ordinal(0),
            Err(Error::UnknownOrdinal(0))
        ));
    }

    #[test]
    fn unknown_class_name_is_rejected() {
        assert!(matches!(
            ClassLabel::from_name("D30"),
            Err(Error::UnknownClass(s)) if s == "D30"
        ));
    }

    #[test]
    fn record_rejects_out_of_bounds_boxes() {
        let gt = GroundTruthBox {
            bbox: BoundingBox::new(0.0, 0.0, 700.0, 100.0).unwrap(),
            label: ClassLabel::D00,
        };
        assert!(matches!(
            ImageRecord::new("a", 600, 600, vec![gt]),
            Err(Error::BoxOutsideImage { .. })
        ));
        assert!(ImageRecord::new("a", 0, 600, vec![]).is_err());
    }

    #[test]
    fn split_sorts_and_rejects_duplicates() {
        let rec = |id: &str| ImageRecord::new(id, 10, 10, vec![]).unwrap();
        let split = DatasetSplit::new("train", vec![rec("b"), rec("a")]).unwrap();
        let ids: Vec<_> = split
            .records()
            .iter()
            .map(|r| r.image_id.as_str())
            .collect();
        assert_eq!(ids, ["a", "b"]);
        assert!(split.get("a").is_some());
        assert!(split.get("zz").is_none());

        assert!(matches!(
            DatasetSplit::new("train", vec![rec("a"), rec("a")]),
            Err(Error::DuplicateImageId(id)) if id == "a"
        ));
    }
}
