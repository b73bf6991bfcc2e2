//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed xml: {0}")]
    Xml(String),
    #[error("annotation is missing a <{0}> element")]
    MissingElement(&'static str),
    #[error("unknown class name {0:?}")]
    UnknownClass(String),
    #[error("unknown ordinal class code {0}")]
    UnknownOrdinal(i64),
    #[error("invalid bounding box ({xmin}, {ymin}, {xmax}, {ymax}): {reason}")]
    InvalidBox {
        xmin: f64,
        ymin: f64,
        xmax: f64,
        ymax: f64,
        reason: &'static str,
    },
    #[error("box ({xmin}, {ymin}, {xmax}, {ymax}) lies outside image {width}x{height}")]
    BoxOutsideImage {
        xmin: f64,
        ymin: f64,
        xmax: f64,
        ymax: f64,
        width: u32,
        height: u32,
    },
    #[error("invalid image dimensions {width}x{height}")]
    InvalidDimensions { width: i64, height: i64 },
    #[error("duplicate image id {0:?} in split")]
    DuplicateImageId(String),
    #[error("malformed prediction: {0}")]
    MalformedPrediction(String),
    #[error("prediction line {line}: {source}")]
    PredictionLine {
        line: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("detections reference unknown image id {0:?}")]
    UnknownImageId(String),
    #[error("iou threshold {0} outside (0, 1]")]
    InvalidIouThreshold(f64),
    #[error("threshold grid is empty")]
    EmptyGrid,
    #[error("grid value {0} outside [0, 1]")]
    InvalidGridValue(f64),
    #[error("no threshold for class {0} in table")]
    MissingThreshold(String),
    #[error("threshold file line {line}: {msg}")]
    ThresholdLine { line: usize, msg: String },
    #[error("scaling coefficient phi={0} outside 0..=8")]
    PhiOutOfRange(u32),
    #[error("k-means needs at least one cluster")]
    ZeroClusters,
    #[error("k-means needs at least k={k} boxes, got {boxes}")]
    NotEnoughBoxes { k: usize, boxes: usize },
    #[error("non-positive scale factors ({sx}, {sy})")]
    InvalidScale { sx: f64, sy: f64 },
    #[error("invalid policy {name:?}: {reason}")]
    InvalidPolicy { name: String, reason: String },
    #[error("policy {0:?} contains rotation; apply strip_rotation first")]
    RotationNotApplicable(String),
    #[error("buffer of {len} bytes does not match {width}x{height} rgb8")]
    BadBufferSize { len: usize, width: u32, height: u32 },
    #[error("image codec error: {0}")]
    Image(#[from] image::ImageError),
}
