//! Toolkit for road-damage object-detection pipelines.
//!
//! The pieces, usable independently:
//!
//! - **dataset** – PASCAL-VOC annotation parsing, the prediction/submission
//!   text format, the four-class damage taxonomy, split statistics.
//! - **geometry** – half-open continuous bounding boxes: IoU, areas, size
//!   buckets, flips and scales.
//! - **metrics** – competition F1 plus the COCO-style AP family
//!   (mAP@[.50:.95], AP50, AP75, size-restricted APs) and an FP/FN
//!   error-category breakdown.
//! - **postprocess** – per-class greedy NMS and validation-driven per-class
//!   confidence thresholds.
//! - **scaling** – the compound-scaling calculator for the EfficientDet
//!   family, exception table included.
//! - **anchors** – k-means anchor aspect-ratio search over log-ratio space.
//! - **augment** – policy-driven image augmentation with synchronized box
//!   updates and the rotation-elimination rule.
//!
//! The `roadtk` binary wires these into pipeline commands; the `examples/`
//! directory shows one runnable program per capability.

pub mod anchors;
pub mod augment;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod postprocess;
pub mod scaling;

pub use dataset::{ClassLabel, DatasetSplit, Detection, DetectionMap, GroundTruthBox, ImageRecord};
pub use error::{Error, Result};
pub use geometry::{BoundingBox, SizeBucket};
