//! Prediction and submission text format.
//!
//! One line per image, UTF-8, LF line endings:
//!
//! ```text
//! <image>,<code> <xmin> <ymin> <xmax> <ymax> [<conf>] <code> <xmin> ...
//! ```
//!
//! `<image>` is the image file name (a known image extension, if present, is
//! stripped to obtain the image id). After the comma come space-separated
//! groups of five tokens — ordinal class code 1..=4 plus box corners — or six
//! tokens when a confidence is appended. Group width is uniform per line and
//! inferred from the token count; in the rare case where the count is
//! divisible by both 5 and 6 the quintuple reading is tried first and the
//! sextuple reading is used if any code position fails to parse as an
//! ordinal. The writer keeps that inference unambiguous by always printing
//! confidences with a decimal point. A line with nothing after the comma
//! declares an image with no detections. Missing confidences default to 1.0.

use std::collections::BTreeMap;

use crate::dataset::{ClassLabel, Detection};
use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

/// Detections keyed by image id. `BTreeMap` keeps every traversal and every
/// serialization deterministic.
pub type DetectionMap = BTreeMap<String, Vec<Detection>>;

const IMAGE_EXTENSIONS: [&str; 5] = ["jpg", "jpeg", "png", "bmp", "webp"];

fn strip_image_extension(token: &str) -> &str {
    if let Some((stem, ext)) = token.rsplit_once('.') {
        if !stem.is_empty() && IMAGE_EXTENSIONS.iter().any(|e| ext.eq_ignore_ascii_case(e)) {
            return stem;
        }
    }
    token
}

fn at_line(line: usize, source: Error) -> Error {
    Error::PredictionLine {
        line,
        source: Box::new(source),
    }
}

fn parse_ordinal(token: &str) -> Result<ClassLabel> {
    let code: i64 = token.parse().map_err(|_| {
        Error::MalformedPrediction(format!("class code {token:?} is not an integer"))
    })?;
    ClassLabel::from_ordinal(code)
}

fn parse_number(token: &str, what: &str) -> Result<f64> {
    let value: f64 = token
        .parse()
        .map_err(|_| Error::MalformedPrediction(format!("{what} {token:?} is not a number")))?;
    if !value.is_finite() {
        return Err(Error::MalformedPrediction(format!(
            "{what} {token:?} is not finite"
        )));
    }
    Ok(value)
}

fn parse_group(tokens: &[&str], with_confidence: bool) -> Result<Detection> {
    let label = parse_ordinal(tokens[0])?;
    let xmin = parse_number(tokens[1], "xmin")?;
    let ymin = parse_number(tokens[2], "ymin")?;
    let xmax = parse_number(tokens[3], "xmax")?;
    let ymax = parse_number(tokens[4], "ymax")?;
    let confidence = if with_confidence {
        let c = parse_number(tokens[5], "confidence")?;
        if c < 0.0 {
            return Err(Error::MalformedPrediction(format!(
                "confidence {c} is negative"
            )));
        }
        c
    } else {
        1.0
    };
    Ok(Detection {
        bbox: BoundingBox::new(xmin, ymin, xmax, ymax)?,
        label,
        confidence,
    })
}

fn parse_groups(tokens: &[&str], width: usize) -> Result<Vec<Detection>> {
    tokens
        .chunks(width)
        .map(|chunk| parse_group(chunk, width == 6))
        .collect()
}

/// Parse prediction text into a detection map. Detections keep file order
/// within each image; repeated lines for one image are appended in order.
pub fn parse_predictions(text: &str) -> Result<DetectionMap> {
    let mut map = DetectionMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (image, rest) = line.split_once(',').ok_or_else(|| {
            at_line(
                lineno,
                Error::MalformedPrediction("missing comma after image name".to_string()),
            )
        })?;
        let image_id = strip_image_extension(image.trim()).to_string();
        if image_id.is_empty() {
            return Err(at_line(
                lineno,
                Error::MalformedPrediction("empty image name".to_string()),
            ));
        }
        let tokens: Vec<&str> = rest.split_whitespace().collect();
        let detections = if tokens.is_empty() {
            Ok(Vec::new())
        } else if tokens.len().is_multiple_of(5) && tokens.len().is_multiple_of(6) {
            parse_groups(&tokens, 5).or_else(|_| parse_groups(&tokens, 6))
        } else if tokens.len().is_multiple_of(5) {
            parse_groups(&tokens, 5)
        } else if tokens.len().is_multiple_of(6) {
            parse_groups(&tokens, 6)
        } else {
            Err(Error::MalformedPrediction(format!(
                "{} tokens is not a multiple of 5 or 6",
                tokens.len()
            )))
        }
        .map_err(|e| at_line(lineno, e))?;
        map.entry(image_id).or_default().extend(detections);
    }
    Ok(map)
}

/// Round half-up to an integer; submission coordinates are serialized this way.
fn round_half_up(v: f64) -> i64 {
    (v + 0.5).floor() as i64
}

fn format_confidence(c: f64) -> String {
    if c.fract() == 0.0 {
        format!("{c:.1}")
    } else {
        format!("{c}")
    }
}

/// Serialize a detection map in the submission format. Images are emitted in
/// id order, one line each (including images with zero detections), with the
/// conventional `.jpg` extension appended. `parse_predictions` inverts this
/// exactly for integer-valued box coordinates.
pub fn write_submission(detections: &DetectionMap, include_confidence: bool) -> String {
    let mut out = String::new();
    for (image_id, dets) in detections {
        out.push_str(image_id);
        out.push_str(".jpg,");
        let mut first = true;
        for det in dets {
            if !first {
                out.push(' ');
            }
            first = false;
            out.push_str(&format!(
                "{} {} {} {} {}",
                det.label.ordinal(),
                round_half_up(det.bbox.xmin()),
                round_half_up(det.bbox.ymin()),
                round_half_up(det.bbox.xmax()),
                round_half_up(det.bbox.ymax()),
            ));
            if include_confidence {
                out.push(' ');
                out.push_str(&format_confidence(det.confidence));
            }
        }
        out.push('\n');
    }
    out
}
