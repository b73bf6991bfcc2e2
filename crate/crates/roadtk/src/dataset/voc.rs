//! PASCAL-VOC annotation parsing.
//!
//! The reader is a purpose-built subset of XML: elements, text, comments,
//! processing instructions, and self-closing tags. Attributes are skipped and
//! unknown elements are ignored, which keeps richer VOC files (pose,
//! truncated, segmented, ...) working. Only `filename`, `size/width`,
//! `size/height`, and each `object`'s `name` + `bndbox` are interpreted.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::dataset::{ClassLabel, DatasetSplit, GroundTruthBox, ImageRecord, ParseMode};
use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

/// Tallies of lenient-mode repairs. Always empty after a strict parse.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseWarnings {
    /// Unrecognized class names and how often each was skipped.
    pub unknown_classes: BTreeMap<String, usize>,
    /// Boxes clipped back into the image bounds.
    pub clipped: usize,
    /// Boxes dropped entirely (inverted, degenerate, or clipped away).
    pub dropped: usize,
}

impl ParseWarnings {
    pub fn is_empty(&self) -> bool {
        self.unknown_classes.is_empty() && self.clipped == 0 && self.dropped == 0
    }

    pub fn merge(&mut self, other: &ParseWarnings) {
        for (name, count) in &other.unknown_classes {
            *self.unknown_classes.entry(name.clone()).or_insert(0) += count;
        }
        self.clipped += other.clipped;
        self.dropped += other.dropped;
    }
}

/// A parsed annotation plus any lenient-mode tallies.
#[derive(Debug, Clone)]
pub struct VocParse {
    pub record: ImageRecord,
    pub warnings: ParseWarnings,
}

/// One file that failed to parse in lenient mode.
#[derive(Debug, Clone)]
pub struct FileFailure {
    pub file: String,
    pub message: String,
}

/// Per-directory load outcome.
#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub files_scanned: usize,
    pub failures: Vec<FileFailure>,
    pub warnings: ParseWarnings,
}

#[derive(Debug)]
pub struct SplitLoad {
    pub split: DatasetSplit,
    pub report: LoadReport,
}

#[derive(Debug, PartialEq)]
enum XmlEvent<'a> {
    Open(&'a str),
    Close(&'a str),
    Text(String),
}

/// Minimal event scanner over the XML subset described in the module docs.
struct XmlScanner<'a> {
    text: &'a str,
    pos: usize,
    /// Close event owed for a self-closing tag.
    pending_close: Option<&'a str>,
}

impl<'a> XmlScanner<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            text,
            pos: 0,
            pending_close: None,
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_past(&mut self, needle: &str) -> Result<()> {
        match self.rest().find(needle) {
            Some(i) => {
                self.pos += i + needle.len();
                Ok(())
            }
            None => Err(Error::Xml(format!(
                "unterminated construct, expected {needle:?}"
            ))),
        }
    }

    fn next_event(&mut self) -> Result<Option<XmlEvent<'a>>> {
        if let Some(name) = self.pending_close.take() {
            return Ok(Some(XmlEvent::Close(name)));
        }
        loop {
            if self.pos >= self.text.len() {
                return Ok(None);
            }
            let rest = self.rest();
            if let Some(stripped) = rest.strip_prefix('<') {
                if stripped.starts_with('?') {
                    self.skip_past("?>")?;
                    continue;
                }
                if stripped.starts_with("!--") {
                    self.skip_past("-->")?;
                    continue;
                }
                if stripped.starts_with('!') {
                    self.skip_past(">")?;
                    continue;
                }
                let end = rest
                    .find('>')
                    .ok_or_else(|| Error::Xml("unterminated tag".to_string()))?;
                let inner = &rest[1..end];
                self.pos += end + 1;
                if let Some(name) = inner.strip_prefix('/') {
                    return Ok(Some(XmlEvent::Close(name.trim())));
                }
                let self_closing = inner.ends_with('/');
                let inner = inner.strip_suffix('/').unwrap_or(inner);
                let name = inner
                    .split_whitespace()
                    .next()
                    .ok_or_else(|| Error::Xml("empty tag name".to_string()))?;
                if self_closing {
                    self.pending_close = Some(name);
                }
                return Ok(Some(XmlEvent::Open(name)));
            }
            let next_tag = rest.find('<').unwrap_or(rest.len());
            let raw = &rest[..next_tag];
            self.pos += next_tag;
            if !raw.trim().is_empty() {
                return Ok(Some(XmlEvent::Text(decode_entities(raw.trim())?)));
            }
        }
    }
}

fn decode_entities(raw: &str) -> Result<String> {
    if !raw.contains('&') {
        return Ok(raw.to_string());
    }
    let mut out = String::with_capacity(raw.len());
    let mut rest = raw;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        rest = &rest[i..];
        let end = rest
            .find(';')
            .ok_or_else(|| Error::Xml("unterminated entity".to_string()))?;
        let entity = &rest[1..end];
        match entity {
            "amp" => out.push('&'),
            "lt" => out.push('<'),
            "gt" => out.push('>'),
            "quot" => out.push('"'),
            "apos" => out.push('\''),
            other => return Err(Error::Xml(format!("unsupported entity &{other};"))),
        }
        rest = &rest[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

#[derive(Default)]
struct ObjectBuilder {
    name: Option<String>,
    xmin: Option<f64>,
    ymin: Option<f64>,
    xmax: Option<f64>,
    ymax: Option<f64>,
}

fn parse_dimension(text: &str, what: &'static str) -> Result<u32> {
    let value: f64 = text
        .trim()
        .parse()
        .map_err(|_| Error::Xml(format!("{what} is not a number: {text:?}")))?;
    if value.fract() != 0.0 || value < 1.0 || value > u32::MAX as f64 {
        return Err(Error::InvalidDimensions {
            width: value as i64,
            height: value as i64,
        });
    }
    Ok(value as u32)
}

fn parse_coord(text: &str, what: &str) -> Result<f64> {
    text.trim()
        .parse()
        .map_err(|_| Error::Xml(format!("{what} is not a number: {text:?}")))
}

/// Strip the final extension from a VOC `filename` to obtain the image id.
fn filename_stem(filename: &str) -> &str {
    match filename.rsplit_once('.') {
        Some((stem, ext)) if !stem.is_empty() && !ext.is_empty() => stem,
        _ => filename,
    }
}

/// Parse one annotation document. Box coordinates are taken verbatim: the
/// continuous half-open convention means no VOC "+1" adjustment anywhere.
pub fn parse_voc_annotation(xml: &str, mode: ParseMode) -> Result<VocParse> {
    let mut scanner = XmlScanner::new(xml);
    let mut stack: Vec<&str> = Vec::new();

    let mut filename: Option<String> = None;
    let mut width: Option<u32> = None;
    let mut height: Option<u32> = None;
    let mut objects: Vec<ObjectBuilder> = Vec::new();
    let mut in_object = false;

    while let Some(event) = scanner.next_event()? {
        match event {
            XmlEvent::Open(name) => {
                stack.push(name);
                if name == "object" && stack.len() == 2 {
                    in_object = true;
                    objects.push(ObjectBuilder::default());
                }
            }
            XmlEvent::Close(name) => {
                match stack.pop() {
                    Some(open) if open == name => {}
                    Some(open) => {
                        return Err(Error::Xml(format!(
                            "mismatched close tag </{name}> for <{open}>"
                        )))
                    }
                    None => return Err(Error::Xml(format!("stray close tag </{name}>"))),
                }
                if name == "object" && stack.len() == 1 {
                    in_object = false;
                }
            }
            XmlEvent::Text(text) => {
                let path: Vec<&str> = stack.clone();
                match path.as_slice() {
                    [_, "filename"] => filename = Some(text),
                    [_, "size", "width"] => width = Some(parse_dimension(&text, "width")?),
                    [_, "size", "height"] => height = Some(parse_dimension(&text, "height")?),
                    [_, "object", "name"] if in_object => {
                        if let Some(obj) = objects.last_mut() {
                            obj.name = Some(text);
                        }
                    }
                    [_, "object", "bndbox", coord] if in_object => {
                        if let Some(obj) = objects.last_mut() {
                            match *coord {
                                "xmin" => obj.xmin = Some(parse_coord(&text, "xmin")?),
                                "ymin" => obj.ymin = Some(parse_coord(&text, "ymin")?),
                                "xmax" => obj.xmax = Some(parse_coord(&text, "xmax")?),
                                "ymax" => obj.ymax = Some(parse_coord(&text, "ymax")?),
                                _ => {}
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    if !stack.is_empty() {
        return Err(Error::Xml(format!(
            "unclosed element <{}>",
            stack.last().unwrap()
        )));
    }

    let filename = filename
        .filter(|f| !f.is_empty())
        .ok_or(Error::MissingElement("filename"))?;
    let width = width.ok_or(Error::MissingElement("size"))?;
    let height = height.ok_or(Error::MissingElement("size"))?;

    let mut warnings = ParseWarnings::default();
    let mut boxes = Vec::with_capacity(objects.len());
    for obj in objects {
        let name = obj.name.ok_or(Error::MissingElement("name"))?;
        let label = match ClassLabel::from_name(&name) {
            Ok(label) => label,
            Err(err) => match mode {
                ParseMode::Strict => return Err(err),
                ParseMode::Lenient => {
                    *warnings.unknown_classes.entry(name).or_insert(0) += 1;
                    continue;
                }
            },
        };
        let xmin = obj.xmin.ok_or(Error::MissingElement("xmin"))?;
        let ymin = obj.ymin.ok_or(Error::MissingElement("ymin"))?;
        let xmax = obj.xmax.ok_or(Error::MissingElement("xmax"))?;
        let ymax = obj.ymax.ok_or(Error::MissingElement("ymax"))?;
        let bbox = match BoundingBox::new(xmin, ymin, xmax, ymax) {
            Ok(b) => b,
            Err(err) => match mode {
                ParseMode::Strict => return Err(err),
                ParseMode::Lenient => {
                    warnings.dropped += 1;
                    continue;
                }
            },
        };
        let bbox = if bbox.xmax() > width as f64 || bbox.ymax() > height as f64 {
            match mode {
                ParseMode::Strict => {
                    return Err(Error::BoxOutsideImage {
                        xmin,
                        ymin,
                        xmax,
                        ymax,
                        width,
                        height,
                    })
                }
                ParseMode::Lenient => match bbox.clip_to(width as f64, height as f64) {
                    Some(clipped) => {
                        warnings.clipped += 1;
                        clipped
                    }
                    None => {
                        warnings.dropped += 1;
                        continue;
                    }
                },
            }
        } else {
            bbox
        };
        boxes.push(GroundTruthBox { bbox, label });
    }

    let record = ImageRecord::new(filename_stem(&filename), width, height, boxes)?;
    Ok(VocParse { record, warnings })
}

/// Load every `*.xml` in `directory` as one annotation per image. Records
/// come back sorted by image id; in lenient mode per-file failures are
/// collected instead of aborting.
pub fn load_split(directory: &Path, split_name: &str, mode: ParseMode) -> Result<SplitLoad> {
    let entries = fs::read_dir(directory).map_err(|source| Error::Io {
        path: directory.to_path_buf(),
        source,
    })?;
    let mut paths = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| Error::Io {
            path: directory.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        let is_xml = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("xml"));
        if path.is_file() && is_xml {
            paths.push(path);
        }
    }
    paths.sort();

    let parses: Vec<(String, Result<VocParse>)> = paths
        .par_iter()
        .map(|path| {
            let file = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let parsed = fs::read_to_string(path)
                .map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })
                .and_then(|xml| parse_voc_annotation(&xml, mode));
            (file, parsed)
        })
        .collect();

    let mut report = LoadReport {
        files_scanned: paths.len(),
        ..LoadReport::default()
    };
    let mut records = Vec::with_capacity(parses.len());
    for (file, parsed) in parses {
        match parsed {
            Ok(voc) => {
                report.warnings.merge(&voc.warnings);
                records.push(voc.record);
            }
            Err(err) => match mode {
                ParseMode::Strict => return Err(err),
                ParseMode::Lenient => report.failures.push(FileFailure {
                    file,
                    message: err.to_string(),
                }),
            },
        }
    }

    let split = DatasetSplit::new(split_name, records)?;
    Ok(SplitLoad { split, report })
}
