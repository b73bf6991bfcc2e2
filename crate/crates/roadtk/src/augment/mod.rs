//! Augmentation with synchronized bounding-box updates.
//!
//! Policies apply to the whole image (not individual boxes); geometric
//! transforms move boxes through the geometry module, photometric transforms
//! leave them untouched. Output boxes are clipped to the output image and
//! boxes that collapse below 1 px^2 are dropped and counted. Everything is
//! driven by a per-call seeded generator, so identical inputs give
//! bit-identical outputs.

mod policy;

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::GroundTruthBox;
use crate::error::{Error, Result};

pub use policy::{strip_rotation, AugPolicy, TransformKind, TransformSpec};

/// Minimum box area kept after clipping.
const MIN_BOX_AREA: f64 = 1.0;

/// An 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl ImageBuffer {
    /// A black image.
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions {
                width: width as i64,
                height: height as i64,
            });
        }
        Ok(Self {
            width,
            height,
            data: vec![0; width as usize * height as usize * 3],
        })
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions {
                width: width as i64,
                height: height as i64,
            });
        }
        if data.len() != width as usize * height as usize * 3 {
            return Err(Error::BadBufferSize {
                len: data.len(),
                width,
                height,
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn read_png(path: &Path) -> Result<Self> {
        let decoded = image::ImageReader::open(path)
            .map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?
            .decode()?
            .to_rgb8();
        Self::from_raw(decoded.width(), decoded.height(), decoded.into_raw())
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        let img = image::RgbImage::from_raw(self.width, self.height, self.data.clone())
            .expect("buffer length is validated at construction");
        img.save_with_format(path, image::ImageFormat::Png)?;
        Ok(())
    }
}

fn hflip_image(img: &ImageBuffer) -> ImageBuffer {
    let mut out = img.clone();
    for y in 0..img.height {
        for x in 0..img.width {
            out.set_pixel(img.width - 1 - x, y, img.pixel(x, y));
        }
    }
    out
}

/// Resize so the longer side equals `target`, aspect preserved. Identity
/// (no resampling) when the dimensions already match. Returns the image and
/// the realized per-axis scale factors.
fn resize_longer(img: &ImageBuffer, target: u32) -> (ImageBuffer, f64, f64) {
    let scale = target as f64 / img.width.max(img.height) as f64;
    let out_w = ((img.width as f64 * scale).round() as u32).max(1);
    let out_h = ((img.height as f64 * scale).round() as u32).max(1);
    if out_w == img.width && out_h == img.height {
        return (img.clone(), 1.0, 1.0);
    }
    let rgb = image::RgbImage::from_raw(img.width, img.height, img.data.clone())
        .expect("buffer length is validated at construction");
    let resized =
        image::imageops::resize(&rgb, out_w, out_h, image::imageops::FilterType::Triangle);
    let out = ImageBuffer::from_raw(out_w, out_h, resized.into_raw())
        .expect("resized buffer has the advertised size");
    (
        out,
        out_w as f64 / img.width as f64,
        out_h as f64 / img.height as f64,
    )
}

fn translate_image(img: &ImageBuffer, dx: i64, dy: i64) -> ImageBuffer {
    let mut out = ImageBuffer::new(img.width, img.height).expect("dims already validated");
    for y in 0..img.height as i64 {
        let sy = y - dy;
        if sy < 0 || sy >= img.height as i64 {
            continue;
        }
        for x in 0..img.width as i64 {
            let sx = x - dx;
            if sx < 0 || sx >= img.width as i64 {
                continue;
            }
            out.set_pixel(x as u32, y as u32, img.pixel(sx as u32, sy as u32));
        }
    }
    out
}

fn adjust_brightness(img: &ImageBuffer, delta: f64) -> ImageBuffer {
    let mut out = img.clone();
    for v in &mut out.data {
        *v = (*v as f64 + delta).clamp(0.0, 255.0) as u8;
    }
    out
}

fn adjust_contrast(img: &ImageBuffer, gain: f64) -> ImageBuffer {
    let mut out = img.clone();
    for v in &mut out.data {
        *v = ((*v as f64 - 128.0) * gain + 128.0).clamp(0.0, 255.0) as u8;
    }
    out
}

/// Per-channel histogram equalization via the classic CDF remap
/// `lut[v] = round(255 * (cdf(v) - cdf_min) / (N - cdf_min))`. A channel with
/// a single occupied level is left unchanged.
pub fn equalize(img: &ImageBuffer) -> ImageBuffer {
    let mut out = img.clone();
    let pixels = img.width as usize * img.height as usize;
    for channel in 0..3 {
        let mut hist = [0usize; 256];
        for p in 0..pixels {
            hist[img.data[p * 3 + channel] as usize] += 1;
        }
        let mut cdf = [0usize; 256];
        let mut running = 0usize;
        for (v, &count) in hist.iter().enumerate() {
            running += count;
            cdf[v] = running;
        }
        let cdf_min = hist
            .iter()
            .enumerate()
            .find(|(_, &c)| c > 0)
            .map(|(v, _)| cdf[v])
            .unwrap_or(0);
        if pixels == cdf_min {
            continue; // single occupied level
        }
        let denom = (pixels - cdf_min) as f64;
        let mut lut = [0u8; 256];
        for v in 0..256 {
            lut[v] = ((cdf[v].saturating_sub(cdf_min)) as f64 * 255.0 / denom + 0.5).floor() as u8;
        }
        for p in 0..pixels {
            out.data[p * 3 + channel] = lut[img.data[p * 3 + channel] as usize];
        }
    }
    out
}

fn clip_boxes(
    boxes: Vec<(GroundTruthBox, bool)>,
    width: f64,
    height: f64,
) -> (Vec<(GroundTruthBox, bool)>, usize) {
    let mut dropped = 0;
    let kept = boxes
        .into_iter()
        .filter_map(|(gt, flag)| match gt.bbox.clip_to(width, height) {
            Some(bbox) if bbox.area() >= MIN_BOX_AREA => Some((
                GroundTruthBox {
                    bbox,
                    label: gt.label,
                },
                flag,
            )),
            _ => {
                dropped += 1;
                None
            }
        })
        .collect();
    (kept, dropped)
}

/// Result of applying a policy to one image.
#[derive(Debug, Clone)]
pub struct Applied {
    pub image: ImageBuffer,
    pub boxes: Vec<GroundTruthBox>,
    /// Boxes lost to clipping (collapsed below 1 px^2).
    pub dropped_boxes: usize,
    /// Index of the sub-policy the generator selected.
    pub chosen_sub_policy: usize,
}

/// Apply `policy` to an image and its boxes: one sub-policy is chosen
/// uniformly, then each spec fires independently with its probability.
/// The policy must be rotation-free (see [`strip_rotation`]); class labels
/// are never altered.
pub fn apply_policy(
    image: &ImageBuffer,
    boxes: &[GroundTruthBox],
    policy: &AugPolicy,
    seed: u64,
) -> Result<Applied> {
    policy.validate()?;
    if policy.contains_rotation() {
        return Err(Error::RotationNotApplicable(policy.name.clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = rng.random_range(0..policy.sub_policies.len());

    let mut img = image.clone();
    let mut tracked: Vec<(GroundTruthBox, bool)> = boxes.iter().map(|&b| (b, true)).collect();
    let mut dropped = 0usize;

    for spec in &policy.sub_policies[chosen] {
        if rng.random::<f64>() >= spec.probability {
            continue;
        }
        match spec.kind {
            TransformKind::HFlip => {
                img = hflip_image(&img);
                let w = img.width as f64;
                tracked = tracked
                    .into_iter()
                    .map(|(gt, flag)| {
                        let bbox = gt.bbox.flip_h(w).expect("boxes stay inside the image");
                        (GroundTruthBox { bbox, ..gt }, flag)
                    })
                    .collect();
            }
            TransformKind::Resize => {
                let (resized, sx, sy) = resize_longer(&img, spec.magnitude as u32);
                img = resized;
                tracked = tracked
                    .into_iter()
                    .map(|(gt, flag)| {
                        let bbox = gt.bbox.scale(sx, sy).expect("positive scale");
                        (GroundTruthBox { bbox, ..gt }, flag)
                    })
                    .collect();
            }
            TransformKind::Translate => {
                let dx = (spec.magnitude * img.width as f64).round();
                let dy = (spec.magnitude * img.height as f64).round();
                img = translate_image(&img, dx as i64, dy as i64);
                let (w, h) = (img.width as f64, img.height as f64);
                let mut moved = Vec::with_capacity(tracked.len());
                for (gt, flag) in tracked {
                    match gt.bbox.offset_clipped(dx, dy, w, h) {
                        Some(bbox) if bbox.area() >= MIN_BOX_AREA => {
                            moved.push((GroundTruthBox { bbox, ..gt }, flag));
                        }
                        _ => dropped += 1,
                    }
                }
                tracked = moved;
            }
            TransformKind::Brightness => img = adjust_brightness(&img, spec.magnitude),
            TransformKind::Contrast => img = adjust_contrast(&img, spec.magnitude),
            TransformKind::Equalize => img = equalize(&img),
            TransformKind::Rotate => unreachable!("rotation rejected above"),
        }
        let (clipped, lost) = clip_boxes(tracked, img.width as f64, img.height as f64);
        tracked = clipped;
        dropped += lost;
    }

    Ok(Applied {
        image: img,
        boxes: tracked.into_iter().map(|(gt, _)| gt).collect(),
        dropped_boxes: dropped,
        chosen_sub_policy: chosen,
    })
}

/// Per-channel normalization parameters recorded alongside preprocessing.
/// Defaults are the widely used large-corpus RGB statistics; training
/// pipelines read them from the output metadata rather than hard-coding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationRecord {
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

impl Default for NormalizationRecord {
    fn default() -> Self {
        Self {
            mean: [0.485, 0.456, 0.406],
            std: [0.229, 0.224, 0.225],
        }
    }
}

/// Result of the training-time preprocessing step.
#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub image: ImageBuffer,
    pub boxes: Vec<GroundTruthBox>,
    pub flipped: bool,
    pub normalization: NormalizationRecord,
    pub dropped_boxes: usize,
}

/// Training-time preprocessing: an optional seeded horizontal flip, a resize
/// so the longer side equals `target_resolution`, and a record of the
/// normalization parameters. The pixel buffer stays 8-bit; normalization
/// itself is the consumer's float-side step.
pub fn preprocess(
    image: &ImageBuffer,
    boxes: &[GroundTruthBox],
    target_resolution: u32,
    hflip_probability: f64,
    seed: u64,
) -> Result<Preprocessed> {
    if target_resolution == 0 {
        return Err(Error::InvalidDimensions {
            width: 0,
            height: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flipped = rng.random::<f64>() < hflip_probability;

    let mut img = image.clone();
    let mut out_boxes: Vec<GroundTruthBox> = boxes.to_vec();
    if flipped {
        img = hflip_image(&img);
        let w = img.width as f64;
        out_boxes = out_boxes
            .into_iter()
            .map(|gt| {
                let bbox = gt.bbox.flip_h(w).expect("boxes stay inside the image");
                GroundTruthBox { bbox, ..gt }
            })
            .collect();
    }
    let (resized, sx, sy) = resize_longer(&img, target_resolution);
    img = resized;
    out_boxes = out_boxes
        .into_iter()
        .map(|gt| {
            let bbox = gt.bbox.scale(sx, sy).expect("positive scale");
            GroundTruthBox { bbox, ..gt }
        })
        .collect();
    let (kept, dropped) = clip_boxes(
        out_boxes.into_iter().map(|b| (b, true)).collect(),
        img.width as f64,
        img.height as f64,
    );

    Ok(Preprocessed {
        image: img,
        boxes: kept.into_iter().map(|(gt, _)| gt).collect(),
        flipped,
        normalization: NormalizationRecord::default(),
        dropped_boxes: dropped,
    })
}
