//! Bounding-box arithmetic shared by metrics, post-processing, and augmentation.
//!
//! Boxes are continuous half-open rectangles `[xmin, xmax) x [ymin, ymax)` in
//! pixel coordinates. Area is `(xmax - xmin) * (ymax - ymin)` with no legacy
//! VOC "+1" pixel adjustment; the same convention is used by the IoU
//! computation and by the rasterization checks in the test suite. All
//! arithmetic is double precision.

use crate::error::{Error, Result};

/// An axis-aligned box with `xmin < xmax`, `ymin < ymax`, all coordinates
/// finite and non-negative. Construction through [`BoundingBox::new`] is the
/// only way to obtain one, so every value in circulation satisfies the
/// invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    xmin: f64,
    ymin: f64,
    xmax: f64,
    ymax: f64,
}

impl BoundingBox {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self> {
        let reject = |reason| Error::InvalidBox {
            xmin,
            ymin,
            xmax,
            ymax,
            reason,
        };
        if ![xmin, ymin, xmax, ymax].iter().all(|v| v.is_finite()) {
            return Err(reject("coordinates must be finite"));
        }
        if xmin < 0.0 || ymin < 0.0 {
            return Err(reject("coordinates must be non-negative"));
        }
        if xmin >= xmax || ymin >= ymax {
            return Err(reject("requires xmin < xmax and ymin < ymax"));
        }
        Ok(Self {
            xmin,
            ymin,
            xmax,
            ymax,
        })
    }

    pub fn xmin(&self) -> f64 {
        self.xmin
    }

    pub fn ymin(&self) -> f64 {
        self.ymin
    }

    pub fn xmax(&self) -> f64 {
        self.xmax
    }

    pub fn ymax(&self) -> f64 {
        self.ymax
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Width/height aspect ratio.
    pub fn aspect_ratio(&self) -> f64 {
        self.width() / self.height()
    }

    pub fn size_bucket(&self) -> SizeBucket {
        SizeBucket::from_area(self.area())
    }

    /// Overlap area with `other`; zero when disjoint or merely touching.
    pub fn intersection_area(&self, other: &BoundingBox) -> f64 {
        let w = self.xmax.min(other.xmax) - self.xmin.max(other.xmin);
        let h = self.ymax.min(other.ymax) - self.ymin.max(other.ymin);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    /// Intersection over union in `[0, 1]`. Symmetric; 1 exactly when the
    /// boxes coincide, 0 when they do not overlap.
    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let inter = self.intersection_area(other);
        if inter <= 0.0 {
            return 0.0;
        }
        inter / (self.area() + other.area() - inter)
    }

    /// Mirror across the vertical center line of an image `image_width` wide.
    /// Applying it twice restores the original box (exact for integer-valued
    /// coordinates).
    pub fn flip_h(&self, image_width: f64) -> Result<BoundingBox> {
        if self.xmax > image_width {
            return Err(Error::BoxOutsideImage {
                xmin: self.xmin,
                ymin: self.ymin,
                xmax: self.xmax,
                ymax: self.ymax,
                width: image_width as u32,
                height: u32::MAX,
            });
        }
        BoundingBox::new(
            image_width - self.xmax,
            self.ymin,
            image_width - self.xmin,
            self.ymax,
        )
    }

    /// Multiply coordinates by per-axis factors.
    pub fn scale(&self, sx: f64, sy: f64) -> Result<BoundingBox> {
        if !(sx > 0.0 && sy > 0.0) || !sx.is_finite() || !sy.is_finite() {
            return Err(Error::InvalidScale { sx, sy });
        }
        BoundingBox::new(
            self.xmin * sx,
            self.ymin * sy,
            self.xmax * sx,
            self.ymax * sy,
        )
    }

    /// Intersect with `[0, width] x [0, height]`; `None` when nothing is left.
    pub fn clip_to(&self, width: f64, height: f64) -> Option<BoundingBox> {
        let xmin = self.xmin.max(0.0);
        let ymin = self.ymin.max(0.0);
        let xmax = self.xmax.min(width);
        let ymax = self.ymax.min(height);
        BoundingBox::new(xmin, ymin, xmax, ymax).ok()
    }

    /// Shift by `(dx, dy)` and clip to the image; `None` when the shifted box
    /// falls entirely outside.
    pub fn offset_clipped(&self, dx: f64, dy: f64, width: f64, height: f64) -> Option<BoundingBox> {
        let xmin = (self.xmin + dx).max(0.0);
        let ymin = (self.ymin + dy).max(0.0);
        let xmax = (self.xmax + dx).min(width);
        let ymax = (self.ymax + dy).min(height);
        BoundingBox::new(xmin, ymin, xmax, ymax).ok()
    }
}

/// COCO-style object size classes partitioned by box area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SizeBucket {
    Small,
    Medium,
    Large,
}

impl SizeBucket {
    /// Upper area bound (exclusive) for `Small`: 32^2.
    pub const SMALL_BELOW: f64 = 1024.0;
    /// Upper area bound (inclusive) for `Medium`: 96^2. Both boundary areas
    /// belong to `Medium`, so every box has exactly one bucket.
    pub const MEDIUM_MAX: f64 = 9216.0;

    pub fn from_area(area: f64) -> Self {
        if area < Self::SMALL_BELOW {
            SizeBucket::Small
        } else if area <= Self::MEDIUM_MAX {
            SizeBucket::Medium
        } else {
            SizeBucket::Large
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SizeBucket::Small => "small",
            SizeBucket::Medium => "medium",
            SizeBucket::Large => "large",
        }
    }
}
