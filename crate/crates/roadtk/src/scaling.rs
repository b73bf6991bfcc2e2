//! Compound-scaling calculator for the EfficientDet family.
//!
//! A single coefficient phi drives input resolution, BiFPN width and depth,
//! and prediction-head depth:
//!
//! ```text
//! resolution = 512 + 128 * phi
//! w_bifpn    = 64 * 1.35^phi        d_bifpn = 3 + phi
//! d_head     = 3 + floor(phi / 3)
//! ```
//!
//! The published D7 configuration departs from the formulas: its resolution
//! is 1536 (the formula gives 1408) and its backbone is B6 rather than B7.
//! Those two facts are encoded as an explicit exception table instead of
//! being folded into the formulas; both the formula value and the effective
//! value are reported.

use crate::error::{Error, Result};

pub const MAX_PHI: u8 = 8;

/// Backbone index paired with each phi. D0-D4 follow the published table,
/// D5/D6 the usual one-to-one pairing; D7 uses B6 (published exception) and
/// phi=8 maps to B7, matching the extended variant at the same resolution.
const BACKBONE_FOR_PHI: [u8; 9] = [0, 1, 2, 3, 4, 5, 6, 6, 7];

/// (phi, published input resolution) where the formula disagrees.
const RESOLUTION_EXCEPTIONS: [(u8, u32); 1] = [(7, 1536)];

/// Scaled model dimensions for one compound coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompoundConfig {
    pub phi: u8,
    /// Effective input resolution (exception table applied).
    pub input_resolution: u32,
    /// What the resolution formula alone yields.
    pub formula_resolution: u32,
    pub bifpn_width_raw: f64,
    /// Raw width rounded to the nearest multiple of 8 (ties up); channel
    /// counts must be integral and 8-alignment is the common convention.
    pub bifpn_width_rounded: u32,
    pub bifpn_depth: u32,
    pub head_depth: u32,
    pub backbone_index: u8,
}

impl CompoundConfig {
    pub fn model_name(&self) -> String {
        format!("D{}", self.phi)
    }

    pub fn backbone_name(&self) -> String {
        format!("B{}", self.backbone_index)
    }

    /// Key-value text form, one `key=value` per line.
    pub fn to_key_values(&self) -> String {
        format!(
            "model={}\nresolution={}\nformula_resolution={}\nbifpn_width_raw={}\n\
             bifpn_width_rounded={}\nbifpn_depth={}\nhead_depth={}\nbackbone={}\n",
            self.model_name(),
            self.input_resolution,
            self.formula_resolution,
            self.bifpn_width_raw,
            self.bifpn_width_rounded,
            self.bifpn_depth,
            self.head_depth,
            self.backbone_name(),
        )
    }
}

fn round_to_multiple_of_8(value: f64) -> u32 {
    ((value / 8.0 + 0.5).floor() * 8.0) as u32
}

/// Compute the configuration for `phi` in 0..=8.
pub fn compound_config(phi: u8) -> Result<CompoundConfig> {
    if phi > MAX_PHI {
        return Err(Error::PhiOutOfRange(phi as u32));
    }
    let formula_resolution = 512 + 128 * phi as u32;
    let input_resolution = RESOLUTION_EXCEPTIONS
        .iter()
        .find(|&&(p, _)| p == phi)
        .map(|&(_, r)| r)
        .unwrap_or(formula_resolution);
    let bifpn_width_raw = 64.0 * 1.35f64.powi(phi as i32);
    Ok(CompoundConfig {
        phi,
        input_resolution,
        formula_resolution,
        bifpn_width_raw,
        bifpn_width_rounded: round_to_multiple_of_8(bifpn_width_raw),
        bifpn_depth: 3 + phi as u32,
        head_depth: 3 + phi as u32 / 3,
        backbone_index: BACKBONE_FOR_PHI[phi as usize],
    })
}
