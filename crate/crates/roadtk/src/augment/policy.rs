//! Augmentation policy grammar and the bundled default policies.
//!
//! A policy file is line-oriented text: each non-comment line is one
//! sub-policy, a comma-separated sequence of `Kind(probability,magnitude)`
//! specs. At application time one sub-policy is chosen uniformly and its
//! specs fire independently, each with its own probability.
//!
//! Magnitude units per kind:
//!
//! | kind       | magnitude                          | range          |
//! |------------|------------------------------------|----------------|
//! | HFlip      | unused, write 0                    | [0, 0]         |
//! | Resize     | target longer side in pixels       | [32, 4096]     |
//! | Translate  | shift as a fraction of each axis   | [-0.45, 0.45]  |
//! | Brightness | additive per-channel delta         | [-128, 128]    |
//! | Contrast   | gain about the mid-level 128       | [0.2, 3.0]     |
//! | Equalize   | unused, write 0                    | [0, 0]         |
//! | Rotate     | degrees                            | [-180, 180]    |
//!
//! `Rotate` exists in the grammar so lineage policies can be represented and
//! stripped, but it is never applied: rotating a crack image swaps the
//! longitudinal and transverse classes, so rotation-bearing policies must go
//! through [`strip_rotation`] before use.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    HFlip,
    Resize,
    Translate,
    Brightness,
    Contrast,
    Equalize,
    Rotate,
}

impl TransformKind {
    pub const ALL: [TransformKind; 7] = [
        TransformKind::HFlip,
        TransformKind::Resize,
        TransformKind::Translate,
        TransformKind::Brightness,
        TransformKind::Contrast,
        TransformKind::Equalize,
        TransformKind::Rotate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransformKind::HFlip => "HFlip",
            TransformKind::Resize => "Resize",
            TransformKind::Translate => "Translate",
            TransformKind::Brightness => "Brightness",
            TransformKind::Contrast => "Contrast",
            TransformKind::Equalize => "Equalize",
            TransformKind::Rotate => "Rotate",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == name)
    }

    /// Inclusive magnitude bounds.
    pub fn magnitude_range(self) -> (f64, f64) {
        match self {
            TransformKind::HFlip | TransformKind::Equalize => (0.0, 0.0),
            TransformKind::Resize => (32.0, 4096.0),
            TransformKind::Translate => (-0.45, 0.45),
            TransformKind::Brightness => (-128.0, 128.0),
            TransformKind::Contrast => (0.2, 3.0),
            TransformKind::Rotate => (-180.0, 180.0),
        }
    }

    /// Whether the transform moves pixels (and therefore boxes).
    pub fn is_geometric(self) -> bool {
        matches!(
            self,
            TransformKind::HFlip
                | TransformKind::Resize
                | TransformKind::Translate
                | TransformKind::Rotate
        )
    }
}

/// One probabilistic transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformSpec {
    pub kind: TransformKind,
    pub probability: f64,
    pub magnitude: f64,
}

impl TransformSpec {
    fn check(&self) -> std::result::Result<(), String> {
        if !(0.0..=1.0).contains(&self.probability) || !self.probability.is_finite() {
            return Err(format!(
                "{} probability {} outside [0, 1]",
                self.kind.name(),
                self.probability
            ));
        }
        let (lo, hi) = self.kind.magnitude_range();
        if !(lo..=hi).contains(&self.magnitude) || !self.magnitude.is_finite() {
            return Err(format!(
                "{} magnitude {} outside [{lo}, {hi}]",
                self.kind.name(),
                self.magnitude
            ));
        }
        Ok(())
    }
}

/// An ordered set of sub-policies with a rotation-elimination marker.
/// `rotation_free` asserts that no `Rotate` spec appears anywhere; the
/// constructor and [`AugPolicy::validate`] reject a policy claiming the flag
/// while carrying one.
#[derive(Debug, Clone, PartialEq)]
pub struct AugPolicy {
    pub name: String,
    pub sub_policies: Vec<Vec<TransformSpec>>,
    pub rotation_free: bool,
}

impl AugPolicy {
    pub fn new(
        name: impl Into<String>,
        sub_policies: Vec<Vec<TransformSpec>>,
        rotation_free: bool,
    ) -> Result<Self> {
        let policy = Self {
            name: name.into(),
            sub_policies,
            rotation_free,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn contains_rotation(&self) -> bool {
        self.sub_policies
            .iter()
            .flatten()
            .any(|s| s.kind == TransformKind::Rotate)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: String| Error::InvalidPolicy {
            name: self.name.clone(),
            reason,
        };
        if self.sub_policies.is_empty() {
            return Err(invalid("policy has no sub-policies".to_string()));
        }
        for spec in self.sub_policies.iter().flatten() {
            spec.check().map_err(invalid)?;
        }
        if self.rotation_free && self.contains_rotation() {
            return Err(invalid(
                "claims rotation_free but contains a Rotate spec".to_string(),
            ));
        }
        Ok(())
    }

    /// Parse policy text. The `rotation_free` flag is derived from the
    /// content: text carries no out-of-band claims.
    pub fn parse(text: &str, name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        let invalid = |reason: String| Error::InvalidPolicy {
            name: name.clone(),
            reason,
        };
        let mut sub_policies = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut specs = Vec::new();
            for chunk in split_top_level(line) {
                let chunk = chunk.trim();
                let (kind_name, args) = chunk.split_once('(').ok_or_else(|| {
                    invalid(format!(
                        "line {}: expected Kind(prob,mag), got {chunk:?}",
                        idx + 1
                    ))
                })?;
                let args = args.strip_suffix(')').ok_or_else(|| {
                    invalid(format!("line {}: missing ')' in {chunk:?}", idx + 1))
                })?;
                let kind = TransformKind::from_name(kind_name.trim()).ok_or_else(|| {
                    invalid(format!("line {}: unknown transform {kind_name:?}", idx + 1))
                })?;
                let parts: Vec<&str> = args.split(',').map(str::trim).collect();
                if parts.len() != 2 {
                    return Err(invalid(format!(
                        "line {}: expected two arguments in {chunk:?}",
                        idx + 1
                    )));
                }
                let probability: f64 = parts[0].parse().map_err(|_| {
                    invalid(format!("line {}: bad probability {:?}", idx + 1, parts[0]))
                })?;
                let magnitude: f64 = parts[1].parse().map_err(|_| {
                    invalid(format!("line {}: bad magnitude {:?}", idx + 1, parts[1]))
                })?;
                specs.push(TransformSpec {
                    kind,
                    probability,
                    magnitude,
                });
            }
            sub_policies.push(specs);
        }
        let rotation_free = !sub_policies
            .iter()
            .flatten()
            .any(|s: &TransformSpec| s.kind == TransformKind::Rotate);
        Self::new(name, sub_policies, rotation_free)
    }

    /// The inverse of [`AugPolicy::parse`], one sub-policy per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for sub in &self.sub_policies {
            let line: Vec<String> = sub
                .iter()
                .map(|s| format!("{}({},{})", s.kind.name(), s.probability, s.magnitude))
                .collect();
            out.push_str(&line.join(", "));
            out.push('\n');
        }
        out
    }

    pub const BUILTIN_NAMES: [&'static str; 4] = ["v0", "v1", "v2", "v3"];

    /// A bundled default policy by name (`v0`..`v3`), rotation included;
    /// strip before applying.
    pub fn builtin(name: &str) -> Option<AugPolicy> {
        let text = match name {
            "v0" => include_str!("../../policies/v0.txt"),
            "v1" => include_str!("../../policies/v1.txt"),
            "v2" => include_str!("../../policies/v2.txt"),
            "v3" => include_str!("../../policies/v3.txt"),
            _ => return None,
        };
        Some(AugPolicy::parse(text, name).expect("bundled policies are valid"))
    }
}

/// Split on commas that are not inside parentheses.
fn split_top_level(line: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in line.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(&line[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&line[start..]);
    parts
}

/// Remove every `Rotate` spec and mark the result rotation-free. Other specs
/// are untouched and keep their order. Rotation changes crack orientation —
/// it turns a longitudinal crack into a transverse one — so the lineage
/// policies are used with this strategy eliminated.
pub fn strip_rotation(policy: &AugPolicy) -> AugPolicy {
    AugPolicy {
        name: policy.name.clone(),
        sub_policies: policy
            .sub_policies
            .iter()
            .map(|sub| {
                sub.iter()
                    .filter(|s| s.kind != TransformKind::Rotate)
                    .copied()
                    .collect()
            })
            .collect(),
        rotation_free: true,
    }
}
