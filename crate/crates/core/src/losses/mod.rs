//! Loss terms with analytic vertex gradients, their weighted combination, and
//! a finite-difference checker.

mod chamfer;
mod fd;
mod radar;
pub mod reference;
mod regularizers;

pub use chamfer::{chamfer_loss, chamfer_with_index, surface_chamfer_loss};
pub use fd::{default_step, finite_diff_check, FdReport};
pub use radar::{all_elements, radar_loss, random_elements};
pub use regularizers::{edge_length_loss, laplacian_loss, normal_consistency_loss, EdgeLossKind};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// A scalar loss and its gradient, one vector per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub value: f64,
    pub gradient: Vec<Vec3>,
}

impl LossValue {
    pub fn zeros(n: usize) -> Self {
        LossValue {
            value: 0.0,
            gradient: vec![Vec3::zeros(); n],
        }
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.value *= s;
        self.gradient.iter_mut().for_each(|g| *g *= s);
        self
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.gradient.iter().all(|g| g.iter().all(|c| c.is_finite()))
    }

    fn add_scaled(&mut self, other: &LossValue, s: f64) {
        self.value += s * other.value;
        for (a, b) in self.gradient.iter_mut().zip(&other.gradient) {
            *a += b * s;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossWeights {
    pub chamfer: f64,
    /// Blind-mode image data term.
    pub image: f64,
    pub regularization: f64,
    pub laplacian: f64,
    pub edge: f64,
    pub edge_kind: EdgeLossKind,
    pub normal: f64,
    pub radar: f64,
    /// Geometric weight per stage; entry 0 belongs to the template.
    pub stage_weights: [f64; 4],
    /// Fraction of total iterations over which the radar weight ramps up.
    pub warmup_fraction: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            chamfer: 1.0,
            image: 1.0,
            regularization: 1.0,
            laplacian: 1.0,
            edge: 1.0,
            edge_kind: EdgeLossKind::Variance,
            normal: 0.1,
            radar: 0.1,
            stage_weights: [0.3, 0.05, 0.46, 0.16],
            warmup_fraction: 0.04,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let scalars = [
            ("chamfer", self.chamfer),
            ("image", self.image),
            ("regularization", self.regularization),
            ("laplacian", self.laplacian),
            ("edge", self.edge),
            ("normal", self.normal),
            ("radar", self.radar),
        ];
        for (name, v) in scalars {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("weight {name} must be a finite value >= 0")));
            }
        }
        if self.stage_weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Config("stage weights must be finite and >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.warmup_fraction) {
            return Err(Error::Config("warmup fraction must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Radar weight at global optimization progress `progress` in `[0, 1]`.
    pub fn radar_weight(&self, progress: f64) -> f64 {
        if self.warmup_fraction <= 0.0 || progress >= self.warmup_fraction {
            self.radar
        } else {
            self.radar * (progress.max(0.0) / self.warmup_fraction)
        }
    }
}

/// Unweighted term values entering [`total_loss`]; absent terms contribute 0.
#[derive(Debug, Clone, Default)]
pub struct LossTerms {
    pub chamfer: Option<LossValue>,
    pub image: Option<LossValue>,
    pub laplacian: Option<LossValue>,
    pub edge: Option<LossValue>,
    pub normal: Option<LossValue>,
    pub radar: Option<LossValue>,
}

impl LossTerms {
    fn iter(&self) -> impl Iterator<Item = (&'static str, &LossValue)> {
        [
            ("chamfer", &self.chamfer),
            ("image", &self.image),
            ("laplacian", &self.laplacian),
            ("edge", &self.edge),
            ("normal", &self.normal),
            ("radar", &self.radar),
        ]
        .into_iter()
        .filter_map(|(n, v)| v.as_ref().map(|v| (n, v)))
    }

    /// Name of the first term holding a non-finite value or gradient.
    pub fn first_non_finite(&self) -> Option<&'static str> {
        self.iter().find(|(_, v)| !v.is_finite()).map(|(n, _)| n)
    }
}

/// Effective multiplier of each term at `stage` and `progress`.
pub fn term_multipliers(w: &LossWeights, stage: usize, progress: f64) -> Result<[(&'static str, f64); 6]> {
    let g = *w
        .stage_weights
        .get(stage)
        .ok_or_else(|| Error::Config(format!("no stage weight for stage {stage}")))?;
    Ok([
        ("chamfer", g * w.chamfer),
        ("image", g * w.image),
        ("laplacian", g * w.regularization * w.laplacian),
        ("edge", g * w.regularization * w.edge),
        ("normal", g * w.regularization * w.normal),
        ("radar", w.radar_weight(progress)),
    ])
}

/// Weighted sum of `terms`: geometric terms scaled by `stage_weights[stage]`,
/// radar by the warmed-up radar weight.
pub fn total_loss(terms: &LossTerms, w: &LossWeights, stage: usize, progress: f64, vertex_count: usize) -> Result<LossValue> {
    let mult = term_multipliers(w, stage, progress)?;
    let mut out = LossValue::zeros(vertex_count);
    for (name, value) in terms.iter() {
        if value.gradient.len() != vertex_count {
            return Err(Error::Dimension(format!("{name} gradient has wrong length")));
        }
        let s = mult.iter().find(|(n, _)| *n == name).map(|(_, s)| *s).unwrap_or(0.0);
        out.add_scaled(value, s);
    }
    Ok(out)
}
