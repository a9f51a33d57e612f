use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::trace::TraceRow;
use crate::bvh::PointIndex;
use crate::error::{Error, Result};
use crate::features::vertex_descriptors;
use crate::geometry::Vec3;
use crate::losses::{
    all_elements, edge_length_loss, laplacian_loss, normal_consistency_loss, radar_loss, random_elements,
    surface_chamfer_loss, total_loss, LossTerms, LossValue, LossWeights,
};
use crate::mesh::{sample_surface_with_origins, TriangleMesh};
use crate::radar::{ApertureScan, FmcwConfig, IfSignal, ReflectionParams};
use crate::sar::ImagePyramid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReconMode {
    /// Chamfer against a ground-truth surface, regularizers and radar.
    Supervised,
    /// Image data term, regularizers and radar.
    Blind,
}

impl std::str::FromStr for ReconMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "supervised" => Ok(ReconMode::Supervised),
            "blind" => Ok(ReconMode::Blind),
            other => Err(format!("unknown mode {other:?} (expected blind|supervised)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StageConfig {
    pub iterations: usize,
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Per-vertex gradient norm cap (normalized units); 0 disables.
    pub clip_norm: f64,
    /// Pyramid levels sampled by the image term.
    pub levels: Vec<usize>,
    pub subdivide_after: bool,
}

impl Default for StageConfig {
    fn default() -> Self {
        StageConfig {
            iterations: 300,
            step_size: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            clip_norm: 1.0,
            levels: vec![1, 0],
            subdivide_after: false,
        }
    }
}

impl StageConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("stage iterations must be >= 1".into()));
        }
        if !(self.step_size > 0.0) {
            return Err(Error::Config("step size must be > 0".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::Config("moment constants must lie in [0, 1)".into()));
        }
        if !(self.epsilon > 0.0) || !(self.clip_norm >= 0.0) {
            return Err(Error::Config("epsilon must be > 0 and clip norm >= 0".into()));
        }
        if self.levels.is_empty() {
            return Err(Error::Config("stage needs at least one pyramid level".into()));
        }
        Ok(())
    }
}

/// Observed echoes and the acquisition they came from.
#[derive(Debug, Clone, Copy)]
pub struct RadarData<'a> {
    pub signal: &'a IfSignal,
    pub scan: &'a ApertureScan,
    pub fmcw: &'a FmcwConfig,
    pub params: &'a ReflectionParams,
}

/// Points sampled on the supervision surface.
pub struct ChamferTarget {
    pub points: Vec<Vec3>,
    pub index: PointIndex,
}

impl ChamferTarget {
    pub fn new(points: Vec<Vec3>) -> Self {
        let index = PointIndex::new(&points);
        ChamferTarget { points, index }
    }
}

/// Everything a stage reads besides the mesh.
pub struct StageContext<'a> {
    pub pyramids: &'a [ImagePyramid],
    pub radar: Option<RadarData<'a>>,
    pub target: Option<&'a ChamferTarget>,
    /// Reference length; losses and steps are expressed in units of it.
    pub length_scale: f64,
    /// Multiplier that normalizes the radar loss by the observed magnitude.
    pub radar_scale: f64,
    pub chamfer_samples: usize,
    /// Aperture elements per view used by each radar evaluation; 0 = all.
    pub radar_elements_per_view: usize,
}

/// Where a stage sits in the global schedule.
#[derive(Debug, Clone, Copy)]
pub struct StageSlot {
    /// 1-based stage number; indexes `LossWeights::stage_weights`.
    pub stage: usize,
    pub first_iteration: usize,
    pub total_iterations: usize,
}

pub(crate) fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit_scaled(v: LossValue, value_scale: f64, length: f64) -> LossValue {
    let g = value_scale * length;
    LossValue {
        value: v.value * value_scale,
        gradient: v.gradient.into_iter().map(|x| x * g).collect(),
    }
}

/// `mean_i mean_l (1 - max_v I_v^l(p_i))` and its gradient.
pub fn image_term(positions: &[Vec3], pyramids: &[ImagePyramid], levels: &[usize]) -> Result<LossValue> {
    let d = vertex_descriptors(positions, pyramids, levels)?;
    let nl = d.levels.len();
    let scale = 1.0 / (positions.len() * nl) as f64;
    let mut value = 0.0;
    let mut gradient = vec![Vec3::zeros(); positions.len()];
    for (i, g) in gradient.iter_mut().enumerate() {
        let vals = d.vertex(i);
        let grads = d.vertex_gradients(i);
        for l in 0..nl {
            value += 1.0 - vals[3 * l];
            *g -= grads[3 * l] * scale;
        }
    }
    Ok(LossValue {
        value: value * scale,
        gradient,
    })
}

/// Unweighted terms at `positions`, in normalized units; gradients are with
/// respect to positions divided by the length scale. Terms whose base weight
/// is zero are skipped.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_terms(
    mesh: &TriangleMesh,
    positions: &[Vec3],
    ctx: &StageContext,
    levels: &[usize],
    weights: &LossWeights,
    mode: ReconMode,
    seed: u64,
) -> Result<LossTerms> {
    let l = ctx.length_scale;
    let inv2 = 1.0 / (l * l);
    let mut terms = LossTerms::default();
    match mode {
        ReconMode::Supervised if weights.chamfer > 0.0 => {
            let target = ctx
                .target
                .ok_or_else(|| Error::Config("supervised mode needs a ground-truth surface".into()))?;
            let current = mesh.with_positions(positions.to_vec())?;
            let (_, origins) = sample_surface_with_origins(&current, ctx.chamfer_samples, seed)?;
            let v = surface_chamfer_loss(mesh, positions, &origins, &target.points, &target.index)?;
            terms.chamfer = Some(unit_scaled(v, inv2, l));
        }
        ReconMode::Blind if weights.image > 0.0 => {
            terms.image = Some(unit_scaled(image_term(positions, ctx.pyramids, levels)?, 1.0, l));
        }
        _ => {}
    }
    if weights.regularization > 0.0 {
        if weights.laplacian > 0.0 {
            terms.laplacian = Some(unit_scaled(laplacian_loss(mesh, positions)?, inv2, l));
        }
        if weights.edge > 0.0 {
            terms.edge = Some(unit_scaled(edge_length_loss(mesh, positions, weights.edge_kind)?, inv2, l));
        }
        if weights.normal > 0.0 {
            terms.normal = Some(unit_scaled(normal_consistency_loss(mesh, positions)?, 1.0, l));
        }
    }
    if let (Some(r), true) = (&ctx.radar, weights.radar > 0.0) {
        let elements = if ctx.radar_elements_per_view == 0 {
            all_elements(r.scan)
        } else {
            random_elements(r.scan, ctx.radar_elements_per_view, seed)
        };
        let v = radar_loss(mesh, positions, r.signal, r.scan, r.fmcw, r.params, &elements)?;
        terms.radar = Some(unit_scaled(v, ctx.radar_scale, l));
    }
    Ok(terms)
}

/// Optimizes vertex positions of `mesh` for `cfg.iterations` steps, appending
/// one row per iteration to `trace`. Connectivity is never changed.
#[allow(clippy::too_many_arguments)]
pub fn run_stage(
    mesh: &TriangleMesh,
    ctx: &StageContext,
    cfg: &StageConfig,
    slot: StageSlot,
    weights: &LossWeights,
    mode: ReconMode,
    seed: u64,
    trace: &mut Vec<TraceRow>,
) -> Result<TriangleMesh> {
    cfg.validate()?;
    weights.validate()?;
    if !(ctx.length_scale > 0.0) {
        return Err(Error::Config("length scale must be > 0".into()));
    }
    let n = mesh.vertex_count();
    let mut positions = mesh.vertices().to_vec();
    let mut adam = Adam::new(n, cfg.step_size, cfg.beta1, cfg.beta2, cfg.epsilon, cfg.clip_norm);
    let mut reference = None;
    let total_iters = slot.total_iterations.max(1) as f64;
    for it in 0..cfg.iterations {
        let iteration = slot.first_iteration + it;
        let progress = iteration as f64 / total_iters;
        let terms = evaluate_terms(
            mesh,
            &positions,
            ctx,
            &cfg.levels,
            weights,
            mode,
            mix_seed(seed, slot.stage as u64, it as u64),
        )?;
        if let Some(term) = terms.first_non_finite() {
            return Err(Error::NonFinite {
                term: term.to_string(),
                iteration,
            });
        }
        let total = total_loss(&terms, weights, slot.stage, progress, n)?;
        trace.push(TraceRow {
            iteration,
            stage: slot.stage,
            chamfer: terms.chamfer.as_ref().map(|v| v.value),
            image: terms.image.as_ref().map(|v| v.value),
            laplacian: terms.laplacian.as_ref().map(|v| v.value),
            edge: terms.edge.as_ref().map(|v| v.value),
            normal: terms.normal.as_ref().map(|v| v.value),
            radar: terms.radar.as_ref().map(|v| v.value),
            total: total.value,
        });
        // The guard compares against the first iteration with the radar
        // weight fully ramped, so warmup alone cannot trip it.
        let reference = *reference.get_or_insert(total_loss(&terms, weights, slot.stage, 1.0, n)?.value);
        if reference > 0.0 && total.value > 10.0 * reference {
            return Err(Error::Diverged {
                iteration,
                value: total.value,
                reference,
            });
        }
        let step = adam.step(&total.gradient);
        for (p, d) in positions.iter_mut().zip(&step) {
            *p += d * ctx.length_scale;
        }
    }
    mesh.with_positions(positions)
}
