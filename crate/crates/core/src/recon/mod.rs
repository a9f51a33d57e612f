//! Coarse-to-fine template deformation: an icosphere fitted to the image mass
//! is optimized stage by stage with Adam, subdividing between stages.

mod adam;
mod stage;
mod template;
mod trace;

pub use adam::Adam;
pub use stage::{
    evaluate_terms, image_term, run_stage, ChamferTarget, RadarData, ReconMode, StageConfig, StageContext, StageSlot,
};
pub use template::{image_mass_moments, init_template, template_sphere, TemplateConfig};
pub use trace::{smoothed_totals, trace_to_csv, TraceRow, TRACE_HEADER};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::{radar_loss, random_elements, LossWeights};
use crate::mesh::{loop_subdivide, make_icosphere, sample_surface, TriangleMesh};
use crate::sar::{GridSpec, ImagePyramid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReconConfig {
    pub template: TemplateConfig,
    pub stages: Vec<StageConfig>,
    /// Surface samples drawn from the current mesh per chamfer evaluation.
    pub chamfer_samples: usize,
    /// Samples drawn once from the ground-truth surface.
    pub target_samples: usize,
    /// Random aperture elements per view for each radar evaluation; 0 = all.
    pub radar_elements_per_view: usize,
    /// Fixed elements per view for the before/after radar loss probe.
    pub radar_probe_elements_per_view: usize,
}

impl Default for ReconConfig {
    fn default() -> Self {
        let stage = |levels: Vec<usize>, subdivide_after| StageConfig {
            levels,
            subdivide_after,
            ..StageConfig::default()
        };
        ReconConfig {
            template: TemplateConfig::default(),
            stages: vec![stage(vec![3, 2], true), stage(vec![2, 1], true), stage(vec![1, 0], false)],
            chamfer_samples: 3000,
            target_samples: 10000,
            radar_elements_per_view: 4,
            radar_probe_elements_per_view: 16,
        }
    }
}

impl ReconConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::Config("need at least one stage".into()));
        }
        if self.stages.len() > 3 {
            return Err(Error::Config("at most 3 stages (one stage weight each)".into()));
        }
        for s in &self.stages {
            s.validate()?;
        }
        if self.chamfer_samples == 0 || self.target_samples == 0 {
            return Err(Error::Config("chamfer sample counts must be >= 1".into()));
        }
        Ok(())
    }

    pub fn total_iterations(&self) -> usize {
        self.stages.iter().map(|s| s.iterations).sum()
    }

    pub fn max_level(&self) -> usize {
        self.stages.iter().flat_map(|s| s.levels.iter().copied()).max().unwrap_or(0)
    }
}

/// Observations for one reconstruction.
pub struct ReconInputs<'a> {
    pub pyramids: &'a [ImagePyramid],
    /// Lattice over which the template's image mass is integrated.
    pub lattice: GridSpec,
    pub radar: Option<RadarData<'a>>,
    /// Supervision surface; required in supervised mode.
    pub ground_truth: Option<&'a TriangleMesh>,
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub template: TriangleMesh,
    /// Mesh at the end of each stage; the last one is the final mesh.
    pub stages: Vec<TriangleMesh>,
    pub trace: Vec<TraceRow>,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub seed: u64,
    pub mode: ReconMode,
    pub length_scale: f64,
    /// Normalized radar loss of the template and of the final mesh on a fixed
    /// element subset.
    pub radar_initial: Option<f64>,
    pub radar_final: Option<f64>,
}

impl ReconstructionResult {
    pub fn final_mesh(&self) -> &TriangleMesh {
        self.stages.last().unwrap_or(&self.template)
    }
}

fn radar_probe(mesh: &TriangleMesh, r: &RadarData, scale: f64, per_view: usize, seed: u64) -> Result<f64> {
    let elements = random_elements(r.scan, per_view, seed);
    Ok(scale * radar_loss(mesh, mesh.vertices(), r.signal, r.scan, r.fmcw, r.params, &elements)?.value)
}

/// Template initialization followed by every configured stage.
pub fn reconstruct(
    inputs: &ReconInputs,
    cfg: &ReconConfig,
    weights: &LossWeights,
    mode: ReconMode,
    seed: u64,
) -> Result<ReconstructionResult> {
    let mut trace = Vec::new();
    reconstruct_traced(inputs, cfg, weights, mode, seed, &mut trace)
}

/// [`reconstruct`] writing into a caller-owned trace, which keeps the rows of
/// an aborted run.
pub fn reconstruct_traced(
    inputs: &ReconInputs,
    cfg: &ReconConfig,
    weights: &LossWeights,
    mode: ReconMode,
    seed: u64,
    trace: &mut Vec<TraceRow>,
) -> Result<ReconstructionResult> {
    let started = Instant::now();
    cfg.validate()?;
    weights.validate()?;
    if inputs.pyramids.is_empty() {
        return Err(Error::Dimension("no view images".into()));
    }
    let need = cfg.max_level() + 1;
    if let Some(p) = inputs.pyramids.iter().find(|p| p.level_count() < need) {
        return Err(Error::Config(format!(
            "view {} pyramid has {} levels, stages need {need}",
            p.view_id,
            p.level_count()
        )));
    }
    let target = match (mode, inputs.ground_truth) {
        (ReconMode::Supervised, None) => {
            return Err(Error::Config("supervised mode needs a ground-truth mesh".into()))
        }
        (ReconMode::Supervised, Some(gt)) => Some(ChamferTarget::new(
            sample_surface(gt, cfg.target_samples, mix_target_seed(seed))?.points,
        )),
        (ReconMode::Blind, _) => None,
    };
    if let Some(r) = &inputs.radar {
        r.signal.check_against(r.scan, r.fmcw)?;
    }

    let (center, length_scale) = template_sphere(inputs.pyramids, &inputs.lattice, &cfg.template)?;
    let template = make_icosphere(cfg.template.level, length_scale, center)?;
    let radar_scale = match &inputs.radar {
        Some(r) => {
            let m = r.signal.mean_abs();
            if m > 0.0 {
                1.0 / m
            } else {
                log::warn!("observed signal is all zero; radar loss left unnormalized");
                1.0
            }
        }
        None => 1.0,
    };
    let probe_seed = mix_target_seed(seed ^ 0x5EED);
    let radar_initial = match &inputs.radar {
        Some(r) => Some(radar_probe(&template, r, radar_scale, cfg.radar_probe_elements_per_view, probe_seed)?),
        None => None,
    };

    let ctx = StageContext {
        pyramids: inputs.pyramids,
        radar: inputs.radar,
        target: target.as_ref(),
        length_scale,
        radar_scale,
        chamfer_samples: cfg.chamfer_samples,
        radar_elements_per_view: cfg.radar_elements_per_view,
    };
    let total_iterations = cfg.total_iterations();
    let mut mesh = template.clone();
    let mut stages = Vec::with_capacity(cfg.stages.len());
    let mut first_iteration = 0;
    for (k, stage_cfg) in cfg.stages.iter().enumerate() {
        let slot = StageSlot {
            stage: k + 1,
            first_iteration,
            total_iterations,
        };
        log::info!(
            "stage {} of {}: {} vertices, {} iterations",
            k + 1,
            cfg.stages.len(),
            mesh.vertex_count(),
            stage_cfg.iterations
        );
        let out = run_stage(&mesh, &ctx, stage_cfg, slot, weights, mode, seed, trace)?;
        first_iteration += stage_cfg.iterations;
        mesh = if stage_cfg.subdivide_after {
            loop_subdivide(&out)?
        } else {
            out.clone()
        };
        stages.push(out);
    }
    let final_mesh = stages.last().expect("at least one stage");
    let radar_final = match &inputs.radar {
        Some(r) => Some(radar_probe(final_mesh, r, radar_scale, cfg.radar_probe_elements_per_view, probe_seed)?),
        None => None,
    };
    Ok(ReconstructionResult {
        template,
        stages,
        trace: trace.clone(),
        iterations: total_iterations,
        wall_time_s: started.elapsed().as_secs_f64(),
        seed,
        mode,
        length_scale,
        radar_initial,
        radar_final,
    })
}

fn mix_target_seed(seed: u64) -> u64 {
    stage::mix_seed(seed, 0x7A46E7, 0)
}
