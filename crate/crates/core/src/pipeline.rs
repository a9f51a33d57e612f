//! In-memory wiring of the stages: simulate, image, reconstruct, evaluate.

use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::error::Result;
use crate::mesh::TriangleMesh;
use crate::metrics::{evaluate_all, MetricsReport};
use crate::radar::{add_noise, simulate_if_signal, IfSignal};
use crate::recon::{reconstruct_traced, RadarData, ReconInputs, ReconMode, ReconstructionResult, TraceRow};
use crate::sar::{backproject_volume, build_pyramid, project_view_image, ImagePyramid, ReflectivityVolume, SarImage};

pub fn simulate(scene: &TriangleMesh, cfg: &PipelineConfig) -> Result<IfSignal> {
    let mut signal = simulate_if_signal(scene, &cfg.scan, &cfg.fmcw, &cfg.reflection, cfg.simulation.visibility)?;
    if let Some(snr) = cfg.simulation.snr_db {
        add_noise(&mut signal, snr, cfg.seed);
    }
    Ok(signal)
}

/// One backprojected volume and its projected view image per view.
pub fn form_images(signal: &IfSignal, cfg: &PipelineConfig) -> Result<Vec<(ReflectivityVolume, SarImage)>> {
    signal.check_against(&cfg.scan, &cfg.fmcw)?;
    (0..cfg.scan.view_count())
        .into_par_iter()
        .map(|v| {
            let vol = backproject_volume(signal, &cfg.scan, &cfg.fmcw, &cfg.grid, v, &cfg.imaging.backprojection)?;
            let cam = cfg.grid.camera_for_view(&cfg.scan.views[v])?;
            let img = project_view_image(&vol, &cam)?;
            Ok((vol, img))
        })
        .collect()
}

pub fn pyramids(images: &[SarImage], levels: usize) -> Result<Vec<ImagePyramid>> {
    images.iter().map(|i| build_pyramid(i, levels)).collect()
}

/// Reconstructs from view images and, when given, the observed signal.
pub fn reconstruct_from(
    images: &[SarImage],
    signal: Option<&IfSignal>,
    ground_truth: Option<&TriangleMesh>,
    cfg: &PipelineConfig,
    mode: ReconMode,
    seed: u64,
    trace: &mut Vec<TraceRow>,
) -> Result<ReconstructionResult> {
    let pyr = pyramids(images, cfg.imaging.pyramid_levels)?;
    let inputs = ReconInputs {
        pyramids: &pyr,
        lattice: cfg.grid,
        radar: signal.map(|s| RadarData {
            signal: s,
            scan: &cfg.scan,
            fmcw: &cfg.fmcw,
            params: &cfg.reflection,
        }),
        ground_truth,
    };
    reconstruct_traced(&inputs, &cfg.recon, &cfg.weights, mode, seed, trace)
}

pub struct PipelineRun {
    pub signal: IfSignal,
    pub views: Vec<(ReflectivityVolume, SarImage)>,
    pub result: ReconstructionResult,
    pub report: MetricsReport,
}

/// Full run on a known scene; the scene is the ground truth for evaluation
/// and, in supervised mode, for the chamfer target.
pub fn run(scene: &TriangleMesh, cfg: &PipelineConfig) -> Result<PipelineRun> {
    cfg.validate()?;
    let signal = simulate(scene, cfg)?;
    let views = form_images(&signal, cfg)?;
    let images: Vec<SarImage> = views.iter().map(|(_, i)| i.clone()).collect();
    let mut trace = Vec::new();
    let result = reconstruct_from(&images, Some(&signal), Some(scene), cfg, cfg.mode, cfg.seed, &mut trace)?;
    let report = evaluate_all(result.final_mesh(), scene, &cfg.metrics)?;
    Ok(PipelineRun {
        signal,
        views,
        result,
        report,
    })
}
