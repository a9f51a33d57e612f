//! Mesh comparison metrics: volumetric overlap, sampled surface distances,
//! normal and Laplacian agreement, and self-intersection rate.

mod selfintersect;
mod surface;
mod voxel;

pub use selfintersect::{intersecting_faces, si_metric};
pub use surface::{ane, anld, assd, assd_hausdorff, hausdorff, surface_distances, SurfaceIndex};
pub use voxel::{dice_jaccard, voxelize, OccupancyGrid};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::sar::GridSpec;

pub const METRICS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricParams {
    /// Voxels along each axis of the evaluation grid.
    pub voxels: usize,
    /// Surface samples per mesh for the distance and normal metrics.
    pub samples: usize,
    pub seed: u64,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams {
            voxels: 128,
            samples: 10_000,
            seed: 7,
        }
    }
}

/// Definitions of the metrics whose meaning is a local convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDefinitions {
    pub ane: String,
    pub anld: String,
    pub si: String,
}

impl Default for MetricDefinitions {
    fn default() -> Self {
        MetricDefinitions {
            ane: "mean angle in degrees between the normal at each predicted surface sample and the normal of the closest ground-truth face".into(),
            anld: "mean over predicted vertices of | |L_pred(i)| - |L_gt(nearest gt vertex)| | / mean gt edge length, L the uniform Laplacian".into(),
            si: "percentage of faces intersecting a face they share no vertex with".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub dice: f64,
    pub jaccard: f64,
    /// Meters.
    pub assd: f64,
    /// Meters, sampled.
    pub hd: f64,
    pub ane_deg: f64,
    pub anld: f64,
    pub si_percent: f64,
    pub params: MetricParams,
    pub grid: GridSpec,
    pub definitions: MetricDefinitions,
}

/// Cubic grid of `n^3` voxels centered on the union bounding box, with at
/// least one empty voxel of margin on every side.
pub fn evaluation_grid(a: &TriangleMesh, b: &TriangleMesh, n: usize) -> Result<GridSpec> {
    if n < 4 {
        return Err(Error::OutOfRange("evaluation grid needs at least 4 voxels per axis".into()));
    }
    let bounds = a.bounds().merge(&b.bounds());
    let extent = bounds.extent().max();
    if !(extent > 0.0) || !extent.is_finite() {
        return Err(Error::Degenerate("meshes have an empty bounding box".into()));
    }
    // Two voxels of slack on each side keeps the mesh strictly inside the
    // one-voxel margin even after rounding.
    let spacing = extent / (n - 4) as f64;
    let half = 0.5 * spacing * n as f64;
    Ok(GridSpec::cube(bounds.center(), half, n))
}

pub fn evaluate_all(pred: &TriangleMesh, gt: &TriangleMesh, params: &MetricParams) -> Result<MetricsReport> {
    if params.samples == 0 {
        return Err(Error::OutOfRange("sample count must be >= 1".into()));
    }
    if params.samples < 1000 {
        log::warn!("{} surface samples is below the 1000 recommended for reporting", params.samples);
    }
    let grid = evaluation_grid(pred, gt, params.voxels)?;
    let (dice, jaccard) = dice_jaccard(&voxelize(pred, &grid)?, &voxelize(gt, &grid)?)?;
    let (assd, hd) = assd_hausdorff(pred, gt, params.samples, params.seed)?;
    Ok(MetricsReport {
        schema_version: METRICS_SCHEMA_VERSION,
        dice,
        jaccard,
        assd,
        hd,
        ane_deg: ane(pred, gt, params.samples, params.seed)?,
        anld: anld(pred, gt)?,
        si_percent: si_metric(pred),
        params: *params,
        grid,
        definitions: MetricDefinitions::default(),
    })
}

/// Volume of the intersection of two balls of radius `r` whose centers are
/// `d` apart.
pub fn lens_volume(r: f64, d: f64) -> f64 {
    if d >= 2.0 * r {
        return 0.0;
    }
    std::f64::consts::PI * (4.0 * r + d) * (2.0 * r - d).powi(2) / 12.0
}
