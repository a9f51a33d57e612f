//! Pipeline configuration: one JSON document covering every stage.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::losses::LossWeights;
use crate::metrics::MetricParams;
use crate::radar::{ApertureScan, FmcwConfig, ReflectionParams, VisibilityMode};
use crate::recon::{ReconConfig, ReconMode};
use crate::sar::{BackprojectionOptions, GridSpec, RangeCompression};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub visibility: VisibilityMode,
    /// Complex white noise at this SNR when set.
    pub snr_db: Option<f64>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            visibility: VisibilityMode::Hard,
            snr_db: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImagingConfig {
    pub backprojection: BackprojectionOptions,
    pub range: RangeCompression,
    pub pyramid_levels: usize,
}

impl Default for ImagingConfig {
    fn default() -> Self {
        ImagingConfig {
            backprojection: BackprojectionOptions::default(),
            range: RangeCompression::default(),
            pyramid_levels: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub schema_version: u32,
    pub fmcw: FmcwConfig,
    pub scan: ApertureScan,
    pub grid: GridSpec,
    pub reflection: ReflectionParams,
    pub simulation: SimulationConfig,
    pub imaging: ImagingConfig,
    pub weights: LossWeights,
    pub recon: ReconConfig,
    pub metrics: MetricParams,
    pub mode: ReconMode,
    pub seed: u64,
}

/// Scene extent the defaults are sized for: a cube of this half-width around
/// the origin.
pub const DEFAULT_SCENE_HALF_EXTENT_M: f64 = 0.08;
pub const DEFAULT_STANDOFF_M: f64 = 0.25;

impl Default for PipelineConfig {
    fn default() -> Self {
        let fmcw = FmcwConfig::default();
        PipelineConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            fmcw,
            scan: ApertureScan::orthogonal(Vec3::zeros(), DEFAULT_STANDOFF_M, 32, 32, fmcw.wavelength() / 2.0),
            grid: GridSpec::cube(Vec3::zeros(), DEFAULT_SCENE_HALF_EXTENT_M, 64),
            reflection: ReflectionParams::default(),
            simulation: SimulationConfig::default(),
            imaging: ImagingConfig::default(),
            weights: LossWeights::default(),
            recon: ReconConfig::default(),
            metrics: MetricParams::default(),
            mode: ReconMode::Blind,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every section and their mutual consistency.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema version {} is not supported (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.fmcw.validate()?;
        self.scan.validate()?;
        self.grid.validate()?;
        self.reflection.validate()?;
        self.weights.validate()?;
        self.recon.validate()?;
        if self.metrics.voxels < 4 || self.metrics.samples == 0 {
            return Err(Error::Config("metrics need >= 4 voxels per axis and >= 1 sample".into()));
        }
        let levels = self.imaging.pyramid_levels;
        if levels == 0 {
            return Err(Error::Config("pyramid needs at least one level".into()));
        }
        if self.recon.max_level() >= levels {
            return Err(Error::Config(format!(
                "stages sample pyramid level {} but only {levels} levels are built",
                self.recon.max_level()
            )));
        }
        if self.imaging.backprojection.oversample == 0 {
            return Err(Error::Config("backprojection oversample must be >= 1".into()));
        }
        for view in &self.scan.views {
            let cam = self.grid.camera_for_view(view)?;
            let (w, h) = image_dims(&self.grid, &cam);
            let need = 1usize << (levels - 1);
            if w < need || h < need {
                return Err(Error::Config(format!(
                    "view {} image is {w}x{h}, too small for {levels} pyramid levels",
                    view.id
                )));
            }
        }
        Ok(())
    }
}

fn image_dims(grid: &GridSpec, cam: &crate::features::OrthoCamera) -> (usize, usize) {
    let axis = |r: usize| {
        let a = cam.axis(r);
        (0..3).max_by(|&i, &j| a[i].abs().total_cmp(&a[j].abs())).unwrap()
    };
    (grid.dims[axis(0)], grid.dims[axis(1)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = PipelineConfig::default();
        c.validate().unwrap();
        let back = PipelineConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_documents_take_defaults() {
        let c = PipelineConfig::from_json(r#"{"seed": 5, "weights": {"radar": 0.2}}"#).unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.weights.radar, 0.2);
        assert_eq!(c.weights.warmup_fraction, 0.04);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(PipelineConfig::from_json(r#"{"sede": 5}"#).is_err());
        assert!(PipelineConfig::from_json(r#"{"weights": {"radr": 0.2}}"#).is_err());
        assert!(PipelineConfig::from_json(r#"{"schema_version": 9}"#).is_err());
    }

    #[test]
    fn inconsistent_sections_are_rejected() {
        let mut c = PipelineConfig::default();
        c.imaging.pyramid_levels = 2;
        assert!(c.validate().is_err());
        let mut c = PipelineConfig::default();
        c.grid.dims = [4, 4, 4];
        assert!(c.validate().is_err());
    }
}
