use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::mesh::{make_icosphere, TriangleMesh};
use crate::sar::{GridSpec, ImagePyramid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TemplateConfig {
    pub level: u32,
    /// Template radius as a multiple of the RMS spread of the image mass.
    pub radius_factor: f64,
}

impl Default for TemplateConfig {
    fn default() -> Self {
        TemplateConfig {
            level: 2,
            radius_factor: 0.75,
        }
    }
}

/// Intensity-weighted centroid and RMS spread of the back-projected image
/// mass. The mass at a lattice point is the product of the level-0 view
/// intensities it projects onto.
pub fn image_mass_moments(views: &[ImagePyramid], lattice: &GridSpec) -> Result<(Vec3, f64)> {
    if views.is_empty() {
        return Err(Error::Dimension("template needs at least one view".into()));
    }
    lattice.validate()?;
    let [nx, ny, nz] = lattice.dims;
    let slabs: Vec<(f64, Vec3, f64)> = (0..nz)
        .into_par_iter()
        .map(|k| {
            let (mut m, mut first, mut second) = (0.0, Vec3::zeros(), 0.0);
            for j in 0..ny {
                for i in 0..nx {
                    let p = lattice.voxel_center(i, j, k);
                    let w: f64 = views
                        .iter()
                        .map(|v| {
                            let u = v.camera.project(&p);
                            v.levels[0].sample(u[0], u[1]).0
                        })
                        .product();
                    m += w;
                    first += p * w;
                    second += w * p.norm_squared();
                }
            }
            (m, first, second)
        })
        .collect();
    let (mut m, mut first, mut second) = (0.0, Vec3::zeros(), 0.0);
    for (a, b, c) in slabs {
        m += a;
        first += b;
        second += c;
    }
    if !(m > 0.0) {
        return Err(Error::Degenerate("view images carry no intensity mass".into()));
    }
    let center = first / m;
    let spread = (second / m - center.norm_squared()).max(0.0).sqrt();
    Ok((center, spread))
}

/// Center and radius of the template sphere.
pub fn template_sphere(views: &[ImagePyramid], lattice: &GridSpec, cfg: &TemplateConfig) -> Result<(Vec3, f64)> {
    if !(cfg.radius_factor > 0.0) {
        return Err(Error::Config("template radius factor must be > 0".into()));
    }
    let (center, spread) = image_mass_moments(views, lattice)?;
    if !(spread > 0.0) {
        return Err(Error::Degenerate("image mass has zero spatial spread".into()));
    }
    Ok((center, cfg.radius_factor * spread))
}

/// Icosphere placed at the image-mass centroid with radius proportional to its
/// spread.
pub fn init_template(views: &[ImagePyramid], lattice: &GridSpec, cfg: &TemplateConfig) -> Result<TriangleMesh> {
    let (center, radius) = template_sphere(views, lattice, cfg)?;
    make_icosphere(cfg.level, radius, center)
}
