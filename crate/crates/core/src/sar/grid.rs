use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::OrthoCamera;
use crate::geometry::{Aabb, Vec3};
use crate::radar::ApertureView;

/// Regular voxel grid. `origin` is the center of voxel `(0, 0, 0)`; voxels are
/// stored x-fastest: `i + nx * (j + ny * k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub origin: [f64; 3],
    pub spacing: f64,
    pub dims: [usize; 3],
}

impl GridSpec {
    /// `n^3` voxels tiling the cube `center +- half_extent`.
    pub fn cube(center: Vec3, half_extent: f64, n: usize) -> Self {
        let spacing = 2.0 * half_extent / n as f64;
        GridSpec {
            origin: (center - Vec3::repeat(half_extent - spacing / 2.0)).into(),
            spacing,
            dims: [n, n, n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(Error::OutOfRange("grid spacing must be > 0".into()));
        }
        if self.dims.contains(&0) {
            return Err(Error::OutOfRange("grid dimensions must be >= 1".into()));
        }
        if self.origin.iter().any(|c| !c.is_finite()) {
            return Err(Error::OutOfRange("grid origin must be finite".into()));
        }
        Ok(())
    }

    pub fn voxel_count(&self) -> usize {
        self.dims.iter().product()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn voxel_center(&self, i: usize, j: usize, k: usize) -> Vec3 {
        Vec3::new(
            self.origin[0] + i as f64 * self.spacing,
            self.origin[1] + j as f64 * self.spacing,
            self.origin[2] + k as f64 * self.spacing,
        )
    }

    /// Continuous voxel coordinates of `p` (voxel centers are integers).
    pub fn to_voxel(&self, p: &Vec3) -> Vec3 {
        (p - Vec3::from(self.origin)) / self.spacing
    }

    /// Outer boundary of the voxel cells.
    pub fn bounds(&self) -> Aabb {
        let half = Vec3::repeat(self.spacing / 2.0);
        let min = Vec3::from(self.origin) - half;
        let ext = Vec3::new(self.dims[0] as f64, self.dims[1] as f64, self.dims[2] as f64) * self.spacing;
        Aabb { min, max: min + ext }
    }

    pub fn center(&self) -> Vec3 {
        self.bounds().center()
    }

    /// Camera whose image rows/columns are the grid lines of `view`'s in-plane
    /// axes, which must be aligned with grid axes.
    pub fn camera_for_view(&self, view: &ApertureView) -> Result<OrthoCamera> {
        let u = Vec3::from(view.u_axis);
        let v = Vec3::from(view.v_axis);
        let w = u.cross(&v);
        let rows = [u, v, w];
        let mut translation = [0.0; 3];
        let mut principal = [0.0; 2];
        for (r, axis) in rows.iter().enumerate() {
            let (a, sign) = aligned_axis(axis).ok_or_else(|| {
                Error::Dimension(format!("view {} axes are not aligned with the volume grid", view.id))
            })?;
            translation[r] = -sign * self.origin[a];
            if r < 2 && sign < 0.0 {
                principal[r] = (self.dims[a] - 1) as f64;
            }
        }
        let cam = OrthoCamera {
            view_id: view.id,
            rotation: rows.map(|x| x.into()),
            translation,
            scale: 1.0 / self.spacing,
            principal_point: principal,
        };
        cam.validate()?;
        Ok(cam)
    }
}

/// Grid axis index and sign if `v` is a signed unit coordinate axis.
pub(crate) fn aligned_axis(v: &Vec3) -> Option<(usize, f64)> {
    let a = v.iamax();
    let s = v[a].signum();
    let ok = (v[a].abs() - 1.0).abs() < 1e-9 && (0..3).all(|b| b == a || v[b].abs() < 1e-9);
    ok.then_some((a, s))
}

/// Non-negative magnitude volume formed from one view.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectivityVolume {
    pub grid: GridSpec,
    pub view_id: usize,
    pub data: Vec<f64>,
}

impl ReflectivityVolume {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.grid.index(i, j, k)]
    }

    /// Voxel index triple of the global maximum (first in storage order).
    pub fn argmax(&self) -> [usize; 3] {
        let mut best = 0;
        for (i, &v) in self.data.iter().enumerate() {
            if v > self.data[best] {
                best = i;
            }
        }
        let [nx, ny, _] = self.grid.dims;
        [best % nx, (best / nx) % ny, best / (nx * ny)]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}
