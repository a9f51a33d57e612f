use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// One planar monostatic array. Element `(r, c)` sits at
/// `center + (c - (cols-1)/2) * spacing * u + (r - (rows-1)/2) * spacing * v`
/// and is stored at index `r * cols + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApertureView {
    pub id: usize,
    pub rows: usize,
    pub cols: usize,
    pub spacing_m: f64,
    pub center: [f64; 3],
    /// Unit vector from the aperture toward the scene.
    pub boresight: [f64; 3],
    pub u_axis: [f64; 3],
    pub v_axis: [f64; 3],
}

impl ApertureView {
    pub fn element_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn element(&self, index: usize) -> Vec3 {
        let r = index / self.cols;
        let c = index % self.cols;
        let du = (c as f64 - (self.cols as f64 - 1.0) / 2.0) * self.spacing_m;
        let dv = (r as f64 - (self.rows as f64 - 1.0) / 2.0) * self.spacing_m;
        Vec3::from(self.center) + Vec3::from(self.u_axis) * du + Vec3::from(self.v_axis) * dv
    }

    pub fn elements(&self) -> Vec<Vec3> {
        (0..self.element_count()).map(|i| self.element(i)).collect()
    }

    /// Physical aperture extent along `u` and `v`.
    pub fn extent(&self) -> (f64, f64) {
        (
            self.cols as f64 * self.spacing_m,
            self.rows as f64 * self.spacing_m,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::OutOfRange(format!("view {} has an empty element grid", self.id)));
        }
        if !(self.spacing_m > 0.0) {
            return Err(Error::OutOfRange(format!(
                "view {} element spacing must be > 0",
                self.id
            )));
        }
        for (name, a) in [("boresight", self.boresight), ("u axis", self.u_axis), ("v axis", self.v_axis)] {
            if (Vec3::from(a).norm() - 1.0).abs() > 1e-9 {
                return Err(Error::OutOfRange(format!("view {} {name} is not unit length", self.id)));
            }
        }
        Ok(())
    }
}

/// The set of views that make up one acquisition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApertureScan {
    pub views: Vec<ApertureView>,
}

impl ApertureScan {
    /// Three arrays looking at `scene_center` from `+x`, `+y` and `+z` (front,
    /// side, top), each `rows x cols` at `spacing_m`, `standoff_m` away.
    pub fn orthogonal(scene_center: Vec3, standoff_m: f64, rows: usize, cols: usize, spacing_m: f64) -> Self {
        let x = Vec3::x();
        let y = Vec3::y();
        let z = Vec3::z();
        let make = |id: usize, toward: Vec3, u: Vec3, v: Vec3| ApertureView {
            id,
            rows,
            cols,
            spacing_m,
            center: (scene_center + toward * standoff_m).into(),
            boresight: (-toward).into(),
            u_axis: u.into(),
            v_axis: v.into(),
        };
        ApertureScan {
            views: vec![make(0, x, y, z), make(1, y, x, z), make(2, z, x, y)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.views.is_empty() {
            return Err(Error::OutOfRange("scan needs at least one view".into()));
        }
        for (i, v) in self.views.iter().enumerate() {
            if v.id != i {
                return Err(Error::Config(format!("view at position {i} has id {}", v.id)));
            }
            v.validate()?;
        }
        Ok(())
    }

    pub fn view_count(&self) -> usize {
        self.views.len()
    }

    pub fn total_elements(&self) -> usize {
        self.views.iter().map(|v| v.element_count()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_views_are_mutually_perpendicular() {
        let s = ApertureScan::orthogonal(Vec3::zeros(), 0.4, 4, 5, 0.002);
        s.validate().unwrap();
        assert_eq!(s.view_count(), 3);
        for a in &s.views {
            for b in &s.views {
                if a.id != b.id {
                    assert_eq!(Vec3::from(a.boresight).dot(&Vec3::from(b.boresight)), 0.0);
                }
            }
            // Boresight points from the array center to the scene center.
            let c = Vec3::from(a.center);
            assert!((c.normalize() + Vec3::from(a.boresight)).norm() < 1e-12);
        }
    }

    #[test]
    fn element_grid_is_centered() {
        let s = ApertureScan::orthogonal(Vec3::zeros(), 0.4, 4, 5, 0.002);
        let v = &s.views[0];
        let mean: Vec3 = v.elements().iter().sum::<Vec3>() / v.element_count() as f64;
        assert!((mean - Vec3::from(v.center)).norm() < 1e-15);
        let e = v.elements();
        assert!(((e[1] - e[0]).norm() - 0.002).abs() < 1e-15);
        assert!(((e[5] - e[0]).norm() - 0.002).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_geometry() {
        let mut s = ApertureScan::orthogonal(Vec3::zeros(), 0.4, 4, 5, 0.002);
        s.views[1].spacing_m = 0.0;
        assert!(s.validate().is_err());
        let mut s = ApertureScan::orthogonal(Vec3::zeros(), 0.4, 4, 5, 0.002);
        s.views[0].boresight = [1.0, 1.0, 0.0];
        assert!(s.validate().is_err());
        assert!(ApertureScan { views: vec![] }.validate().is_err());
    }
}
