use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Orthographic world-to-pixel map `u = scale * drop_depth(R p + t) + c`.
///
/// Rows 0 and 1 of `rotation` are the image `u` and `v` axes; row 2 is the
/// discarded depth axis. Pixel centers sit at integer coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrthoCamera {
    pub view_id: usize,
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    /// Pixels per meter.
    pub scale: f64,
    pub principal_point: [f64; 2],
}

impl OrthoCamera {
    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::OutOfRange(format!("camera {} scale must be > 0", self.view_id)));
        }
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = (0..3).map(|k| self.rotation[i][k] * self.rotation[j][k]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                if (d - expect).abs() > 1e-9 {
                    return Err(Error::OutOfRange(format!(
                        "camera {} rotation is not orthonormal",
                        self.view_id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn axis(&self, row: usize) -> Vec3 {
        Vec3::from(self.rotation[row])
    }

    /// Unit vector along which the camera collapses depth.
    pub fn depth_axis(&self) -> Vec3 {
        self.axis(2)
    }

    pub fn project(&self, p: &Vec3) -> [f64; 2] {
        let t = Vec3::from(self.translation);
        [
            self.scale * (self.axis(0).dot(p) + t.x) + self.principal_point[0],
            self.scale * (self.axis(1).dot(p) + t.y) + self.principal_point[1],
        ]
    }

    /// Rows of the 2x3 Jacobian `du/dp`; constant for an orthographic camera.
    pub fn jacobian(&self) -> [Vec3; 2] {
        [self.axis(0) * self.scale, self.axis(1) * self.scale]
    }

    /// Camera for pyramid level `level`, where each level halves resolution and
    /// pixel `k` of level `l+1` covers pixels `2k, 2k+1` of level `l`.
    pub fn at_level(&self, level: usize) -> OrthoCamera {
        let f = 0.5f64.powi(level as i32);
        OrthoCamera {
            scale: self.scale * f,
            principal_point: self.principal_point.map(|c| (c + 0.5) * f - 0.5),
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vec3;

    fn identity(scale: f64, pp: [f64; 2]) -> OrthoCamera {
        OrthoCamera {
            view_id: 0,
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: [0.0; 3],
            scale,
            principal_point: pp,
        }
    }

    #[test]
    fn identity_drops_depth() {
        let c = identity(1.0, [0.0, 0.0]);
        assert_eq!(c.project(&vec3(1.0, 2.0, 5.0)), [1.0, 2.0]);
        assert_eq!(c.project(&vec3(1.0, 2.0, -40.0)), [1.0, 2.0]);
        c.validate().unwrap();
    }

    #[test]
    fn scale_and_principal_point() {
        let c = identity(10.0, [32.0, 16.0]);
        let u = c.project(&vec3(0.3, -0.2, 7.0));
        assert!((u[0] - 35.0).abs() < 1e-12 && (u[1] - 14.0).abs() < 1e-12);
    }

    #[test]
    fn level_camera_matches_pooling_geometry() {
        let c = identity(4.0, [1.0, 2.0]);
        let p = vec3(0.7, 1.3, 0.0);
        let u0 = c.project(&p);
        for l in 0..4 {
            let ul = c.at_level(l).project(&p);
            let f = 0.5f64.powi(l as i32);
            for a in 0..2 {
                assert!((ul[a] - ((u0[a] + 0.5) * f - 0.5)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_orthonormal() {
        let mut c = identity(1.0, [0.0; 2]);
        c.rotation[0] = [1.0, 0.1, 0.0];
        assert!(c.validate().is_err());
        let mut c = identity(1.0, [0.0; 2]);
        c.scale = 0.0;
        assert!(c.validate().is_err());
    }
}
