use serde::{Deserialize, Serialize};

use crate::bvh::Bvh;
use crate::geometry::{ray_triangle, sigmoid, Vec3};
use crate::mesh::TriangleMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum VisibilityMode {
    /// Back-face cull plus an occlusion ray test.
    #[default]
    Hard,
    /// Logistic weight of the facet cosine, no occlusion; differentiable.
    Soft,
}

impl std::str::FromStr for VisibilityMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hard" => Ok(VisibilityMode::Hard),
            "soft" => Ok(VisibilityMode::Soft),
            other => Err(format!("unknown visibility mode {other:?} (expected hard|soft)")),
        }
    }
}

/// Ray-cast occlusion queries against one mesh.
pub struct Occluder<'a> {
    mesh: &'a TriangleMesh,
    bvh: Bvh,
}

impl<'a> Occluder<'a> {
    pub fn new(mesh: &'a TriangleMesh) -> Self {
        Occluder {
            mesh,
            bvh: Bvh::build(&mesh.face_bounds()),
        }
    }

    /// True if the open segment from face `face`'s centroid to `sensor` crosses
    /// any face that shares no vertex with `face`.
    pub fn is_occluded(&self, face: usize, sensor: &Vec3) -> bool {
        let origin = self.mesh.face_centroid(face);
        let dir = sensor - origin;
        self.bvh.any_hit(&origin, &dir, 0.0, 1.0, |j| {
            if j == face || self.mesh.faces_share_vertex(face, j) {
                return false;
            }
            let [a, b, c] = self.mesh.triangle(j);
            ray_triangle(&origin, &dir, &a, &b, &c, 0.0, 1.0).is_some()
        })
    }

    /// Hard visibility of `face`: front-facing and unoccluded.
    pub fn visible(&self, face: usize, sensor: &Vec3) -> bool {
        let n = self.mesh.face_normals()[face];
        let c = self.mesh.face_centroid(face);
        n.dot(&(sensor - c)) > 0.0 && !self.is_occluded(face, sensor)
    }
}

/// Per-face 0/1 visibility from `sensor`.
pub fn hard_visibility(mesh: &TriangleMesh, sensor: &Vec3) -> Vec<u8> {
    let occ = Occluder::new(mesh);
    (0..mesh.face_count())
        .map(|f| occ.visible(f, sensor) as u8)
        .collect()
}

/// Per-face `sigmoid(kappa * cos theta)`; occlusion is not modeled.
pub fn soft_visibility(mesh: &TriangleMesh, sensor: &Vec3, kappa: f64) -> Vec<f64> {
    (0..mesh.face_count())
        .map(|f| {
            let d = sensor - mesh.face_centroid(f);
            let cos = mesh.face_normals()[f].dot(&d) / d.norm();
            soft_weight(cos, kappa)
        })
        .collect()
}

#[inline]
pub fn soft_weight(cos_theta: f64, kappa: f64) -> f64 {
    sigmoid(kappa * cos_theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vec3;
    use crate::mesh::{make_icosphere, TriangleMesh};

    #[test]
    fn convex_body_visibility_is_back_face_cull() {
        let m = make_icosphere(3, 1.0, Vec3::zeros()).unwrap();
        let sensor = vec3(10.0, 0.0, 0.0);
        let vis = hard_visibility(&m, &sensor);
        let mut count = 0;
        for f in 0..m.face_count() {
            let front = m.face_normals()[f].dot(&(sensor - m.face_centroid(f))) > 0.0;
            assert_eq!(vis[f] == 1, front, "face {f}");
            count += vis[f] as usize;
        }
        let frac = count as f64 / m.face_count() as f64;
        // Front-facing cap from a finite distance is a bit under half the sphere.
        assert!((frac - 0.5).abs() < 0.08, "{frac}");
    }

    #[test]
    fn sensor_inside_sees_nothing() {
        let m = make_icosphere(2, 1.0, Vec3::zeros()).unwrap();
        assert!(hard_visibility(&m, &vec3(0.1, 0.0, 0.05)).iter().all(|&v| v == 0));
    }

    #[test]
    fn inner_sphere_is_fully_occluded() {
        let outer = make_icosphere(2, 1.0, Vec3::zeros()).unwrap();
        let inner = make_icosphere(1, 0.5, Vec3::zeros()).unwrap();
        let mut v = outer.vertices().to_vec();
        let off = v.len() as u32;
        v.extend_from_slice(inner.vertices());
        let mut f = outer.faces().to_vec();
        f.extend(inner.faces().iter().map(|t| t.map(|i| i + off)));
        let both = TriangleMesh::new(v, f).unwrap();
        let sensor = vec3(0.0, 6.0, 1.0);
        let vis = hard_visibility(&both, &sensor);
        let n_outer = outer.face_count();
        assert!(vis[n_outer..].iter().all(|&x| x == 0));
        // Oracle: brute-force ray cast for inner faces that are front-facing.
        for fi in n_outer..both.face_count() {
            let c = both.face_centroid(fi);
            let d = sensor - c;
            let hit = (0..n_outer).any(|j| {
                let [a, b, cc] = both.triangle(j);
                ray_triangle(&c, &d, &a, &b, &cc, 0.0, 1.0).is_some()
            });
            let front = both.face_normals()[fi].dot(&d) > 0.0;
            assert!(!front || hit);
        }
        assert!(vis[..n_outer].contains(&1));
    }

    #[test]
    fn soft_weights() {
        assert_eq!(soft_weight(0.0, 10.0), 0.5);
        assert!((soft_weight(1.0, 10.0) - 0.999_954_602_131_297_6).abs() < 1e-15);
        assert!(soft_weight(-0.1, 1e6) < 1e-9);
        let m = make_icosphere(1, 1.0, Vec3::zeros()).unwrap();
        let w = soft_visibility(&m, &vec3(5.0, 0.0, 0.0), 10.0);
        assert!(w.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn soft_converges_to_back_face_cull() {
        let m = make_icosphere(2, 1.0, Vec3::zeros()).unwrap();
        let s = vec3(3.0, 1.0, -2.0);
        let hard: Vec<f64> = (0..m.face_count())
            .map(|f| (m.face_normals()[f].dot(&(s - m.face_centroid(f))) > 0.0) as u8 as f64)
            .collect();
        let soft = soft_visibility(&m, &s, 1e7);
        for (h, w) in hard.iter().zip(&soft) {
            assert!((h - w).abs() < 1e-6);
        }
    }
}
