use std::collections::HashMap;

use super::TriangleMesh;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

pub const MAX_ICOSPHERE_LEVEL: u32 = 7;

fn icosahedron() -> (Vec<Vec3>, Vec<[u32; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let v = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let v = v
        .iter()
        .map(|p| Vec3::new(p[0], p[1], p[2]).normalize())
        .collect();
    (v, f)
}

/// Geodesic sphere: the regular icosahedron with each face split into four
/// `level` times, new vertices pushed back onto the sphere.
pub fn make_icosphere(level: u32, radius: f64, center: Vec3) -> Result<TriangleMesh> {
    if level > MAX_ICOSPHERE_LEVEL {
        return Err(Error::OutOfRange(format!(
            "icosphere level {level} exceeds {MAX_ICOSPHERE_LEVEL}"
        )));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::OutOfRange(format!("icosphere radius {radius} must be > 0")));
    }
    let (mut verts, mut faces) = icosahedron();
    for _ in 0..level {
        let mut mid: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: u32, b: u32, verts: &mut Vec<Vec3>| -> u32 {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                let p = ((verts[a as usize] + verts[b as usize]) * 0.5).normalize();
                verts.push(p);
                (verts.len() - 1) as u32
            })
        };
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        faces = next;
    }
    let verts = verts.into_iter().map(|p| center + p * radius).collect();
    TriangleMesh::new(verts, faces)
}

/// Icosphere stretched to semi-axes `axes` along x, y and z.
pub fn make_ellipsoid(level: u32, axes: [f64; 3], center: Vec3) -> Result<TriangleMesh> {
    if axes.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::OutOfRange(format!("ellipsoid axes {axes:?} must be > 0")));
    }
    let unit = make_icosphere(level, 1.0, Vec3::zeros())?;
    unit.map_vertices(|p| center + Vec3::new(p.x * axes[0], p.y * axes[1], p.z * axes[2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vec3;

    #[test]
    fn level_zero_is_icosahedron() {
        let m = make_icosphere(0, 1.0, Vec3::zeros()).unwrap();
        assert_eq!((m.vertex_count(), m.face_count(), m.edge_count()), (12, 20, 30));
        assert!(m.is_closed());
        // All edges equal for the regular solid.
        let e0 = m.mean_edge_length();
        for e in m.topology().edges() {
            let l = (m.vertices()[e[0] as usize] - m.vertices()[e[1] as usize]).norm();
            assert!((l - e0).abs() < 1e-12);
        }
    }

    #[test]
    fn counts_follow_subdivision_formula() {
        let mut v = 12usize;
        let mut e = 30usize;
        let mut f = 20usize;
        for level in 0..=4 {
            let m = make_icosphere(level, 1.0, Vec3::zeros()).unwrap();
            assert_eq!((m.vertex_count(), m.edge_count(), m.face_count()), (v, e, f));
            assert_eq!(m.euler_characteristic(), 2);
            v += e;
            e = 2 * e + 3 * f;
            f *= 4;
        }
        assert_eq!(make_icosphere(1, 1.0, Vec3::zeros()).unwrap().vertex_count(), 42);
    }

    #[test]
    fn vertices_lie_on_sphere_and_faces_point_out() {
        let c = vec3(0.3, -1.0, 2.0);
        let m = make_icosphere(2, 2.0, c).unwrap();
        for p in m.vertices() {
            assert!(((p - c).norm() - 2.0).abs() < 1e-9);
        }
        for f in 0..m.face_count() {
            assert!(m.face_normals()[f].dot(&(m.face_centroid(f) - c)) > 0.0);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(make_icosphere(8, 1.0, Vec3::zeros()).is_err());
        assert!(make_icosphere(1, 0.0, Vec3::zeros()).is_err());
        assert!(make_icosphere(1, -1.0, Vec3::zeros()).is_err());
    }
}
