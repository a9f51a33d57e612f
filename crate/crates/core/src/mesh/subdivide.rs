use std::f64::consts::PI;

use super::{TriangleMesh, NO_FACE};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Loop's vertex weight for valence `n`.
pub(crate) fn loop_beta(n: usize) -> f64 {
    let n = n as f64;
    let c = 3.0 / 8.0 + 0.25 * (2.0 * PI / n).cos();
    (5.0 / 8.0 - c * c) / n
}

/// One step of Loop subdivision on a closed manifold mesh.
///
/// Output vertices are the repositioned originals followed by one new vertex
/// per edge, in edge order. Each face `(a, b, c)` becomes four faces sharing
/// the orientation of the parent.
pub fn loop_subdivide(mesh: &TriangleMesh) -> Result<TriangleMesh> {
    let topo = mesh.topology();
    if let Some(e) = topo.edge_faces().iter().position(|ef| ef[1] == NO_FACE) {
        return Err(Error::NonManifold(format!(
            "Loop subdivision needs a closed mesh; edge {:?} is on a boundary",
            topo.edges()[e]
        )));
    }
    let p = mesh.vertices();
    let nv = p.len();

    let mut out = Vec::with_capacity(nv + topo.edges().len());
    for (i, ring) in topo.neighbors().iter().enumerate() {
        let n = ring.len();
        if n == 0 {
            // Unreferenced vertex: carried along unchanged.
            out.push(p[i]);
            continue;
        }
        let beta = loop_beta(n);
        let sum: Vec3 = ring.iter().map(|&j| p[j as usize]).sum();
        out.push(p[i] * (1.0 - n as f64 * beta) + sum * beta);
    }

    let faces = topo.faces();
    for (e, ef) in topo.edges().iter().zip(topo.edge_faces()) {
        let opposite = |f: u32| -> Vec3 {
            let face = faces[f as usize];
            let o = face
                .iter()
                .copied()
                .find(|v| *v != e[0] && *v != e[1])
                .expect("triangle has a vertex off each edge");
            p[o as usize]
        };
        let q = (p[e[0] as usize] + p[e[1] as usize]) * (3.0 / 8.0)
            + (opposite(ef[0]) + opposite(ef[1])) * (1.0 / 8.0);
        out.push(q);
    }

    let mut new_faces = Vec::with_capacity(faces.len() * 4);
    for (f, fe) in faces.iter().zip(topo.face_edges()) {
        let [a, b, c] = *f;
        let ab = nv as u32 + fe[0];
        let bc = nv as u32 + fe[1];
        let ca = nv as u32 + fe[2];
        new_faces.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
    }
    TriangleMesh::new(out, new_faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::make_icosphere;
    use crate::mesh::test_meshes::{cube, flat_grid};

    #[test]
    fn icosahedron_counts() {
        let m0 = make_icosphere(0, 1.0, Vec3::zeros()).unwrap();
        let m1 = loop_subdivide(&m0).unwrap();
        assert_eq!((m1.vertex_count(), m1.face_count()), (42, 80));
        let m2 = loop_subdivide(&m1).unwrap();
        assert_eq!(m2.vertex_count(), 162);
        assert_eq!(m2.euler_characteristic(), 2);
    }

    #[test]
    fn euler_characteristic_preserved_on_cube() {
        let m = cube(1.0);
        let s = loop_subdivide(&m).unwrap();
        assert_eq!(s.vertex_count(), m.vertex_count() + m.edge_count());
        assert_eq!(s.face_count(), 4 * m.face_count());
        assert_eq!(s.euler_characteristic(), 2);
        assert!(s.is_closed());
    }

    #[test]
    fn beta_matches_closed_form_for_valence_six() {
        // cos(pi/3) = 1/2 gives beta = (5/8 - 1/4) / 6 = 1/16.
        assert!((loop_beta(6) - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn no_duplicate_vertices() {
        let m = loop_subdivide(&make_icosphere(1, 1.0, Vec3::zeros()).unwrap()).unwrap();
        let v = m.vertices();
        let mut min = f64::INFINITY;
        for i in 0..v.len() {
            for j in 0..i {
                min = min.min((v[i] - v[j]).norm());
            }
        }
        assert!(min > 1e-3);
    }

    #[test]
    fn rejects_open_mesh() {
        assert!(matches!(loop_subdivide(&flat_grid(2, 1.0)), Err(Error::NonManifold(_))));
    }

    #[test]
    fn preserves_outward_orientation() {
        let m = loop_subdivide(&make_icosphere(1, 1.0, Vec3::zeros()).unwrap()).unwrap();
        for f in 0..m.face_count() {
            assert!(m.face_normals()[f].dot(&m.face_centroid(f)) > 0.0);
        }
    }
}
