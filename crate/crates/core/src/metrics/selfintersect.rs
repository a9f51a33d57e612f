use crate::bvh::Bvh;
use crate::mesh::{triangle_pair_intersect, TriangleMesh};

/// Faces that intersect some face sharing no vertex with them.
pub fn intersecting_faces(mesh: &TriangleMesh) -> Vec<bool> {
    let boxes = mesh.face_bounds();
    let bvh = Bvh::build(&boxes);
    let mut flagged = vec![false; mesh.face_count()];
    for a in 0..mesh.face_count() {
        let ta = mesh.triangle(a);
        bvh.for_each_overlap(&boxes[a], |b| {
            if b > a && !mesh.faces_share_vertex(a, b) && triangle_pair_intersect(&ta, &mesh.triangle(b)) {
                flagged[a] = true;
                flagged[b] = true;
            }
        });
    }
    flagged
}

/// Percentage of faces involved in at least one self-intersection.
pub fn si_metric(mesh: &TriangleMesh) -> f64 {
    if mesh.face_count() == 0 {
        return 0.0;
    }
    let hit = intersecting_faces(mesh).iter().filter(|&&x| x).count();
    100.0 * hit as f64 / mesh.face_count() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::mesh::make_icosphere;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn convex_sphere_is_clean() {
        assert_eq!(si_metric(&make_icosphere(3, 1.0, Vec3::zeros()).unwrap()), 0.0);
    }

    #[test]
    fn pushed_through_vertex_intersects() {
        let m = make_icosphere(2, 1.0, Vec3::zeros()).unwrap();
        let mut p = m.vertices().to_vec();
        p[0] = -p[0] * 1.2;
        let bent = m.with_positions(p).unwrap();
        assert!(si_metric(&bent) > 0.0);
    }

    #[test]
    fn matches_exhaustive_pairs() {
        let m = make_icosphere(2, 1.0, Vec3::zeros()).unwrap();
        let base = crate::mesh::loop_subdivide(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p: Vec<Vec3> = base
            .vertices()
            .iter()
            .map(|v| v + Vec3::from_fn(|_, _| rng.gen_range(-0.08..0.08)))
            .collect();
        let noisy = base.with_positions(p).unwrap();
        let n = noisy.face_count();
        let mut brute = vec![false; n];
        for a in 0..n {
            for b in a + 1..n {
                if !noisy.faces_share_vertex(a, b) && triangle_pair_intersect(&noisy.triangle(a), &noisy.triangle(b)) {
                    brute[a] = true;
                    brute[b] = true;
                }
            }
        }
        assert!(n >= 500);
        assert!(brute.iter().any(|&x| x));
        assert_eq!(intersecting_faces(&noisy), brute);
    }
}
