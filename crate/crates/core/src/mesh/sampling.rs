use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PointSet, TriangleMesh};
use crate::error::{Error, Result};
use crate::geometry::DEGENERATE_AREA;

/// Where a surface sample came from: its face and barycentric weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOrigin {
    pub face: u32,
    pub bary: [f64; 3],
}

/// `n` area-uniform surface samples with face normals. Deterministic in `seed`.
pub fn sample_surface(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<PointSet> {
    sample_surface_with_origins(mesh, n, seed).map(|(p, _)| p)
}

/// Like [`sample_surface`], also returning each sample's face and barycentrics.
pub fn sample_surface_with_origins(
    mesh: &TriangleMesh,
    n: usize,
    seed: u64,
) -> Result<(PointSet, Vec<SampleOrigin>)> {
    if n == 0 {
        return Err(Error::OutOfRange("sample count must be >= 1".into()));
    }
    let mut cdf = Vec::with_capacity(mesh.face_count());
    let mut total = 0.0;
    for &a in mesh.face_areas() {
        if a > DEGENERATE_AREA {
            total += a;
        }
        cdf.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::Degenerate("mesh has zero surface area".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let mut origins = Vec::with_capacity(n);
    for _ in 0..n {
        let target = rng.gen::<f64>() * total;
        // First face whose cumulative area exceeds the target; zero-area faces never win.
        let face = cdf.partition_point(|&c| c <= target).min(cdf.len() - 1);
        let r1: f64 = rng.gen();
        let r2: f64 = rng.gen();
        let s = r1.sqrt();
        let bary = [1.0 - s, s * (1.0 - r2), s * r2];
        let [a, b, c] = mesh.triangle(face);
        points.push(a * bary[0] + b * bary[1] + c * bary[2]);
        normals.push(mesh.face_normals()[face]);
        origins.push(SampleOrigin {
            face: face as u32,
            bary,
        });
    }
    Ok((
        PointSet {
            points,
            normals: Some(normals),
        },
        origins,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{vec3, Vec3};
    use crate::mesh::make_icosphere;

    fn unit_square() -> TriangleMesh {
        let v = vec![
            vec3(0., 0., 0.),
            vec3(1., 0., 0.),
            vec3(1., 1., 0.),
            vec3(0., 1., 0.),
        ];
        TriangleMesh::new(v, vec![[0, 1, 2], [0, 2, 3]]).unwrap()
    }

    #[test]
    fn halves_of_square_get_equal_mass() {
        let m = unit_square();
        let n = 100_000;
        let s = sample_surface(&m, n, 5).unwrap();
        let left = s.points.iter().filter(|p| p.x < 0.5).count() as f64;
        let right = n as f64 - left;
        assert!(((left - right) / (n as f64 / 2.0)).abs() < 0.02);
        // Each triangle also gets about half the samples.
        let lower = s.points.iter().filter(|p| p.x > p.y).count() as f64;
        assert!((lower / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn single_sample_is_on_the_surface() {
        let m = make_icosphere(1, 1.0, Vec3::zeros()).unwrap();
        let (s, o) = sample_surface_with_origins(&m, 1, 9).unwrap();
        let f = o[0].face as usize;
        let [a, _, _] = m.triangle(f);
        let n = m.face_normals()[f];
        assert!((s.points[0] - a).dot(&n).abs() < 1e-12);
        assert!(o[0].bary.iter().all(|&b| (0.0..=1.0).contains(&b)));
    }

    #[test]
    fn same_seed_same_bits() {
        let m = make_icosphere(2, 1.0, Vec3::zeros()).unwrap();
        assert_eq!(sample_surface(&m, 500, 42).unwrap(), sample_surface(&m, 500, 42).unwrap());
        assert_ne!(sample_surface(&m, 500, 42).unwrap(), sample_surface(&m, 500, 43).unwrap());
    }

    #[test]
    fn degenerate_mesh_is_rejected() {
        let v = vec![vec3(0., 0., 0.), vec3(1., 0., 0.), vec3(2., 0., 0.)];
        let m = TriangleMesh::new(v, vec![[0, 1, 2]]).unwrap();
        assert!(matches!(sample_surface(&m, 3, 0), Err(Error::Degenerate(_))));
        assert!(sample_surface(&unit_square(), 0, 0).is_err());
    }
}
