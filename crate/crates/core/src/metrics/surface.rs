use std::collections::HashMap;

use rayon::prelude::*;

use crate::bvh::{Bvh, PointIndex};
use crate::error::{Error, Result};
use crate::geometry::{closest_point_on_triangle, Vec3};
use crate::mesh::{sample_surface_with_origins, uniform_laplacian, TriangleMesh};

/// Closest-point queries against a triangle mesh.
pub struct SurfaceIndex<'a> {
    mesh: &'a TriangleMesh,
    bvh: Bvh,
}

impl<'a> SurfaceIndex<'a> {
    pub fn new(mesh: &'a TriangleMesh) -> Self {
        SurfaceIndex {
            mesh,
            bvh: Bvh::build(&mesh.face_bounds()),
        }
    }

    /// Nearest face, the closest point on it, and the distance.
    pub fn closest(&self, p: &Vec3) -> Option<(usize, Vec3, f64)> {
        let (face, d2) = self.bvh.nearest(p, |f| {
            let [a, b, c] = self.mesh.triangle(f);
            (closest_point_on_triangle(p, &a, &b, &c) - p).norm_squared()
        })?;
        let [a, b, c] = self.mesh.triangle(face);
        Some((face, closest_point_on_triangle(p, &a, &b, &c), d2.sqrt()))
    }
}

/// Faces of a mesh keyed by their exact vertex positions, so a sample drawn
/// on a triangle that also exists in the other mesh is known to lie on it.
struct FaceLookup(HashMap<[[u64; 3]; 3], usize>);

impl FaceLookup {
    fn key(tri: [Vec3; 3]) -> [[u64; 3]; 3] {
        let mut k = tri.map(|v| [v.x.to_bits(), v.y.to_bits(), v.z.to_bits()]);
        k.sort_unstable();
        k
    }

    fn new(mesh: &TriangleMesh) -> Self {
        FaceLookup((0..mesh.face_count()).map(|f| (Self::key(mesh.triangle(f)), f)).collect())
    }

    fn find(&self, tri: [Vec3; 3]) -> Option<usize> {
        self.0.get(&Self::key(tri)).copied()
    }
}

/// Face of `to` nearest to a sample of `from` drawn on face `origin`, with
/// the distance. A sample on a triangle both meshes share is at distance 0.
fn nearest_face(
    from: &TriangleMesh,
    origin: usize,
    p: &Vec3,
    index: &SurfaceIndex,
    shared: &FaceLookup,
) -> (usize, f64) {
    match shared.find(from.triangle(origin)) {
        Some(f) => (f, 0.0),
        None => {
            let (f, _, d) = index.closest(p).expect("non-empty mesh");
            (f, d)
        }
    }
}

fn check_meshes(pred: &TriangleMesh, gt: &TriangleMesh) -> Result<()> {
    if pred.face_count() == 0 || gt.face_count() == 0 {
        return Err(Error::InvalidMesh("surface metrics need non-empty meshes".into()));
    }
    Ok(())
}

/// Distances from `n` samples of `from` to the surface of `to`.
fn directed_distances(from: &TriangleMesh, to: &TriangleMesh, n: usize, seed: u64) -> Result<Vec<f64>> {
    let (samples, origins) = sample_surface_with_origins(from, n, seed)?;
    let index = SurfaceIndex::new(to);
    let shared = FaceLookup::new(to);
    Ok(samples
        .points
        .par_iter()
        .zip(&origins)
        .map(|(p, o)| nearest_face(from, o.face as usize, p, &index, &shared).1)
        .collect())
}

/// Both directed distance lists; the two directions draw from different
/// seeds derived from `seed`.
pub fn surface_distances(pred: &TriangleMesh, gt: &TriangleMesh, n: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_meshes(pred, gt)?;
    let a = directed_distances(pred, gt, n, seed)?;
    let b = directed_distances(gt, pred, n, seed.wrapping_add(1))?;
    Ok((a, b))
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn max(x: &[f64]) -> f64 {
    x.iter().copied().fold(0.0, f64::max)
}

/// Average symmetric surface distance from sampled point-to-surface distances.
pub fn assd(pred: &TriangleMesh, gt: &TriangleMesh, n: usize, seed: u64) -> Result<f64> {
    let (a, b) = surface_distances(pred, gt, n, seed)?;
    Ok(0.5 * (mean(&a) + mean(&b)))
}

/// Sampled Hausdorff distance.
pub fn hausdorff(pred: &TriangleMesh, gt: &TriangleMesh, n: usize, seed: u64) -> Result<f64> {
    let (a, b) = surface_distances(pred, gt, n, seed)?;
    Ok(max(&a).max(max(&b)))
}

/// `(assd, hd)` from one shared set of samples.
pub fn assd_hausdorff(pred: &TriangleMesh, gt: &TriangleMesh, n: usize, seed: u64) -> Result<(f64, f64)> {
    let (a, b) = surface_distances(pred, gt, n, seed)?;
    Ok((0.5 * (mean(&a) + mean(&b)), max(&a).max(max(&b))))
}

/// Mean angle in degrees between the normal at each `pred` sample and the
/// normal of the `gt` face closest to it.
pub fn ane(pred: &TriangleMesh, gt: &TriangleMesh, n: usize, seed: u64) -> Result<f64> {
    check_meshes(pred, gt)?;
    let (samples, origins) = sample_surface_with_origins(pred, n, seed)?;
    let normals = samples.normals.as_ref().expect("sampling records normals");
    let index = SurfaceIndex::new(gt);
    let shared = FaceLookup::new(gt);
    let gt_normals = gt.face_normals();
    let angles: Vec<f64> = samples
        .points
        .par_iter()
        .zip(normals)
        .zip(&origins)
        .map(|((p, np), o)| {
            let (f, _) = nearest_face(pred, o.face as usize, p, &index, &shared);
            let ng = gt_normals[f];
            np.cross(&ng).norm().atan2(np.dot(&ng)).to_degrees()
        })
        .collect();
    Ok(mean(&angles))
}

/// Mean over `pred` vertices of the difference between the uniform-Laplacian
/// magnitude there and at the nearest `gt` vertex, divided by the mean `gt`
/// edge length.
pub fn anld(pred: &TriangleMesh, gt: &TriangleMesh) -> Result<f64> {
    check_meshes(pred, gt)?;
    let lp = uniform_laplacian(pred, pred.vertices())?;
    let lg = uniform_laplacian(gt, gt.vertices())?;
    let scale = gt.mean_edge_length();
    if !(scale > 0.0) {
        return Err(Error::Degenerate("ground-truth mesh has zero edge length".into()));
    }
    let index = PointIndex::new(gt.vertices());
    let diffs: Vec<f64> = pred
        .vertices()
        .par_iter()
        .zip(&lp)
        .map(|(p, d)| {
            let (j, _) = index.nearest(p).expect("non-empty mesh");
            (d.norm() - lg[j].norm()).abs()
        })
        .collect();
    Ok(mean(&diffs) / scale)
}
