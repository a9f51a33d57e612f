use rayon::prelude::*;

use super::LossValue;
use crate::bvh::PointIndex;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::mesh::{SampleOrigin, TriangleMesh};

/// Symmetric mean squared nearest-neighbor distance between `pred` and `gt`;
/// gradient with respect to `pred`. Ties go to the lowest index.
pub fn chamfer_loss(pred: &[Vec3], gt: &[Vec3]) -> Result<LossValue> {
    chamfer_with_index(pred, gt, &PointIndex::new(gt))
}

/// As [`chamfer_loss`] with a prebuilt index over `gt`.
pub fn chamfer_with_index(pred: &[Vec3], gt: &[Vec3], gt_index: &PointIndex) -> Result<LossValue> {
    if pred.is_empty() || gt.is_empty() {
        return Err(Error::OutOfRange("chamfer distance of an empty point set".into()));
    }
    let np = pred.len() as f64;
    let ng = gt.len() as f64;
    let pred_index = PointIndex::new(pred);

    let forward: Vec<(usize, f64)> = pred.par_iter().map(|p| gt_index.nearest(p).expect("non-empty index")).collect();
    let backward: Vec<(usize, f64)> = gt.par_iter().map(|q| pred_index.nearest(q).expect("non-empty index")).collect();

    let mut gradient = vec![Vec3::zeros(); pred.len()];
    let mut a = 0.0;
    for (i, &(j, d2)) in forward.iter().enumerate() {
        a += d2;
        gradient[i] += (pred[i] - gt[j]) * (2.0 / np);
    }
    let mut b = 0.0;
    for (j, &(i, d2)) in backward.iter().enumerate() {
        b += d2;
        gradient[i] += (pred[i] - gt[j]) * (2.0 / ng);
    }
    Ok(LossValue {
        value: a / np + b / ng,
        gradient,
    })
}

/// Chamfer between points sampled on `mesh` at `positions` (fixed origins) and
/// `gt`, with the gradient carried back to the vertices through the sample
/// barycentrics.
pub fn surface_chamfer_loss(
    mesh: &TriangleMesh,
    positions: &[Vec3],
    origins: &[SampleOrigin],
    gt: &[Vec3],
    gt_index: &PointIndex,
) -> Result<LossValue> {
    let faces = mesh.faces();
    let samples: Vec<Vec3> = origins
        .iter()
        .map(|o| {
            let f = faces[o.face as usize];
            (0..3).map(|c| positions[f[c] as usize] * o.bary[c]).sum()
        })
        .collect();
    let inner = chamfer_with_index(&samples, gt, gt_index)?;
    let mut gradient = vec![Vec3::zeros(); positions.len()];
    for (o, g) in origins.iter().zip(&inner.gradient) {
        let f = faces[o.face as usize];
        for c in 0..3 {
            gradient[f[c] as usize] += g * o.bary[c];
        }
    }
    Ok(LossValue {
        value: inner.value,
        gradient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vec3;
    use crate::losses::finite_diff_check;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
        (0..n).map(|_| vec3(rng.gen(), rng.gen(), rng.gen())).collect()
    }

    fn brute(pred: &[Vec3], gt: &[Vec3]) -> (f64, Vec<Vec3>) {
        let nearest = |p: &Vec3, set: &[Vec3]| {
            let mut best = 0;
            for j in 1..set.len() {
                if (p - set[j]).norm_squared() < (p - set[best]).norm_squared() {
                    best = j;
                }
            }
            best
        };
        let mut g = vec![Vec3::zeros(); pred.len()];
        let mut v = 0.0;
        for (i, p) in pred.iter().enumerate() {
            let j = nearest(p, gt);
            v += (p - gt[j]).norm_squared() / pred.len() as f64;
            g[i] += (p - gt[j]) * 2.0 / pred.len() as f64;
        }
        for q in gt {
            let i = nearest(q, pred);
            v += (q - pred[i]).norm_squared() / gt.len() as f64;
            g[i] += (pred[i] - q) * 2.0 / gt.len() as f64;
        }
        (v, g)
    }

    #[test]
    fn identical_sets_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_points(30, &mut rng);
        let l = chamfer_loss(&p, &p).unwrap();
        assert_eq!(l.value, 0.0);
        assert!(l.gradient.iter().all(|g| *g == Vec3::zeros()));
    }

    #[test]
    fn single_pair_closed_form() {
        let d = 0.37;
        let l = chamfer_loss(&[Vec3::zeros()], &[vec3(d, 0.0, 0.0)]).unwrap();
        assert!((l.value - 2.0 * d * d).abs() < 1e-15);
        assert!((l.gradient[0] - vec3(-4.0 * d, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let p = random_points(20, &mut rng);
            let g = random_points(20, &mut rng);
            let l = chamfer_loss(&p, &g).unwrap();
            let (v, grad) = brute(&p, &g);
            assert!((l.value - v).abs() < 1e-15);
            for (a, b) in l.gradient.iter().zip(&grad) {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn symmetric_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_points(15, &mut rng);
        let g = random_points(25, &mut rng);
        let a = chamfer_loss(&p, &g).unwrap().value;
        let b = chamfer_loss(&g, &p).unwrap().value;
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(chamfer_loss(&[], &[Vec3::zeros()]).is_err());
        assert!(chamfer_loss(&[Vec3::zeros()], &[]).is_err());
    }

    #[test]
    fn gradient_passes_finite_differences() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let p = random_points(20, &mut rng);
            let g = random_points(20, &mut rng);
            let r = finite_diff_check(|x| chamfer_loss(x, &g), &p, 1e-6, 30, seed).unwrap();
            assert!(r.max_rel_error < 1e-4, "seed {seed}: {r:?}");
        }
    }
}
