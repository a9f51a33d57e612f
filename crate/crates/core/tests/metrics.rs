use std::f64::consts::PI;

use echomesh::geometry::{closest_point_on_triangle, vec3};
use echomesh::metrics::{
    ane, anld, assd_hausdorff, dice_jaccard, evaluate_all, lens_volume, si_metric, voxelize, MetricParams,
};
use echomesh::mesh::{make_icosphere, sample_surface, TriangleMesh};
use echomesh::sar::GridSpec;
use echomesh::Vec3;
use nalgebra::Rotation3;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cube(h: f64) -> TriangleMesh {
    let v = (0..8)
        .map(|i| {
            vec3(
                if i & 1 != 0 { h } else { -h },
                if i & 2 != 0 { h } else { -h },
                if i & 4 != 0 { h } else { -h },
            )
        })
        .collect();
    let f = vec![
        [0, 2, 1], [1, 2, 3],
        [4, 5, 6], [5, 7, 6],
        [0, 1, 4], [1, 5, 4],
        [2, 6, 3], [3, 6, 7],
        [0, 4, 2], [2, 4, 6],
        [1, 3, 5], [3, 7, 5],
    ];
    TriangleMesh::new(v, f).unwrap()
}

fn rotate(m: &TriangleMesh, r: &Rotation3<f64>, t: Vec3) -> TriangleMesh {
    m.map_vertices(|p| r * p + t).unwrap()
}

#[test]
fn offset_spheres_match_the_lens_volume() {
    let a = make_icosphere(5, 0.5, Vec3::zeros()).unwrap();
    let b = make_icosphere(5, 0.5, vec3(0.3, 0.0, 0.0)).unwrap();
    let g = GridSpec::cube(vec3(0.15, 0.0, 0.0), 0.7, 128);
    let (dice, jac) = dice_jaccard(&voxelize(&a, &g).unwrap(), &voxelize(&b, &g).unwrap()).unwrap();
    let ball = 4.0 / 3.0 * PI * 0.125;
    let lens = lens_volume(0.5, 0.3);
    let dice_exact = lens / ball;
    let jac_exact = lens / (2.0 * ball - lens);
    assert!((dice / dice_exact - 1.0).abs() < 0.02, "{dice} vs {dice_exact}");
    assert!((jac / jac_exact - 1.0).abs() < 0.02, "{jac} vs {jac_exact}");
}

#[test]
fn identical_meshes_give_identities() {
    let m = make_icosphere(3, 0.04, vec3(0.01, 0.0, -0.02)).unwrap();
    let r = evaluate_all(&m, &m, &MetricParams::default()).unwrap();
    assert_eq!((r.dice, r.jaccard), (1.0, 1.0));
    assert_eq!((r.assd, r.hd, r.ane_deg), (0.0, 0.0, 0.0));
    assert_eq!(r.anld, 0.0);
    assert_eq!(r.si_percent, si_metric(&m));
    assert_eq!(r.schema_version, 1);
}

#[test]
fn concentric_sphere_report() {
    let a = make_icosphere(5, 1.0, Vec3::zeros()).unwrap();
    let b = make_icosphere(5, 1.2, Vec3::zeros()).unwrap();
    let r = evaluate_all(&a, &b, &MetricParams::default()).unwrap();
    assert!((r.assd / 0.2 - 1.0).abs() < 0.01);
    assert!((r.hd / 0.2 - 1.0).abs() < 0.02);
    let dice_exact = 2.0 * 1.0 / (1.0 + 1.2f64.powi(3));
    assert!((r.dice / dice_exact - 1.0).abs() < 0.02, "{} vs {dice_exact}", r.dice);
    assert!(r.jaccard <= r.dice && r.hd >= r.assd);
    assert!(r.ane_deg < 1.0);
    assert_eq!(r.si_percent, 0.0);
}

#[test]
fn scaled_sphere_has_radial_normals() {
    let a = make_icosphere(4, 1.0, Vec3::zeros()).unwrap();
    let b = a.map_vertices(|p| p * 1.1).unwrap();
    let v = ane(&b, &a, 5000, 2).unwrap();
    assert!(v < 0.5, "{v}");
}

#[test]
fn rotated_cube_normal_error_matches_brute_force() {
    let a = cube(0.5);
    let rot = Rotation3::from_axis_angle(&Vec3::z_axis(), PI / 4.0);
    let b = rotate(&a, &rot, Vec3::zeros());
    let n = 4000;
    let got = ane(&a, &b, n, 9).unwrap();
    let samples = sample_surface(&a, n, 9).unwrap();
    let normals = samples.normals.unwrap();
    let mut sum = 0.0;
    for (p, np) in samples.points.iter().zip(&normals) {
        let mut best = (f64::INFINITY, 0);
        for f in 0..b.face_count() {
            let [x, y, z] = b.triangle(f);
            let d = (closest_point_on_triangle(p, &x, &y, &z) - p).norm_squared();
            if d < best.0 {
                best = (d, f);
            }
        }
        sum += np.dot(&b.face_normals()[best.1]).clamp(-1.0, 1.0).acos().to_degrees();
    }
    let oracle = sum / n as f64;
    assert!((got - oracle).abs() < 0.5, "{got} vs {oracle}");
    assert!(got > 1.0);
}

#[test]
fn anld_grows_with_noise() {
    let clean = make_icosphere(3, 1.0, Vec3::zeros()).unwrap();
    let mut last = 0.0;
    for amp in [0.005, 0.02, 0.05] {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let moved: Vec<Vec3> = clean
            .vertices()
            .iter()
            .map(|p| p * (1.0 + amp * rng.gen_range(-1.0..1.0)))
            .collect();
        let noisy = clean.with_positions(moved).unwrap();
        let v = anld(&noisy, &clean).unwrap();
        assert!(v > last, "{amp}: {v}");
        last = v;
    }
}

#[test]
fn metrics_are_rigidly_invariant() {
    let a = make_icosphere(3, 0.05, Vec3::zeros()).unwrap();
    let b = make_icosphere(3, 0.045, vec3(0.005, 0.0, 0.002)).unwrap();
    let rot = Rotation3::from_euler_angles(0.3, -0.5, 1.1);
    let t = vec3(0.2, -0.1, 0.05);
    let p = MetricParams {
        voxels: 96,
        samples: 4000,
        seed: 3,
    };
    let r0 = evaluate_all(&a, &b, &p).unwrap();
    let r1 = evaluate_all(&rotate(&a, &rot, t), &rotate(&b, &rot, t), &p).unwrap();
    for (x, y) in [(r0.dice, r1.dice), (r0.jaccard, r1.jaccard), (r0.assd, r1.assd), (r0.hd, r1.hd)] {
        assert!((x / y - 1.0).abs() < 0.01, "{x} vs {y}");
    }
    assert!((r0.anld - r1.anld).abs() < 1e-9);
}

#[test]
fn dice_converges_under_refinement() {
    let a = make_icosphere(4, 1.0, Vec3::zeros()).unwrap();
    let b = make_icosphere(4, 0.9, vec3(0.15, 0.05, 0.0)).unwrap();
    let d = |n| {
        evaluate_all(&a, &b, &MetricParams { voxels: n, samples: 1000, seed: 1 }).unwrap().dice
    };
    let (d64, d128) = (d(64), d(128));
    assert!((d64 / d128 - 1.0).abs() < 0.02, "{d64} {d128}");
}

#[test]
fn hausdorff_bounds_assd_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for i in 0..50 {
        let a = make_icosphere(1, rng.gen_range(0.5..1.5), Vec3::zeros()).unwrap();
        let c = Vec3::from_fn(|_, _| rng.gen_range(-0.5..0.5));
        let b = make_icosphere(1, rng.gen_range(0.5..1.5), c).unwrap();
        let (s, h) = assd_hausdorff(&a, &b, 200, i).unwrap();
        assert!(h >= s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn overlap_is_symmetric_and_ordered(dx in -0.6f64..0.6, r in 0.2f64..0.5) {
        let a = make_icosphere(2, 0.4, Vec3::zeros()).unwrap();
        let b = make_icosphere(2, r, vec3(dx, 0.1, 0.0)).unwrap();
        let g = GridSpec::cube(Vec3::zeros(), 1.2, 40);
        let (va, vb) = (voxelize(&a, &g).unwrap(), voxelize(&b, &g).unwrap());
        let (d1, j1) = dice_jaccard(&va, &vb).unwrap();
        let (d2, j2) = dice_jaccard(&vb, &va).unwrap();
        prop_assert_eq!((d1, j1), (d2, j2));
        prop_assert!(j1 <= d1 && (0.0..=1.0).contains(&d1));
    }
}
