use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::regularizers::scatter_cross_gradient;
use super::LossValue;
use crate::error::{Error, Result};
use crate::geometry::{triangle_cross, Vec3};
use crate::mesh::TriangleMesh;
use crate::radar::{
    accumulate_tone, amplitude_unchecked, round_trip_delay, rotation_per_sample, soft_weight, ApertureScan,
    FmcwConfig, IfSignal, ReflectionParams, SPEED_OF_LIGHT,
};

/// Every `(view, element)` pair of `scan`.
pub fn all_elements(scan: &ApertureScan) -> Vec<(usize, usize)> {
    scan.views
        .iter()
        .enumerate()
        .flat_map(|(v, view)| (0..view.element_count()).map(move |e| (v, e)))
        .collect()
}

/// Up to `per_view` distinct elements of each view, drawn from `seed`, in
/// ascending order.
pub fn random_elements(scan: &ApertureScan, per_view: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (v, view) in scan.views.iter().enumerate() {
        let n = view.element_count();
        let mut picks = sample(&mut rng, n, per_view.min(n)).into_vec();
        picks.sort_unstable();
        out.extend(picks.into_iter().map(|e| (v, e)));
    }
    out
}

struct ActiveFacet {
    face: usize,
    /// `vis * amplitude`.
    weight: f64,
    vis: f64,
    amp: f64,
    tau: f64,
    range: f64,
    cos: f64,
    dir: Vec3,
}

/// Per-face accumulators: gradient with respect to the face cross vector and
/// to the face centroid.
type FaceGrads = Vec<(Vec3, Vec3)>;

/// `mean(|Re d| + |Im d|)` over every sample of the selected elements, where
/// `d` is the soft-visibility prediction at `positions` minus `observed`.
pub fn radar_loss(
    mesh: &TriangleMesh,
    positions: &[Vec3],
    observed: &IfSignal,
    scan: &ApertureScan,
    fmcw: &FmcwConfig,
    params: &ReflectionParams,
    elements: &[(usize, usize)],
) -> Result<LossValue> {
    observed.check_against(scan, fmcw)?;
    let current = mesh.with_positions(positions.to_vec())?;
    if elements.is_empty() {
        return Ok(LossValue::zeros(positions.len()));
    }
    for &(v, e) in elements {
        if v >= scan.views.len() || e >= scan.views[v].element_count() {
            return Err(Error::Dimension(format!("element ({v}, {e}) is not in the scan")));
        }
    }
    let n_total = (elements.len() * fmcw.samples) as f64;
    let centroids: Vec<Vec3> = (0..current.face_count()).map(|f| current.face_centroid(f)).collect();

    let per_element: Vec<(f64, FaceGrads)> = elements
        .par_iter()
        .map(|&(v, e)| {
            let x = scan.views[v].element(e);
            element_term(&current, &centroids, &x, observed.element(v, e), fmcw, params, n_total)
        })
        .collect();

    let faces = current.faces();
    let mut value = 0.0;
    let mut face_h = vec![Vec3::zeros(); faces.len()];
    let mut face_c = vec![Vec3::zeros(); faces.len()];
    for (l, grads) in &per_element {
        value += l;
        for (k, (gh, gc)) in grads.iter().enumerate() {
            face_h[k] += gh;
            face_c[k] += gc;
        }
    }
    let mut gradient = vec![Vec3::zeros(); positions.len()];
    for (k, f) in faces.iter().enumerate() {
        scatter_cross_gradient(*f, &current.triangle(k), &face_h[k], &mut gradient);
        let share = face_c[k] / 3.0;
        for &v in f {
            gradient[v as usize] += share;
        }
    }
    Ok(LossValue {
        value: value / n_total,
        gradient,
    })
}

fn element_term(
    mesh: &TriangleMesh,
    centroids: &[Vec3],
    x: &Vec3,
    observed: &[Complex64],
    fmcw: &FmcwConfig,
    params: &ReflectionParams,
    n_total: f64,
) -> (f64, FaceGrads) {
    let ns = fmcw.samples;
    let normals = mesh.face_normals();
    let areas = mesh.face_areas();
    let mut pred = vec![Complex64::new(0.0, 0.0); ns];
    let mut active = Vec::new();
    for (k, c) in centroids.iter().enumerate() {
        let d = x - c;
        let range = d.norm();
        let cos = normals[k].dot(&d) / range;
        let amp = amplitude_unchecked(areas[k], cos, range, params);
        if amp == 0.0 {
            continue;
        }
        let vis = soft_weight(cos, params.visibility_sharpness);
        let tau = round_trip_delay(range);
        accumulate_tone(&mut pred, vis * amp, tau, fmcw);
        active.push(ActiveFacet {
            face: k,
            weight: vis * amp,
            vis,
            amp,
            tau,
            range,
            cos,
            dir: d / range,
        });
    }

    let mut loss = 0.0;
    let sign: Vec<Complex64> = pred
        .iter()
        .zip(observed)
        .map(|(p, o)| {
            let r = p - o;
            loss += r.re.abs() + r.im.abs();
            Complex64::new(sgn(r.re), -sgn(r.im)) / n_total
        })
        .collect();

    let mut grads = vec![(Vec3::zeros(), Vec3::zeros()); centroids.len()];
    let s = fmcw.slope();
    let dt = fmcw.sample_interval();
    let m = params.specular_exponent;
    let kappa = params.visibility_sharpness;
    for f in &active {
        // P = sum conj(G_n) z_n and Q = sum conj(G_n) t_n z_n; `sign` holds conj(G).
        let step = Complex64::from_polar(1.0, rotation_per_sample(f.tau, fmcw));
        let mut z = Complex64::from_polar(1.0, fmcw.phase(0.0, f.tau));
        let mut p = Complex64::new(0.0, 0.0);
        let mut q = Complex64::new(0.0, 0.0);
        for (n, g) in sign.iter().enumerate() {
            let gz = g * z;
            p += gz;
            q += gz * n as f64;
            z *= step;
        }
        q *= dt;
        let d_weight = p.re;
        let d_tau = -f.weight * TAU * ((fmcw.carrier_frequency_hz - s * f.tau) * p + q * s).im;

        let d_range = d_tau * 2.0 / SPEED_OF_LIGHT - d_weight * params.spreading_exponent * f.weight / f.range;
        let d_cos = d_weight * (kappa * f.vis * (1.0 - f.vis) * f.amp + f.vis * m * f.amp / f.cos);
        let area = areas[f.face];
        let d_area = d_weight * f.weight / area;

        let n = normals[f.face];
        let d_centroid = -f.dir * d_range - (n - f.dir * f.cos) * (d_cos / f.range);
        let g_n = f.dir * d_cos;
        let [a, b, c] = mesh.triangle(f.face);
        let len = triangle_cross(&a, &b, &c).norm();
        let d_cross = (g_n - n * n.dot(&g_n)) / len + n * (0.5 * d_area);
        grads[f.face] = (d_cross, d_centroid);
    }
    (loss, grads)
}

#[inline]
fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
