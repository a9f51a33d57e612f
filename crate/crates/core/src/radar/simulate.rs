//! Facet-model IF signal synthesis.
//!
//! Each facet acts as a point scatterer at its centroid. For element `x_e` and
//! sample time `t_n` the dechirped return is
//! `s(t_n) = sum_k vis_k * A_k * exp(j Phi(t_n, tau_k))` with
//! `tau_k = 2 |x_e - c_k| / c`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::fmcw::{round_trip_delay, FmcwConfig};
use super::reflect::{amplitude_unchecked, ReflectionParams};
use super::scan::ApertureScan;
use super::visibility::{soft_weight, Occluder, VisibilityMode};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::mesh::TriangleMesh;

/// Samples of one view, element-major: `data[e * samples + n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewSignal {
    pub view_id: usize,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl ViewSignal {
    pub fn element_count(&self) -> usize {
        self.rows * self.cols
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IfSignal {
    pub fmcw: FmcwConfig,
    pub views: Vec<ViewSignal>,
    /// Set when the source mesh had no faces; all samples are then zero.
    pub empty_scene: bool,
}

impl IfSignal {
    pub fn samples_per_chirp(&self) -> usize {
        self.fmcw.samples
    }

    pub fn element(&self, view: usize, element: usize) -> &[Complex64] {
        let n = self.fmcw.samples;
        &self.views[view].data[element * n..(element + 1) * n]
    }

    pub fn zeros(scan: &ApertureScan, fmcw: &FmcwConfig) -> Self {
        IfSignal {
            fmcw: *fmcw,
            views: scan
                .views
                .iter()
                .map(|v| ViewSignal {
                    view_id: v.id,
                    rows: v.rows,
                    cols: v.cols,
                    data: vec![Complex64::new(0.0, 0.0); v.element_count() * fmcw.samples],
                })
                .collect(),
            empty_scene: false,
        }
    }

    /// Checks that dimensions agree with `scan` and all samples are finite.
    pub fn check_against(&self, scan: &ApertureScan, fmcw: &FmcwConfig) -> Result<()> {
        if self.fmcw.samples != fmcw.samples {
            return Err(Error::Dimension(format!(
                "signal has {} samples per chirp, config {}",
                self.fmcw.samples, fmcw.samples
            )));
        }
        if self.views.len() != scan.views.len() {
            return Err(Error::Dimension(format!(
                "signal has {} views, scan {}",
                self.views.len(),
                scan.views.len()
            )));
        }
        for (s, v) in self.views.iter().zip(&scan.views) {
            if s.rows != v.rows || s.cols != v.cols || s.data.len() != v.element_count() * fmcw.samples {
                return Err(Error::Dimension(format!(
                    "view {} signal is {}x{} ({} samples), scan is {}x{}",
                    v.id,
                    s.rows,
                    s.cols,
                    s.data.len(),
                    v.rows,
                    v.cols
                )));
            }
            if s.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Dimension(format!("view {} holds non-finite samples", v.id)));
            }
        }
        Ok(())
    }

    /// Mean of `|Re| + |Im|` over every sample.
    pub fn mean_abs(&self) -> f64 {
        let (sum, count) = self.views.iter().fold((0.0, 0usize), |(s, c), v| {
            (
                s + v.data.iter().map(|z| z.re.abs() + z.im.abs()).sum::<f64>(),
                c + v.data.len(),
            )
        });
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }
}

/// Adds `amp * exp(j Phi(t_n, tau))` to every sample of `out`.
#[inline]
pub(crate) fn accumulate_tone(out: &mut [Complex64], amp: f64, tau: f64, fmcw: &FmcwConfig) {
    let z0 = Complex64::from_polar(amp, fmcw.phase(0.0, tau));
    let step = Complex64::from_polar(1.0, rotation_per_sample(tau, fmcw));
    let mut z = z0;
    for s in out.iter_mut() {
        *s += z;
        z *= step;
    }
}

/// Phase advance between consecutive samples, `2 pi S tau dt`.
#[inline]
pub(crate) fn rotation_per_sample(tau: f64, fmcw: &FmcwConfig) -> f64 {
    std::f64::consts::TAU * fmcw.slope() * tau * fmcw.sample_interval()
}

fn check_scene_ranges(centroids: &[Vec3], scan: &ApertureScan, fmcw: &FmcwConfig) -> Result<()> {
    let mut worst = 0.0f64;
    for view in &scan.views {
        for e in view.elements() {
            for c in centroids {
                worst = worst.max((e - c).norm());
            }
        }
    }
    fmcw.check_range(worst)
}

/// Synthesizes the IF signal of `mesh` for every element of `scan`.
pub fn simulate_if_signal(
    mesh: &TriangleMesh,
    scan: &ApertureScan,
    fmcw: &FmcwConfig,
    params: &ReflectionParams,
    mode: VisibilityMode,
) -> Result<IfSignal> {
    fmcw.validate()?;
    params.validate()?;
    scan.validate()?;
    if mesh.face_count() == 0 {
        log::warn!("simulating an empty mesh; the signal is identically zero");
        let mut s = IfSignal::zeros(scan, fmcw);
        s.empty_scene = true;
        return Ok(s);
    }
    let centroids: Vec<Vec3> = (0..mesh.face_count()).map(|f| mesh.face_centroid(f)).collect();
    check_scene_ranges(&centroids, scan, fmcw)?;

    let occluder = (mode == VisibilityMode::Hard).then(|| Occluder::new(mesh));
    let normals = mesh.face_normals();
    let areas = mesh.face_areas();
    let ns = fmcw.samples;

    let views = scan
        .views
        .iter()
        .map(|view| {
            let per_element: Vec<Vec<Complex64>> = (0..view.element_count())
                .into_par_iter()
                .map(|ei| {
                    let x = view.element(ei);
                    let mut out = vec![Complex64::new(0.0, 0.0); ns];
                    for k in 0..centroids.len() {
                        let d = x - centroids[k];
                        let range = d.norm();
                        let cos = normals[k].dot(&d) / range;
                        let amp = amplitude_unchecked(areas[k], cos, range, params);
                        if amp == 0.0 {
                            continue;
                        }
                        let vis = match &occluder {
                            Some(occ) => {
                                if occ.is_occluded(k, &x) {
                                    continue;
                                }
                                1.0
                            }
                            None => soft_weight(cos, params.visibility_sharpness),
                        };
                        accumulate_tone(&mut out, vis * amp, round_trip_delay(range), fmcw);
                    }
                    out
                })
                .collect();
            ViewSignal {
                view_id: view.id,
                rows: view.rows,
                cols: view.cols,
                data: per_element.concat(),
            }
        })
        .collect();

    Ok(IfSignal {
        fmcw: *fmcw,
        views,
        empty_scene: false,
    })
}

/// Isotropic point targets with fixed complex-free amplitudes; no spreading or
/// visibility. Used as an imaging reference.
pub fn simulate_point_targets(
    targets: &[(Vec3, f64)],
    scan: &ApertureScan,
    fmcw: &FmcwConfig,
) -> Result<IfSignal> {
    fmcw.validate()?;
    scan.validate()?;
    let pts: Vec<Vec3> = targets.iter().map(|t| t.0).collect();
    check_scene_ranges(&pts, scan, fmcw)?;
    let ns = fmcw.samples;
    let views = scan
        .views
        .iter()
        .map(|view| {
            let per_element: Vec<Vec<Complex64>> = (0..view.element_count())
                .into_par_iter()
                .map(|ei| {
                    let x = view.element(ei);
                    let mut out = vec![Complex64::new(0.0, 0.0); ns];
                    for (p, a) in targets {
                        accumulate_tone(&mut out, *a, round_trip_delay((x - p).norm()), fmcw);
                    }
                    out
                })
                .collect();
            ViewSignal {
                view_id: view.id,
                rows: view.rows,
                cols: view.cols,
                data: per_element.concat(),
            }
        })
        .collect();
    Ok(IfSignal {
        fmcw: *fmcw,
        views,
        empty_scene: targets.is_empty(),
    })
}

/// Adds circular complex white noise at `snr_db` relative to each view's mean
/// sample power. Views with zero power are left untouched.
pub fn add_noise(signal: &mut IfSignal, snr_db: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for view in &mut signal.views {
        let power = view.data.iter().map(|z| z.norm_sqr()).sum::<f64>() / view.data.len().max(1) as f64;
        if power == 0.0 {
            continue;
        }
        let sigma = (power / 10f64.powf(snr_db / 10.0) / 2.0).sqrt();
        for z in &mut view.data {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *z += Complex64::new(re, im) * sigma;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vec3;
    use crate::mesh::make_icosphere;
    use crate::radar::fmcw::beat_frequency;
    use crate::radar::scan::ApertureView;

    fn single_element_scan(at: Vec3) -> ApertureScan {
        ApertureScan {
            views: vec![ApertureView {
                id: 0,
                rows: 1,
                cols: 1,
                spacing_m: 0.002,
                center: at.into(),
                boresight: [0.0, 0.0, -1.0],
                u_axis: [1.0, 0.0, 0.0],
                v_axis: [0.0, 1.0, 0.0],
            }],
        }
    }

    /// Small facet centred at the origin, facing +z.
    fn facet(offset: Vec3, size: f64) -> TriangleMesh {
        let h = size / 2.0;
        let a = vec3(-h, -h * 0.57735, 0.0) + offset;
        let b = vec3(h, -h * 0.57735, 0.0) + offset;
        let c = vec3(0.0, h * 1.1547, 0.0) + offset;
        TriangleMesh::new(vec![a, b, c], vec![[0, 1, 2]]).unwrap()
    }

    #[test]
    fn empty_mesh_gives_zero_signal() {
        let m = TriangleMesh::new(vec![], vec![]).unwrap();
        let scan = ApertureScan::orthogonal(Vec3::zeros(), 0.5, 2, 2, 0.002);
        let s = simulate_if_signal(&m, &scan, &FmcwConfig::default(), &ReflectionParams::default(), VisibilityMode::Hard)
            .unwrap();
        assert!(s.empty_scene);
        assert!(s.views.iter().all(|v| v.data.iter().all(|z| z.norm() == 0.0)));
    }

    #[test]
    fn tone_frequency_matches_beat_frequency() {
        let fmcw = FmcwConfig::default();
        let m = facet(Vec3::zeros(), 1e-3);
        let r = 0.5;
        let scan = single_element_scan(m.face_centroid(0) + vec3(0.0, 0.0, r));
        let s = simulate_if_signal(&m, &scan, &fmcw, &ReflectionParams::default(), VisibilityMode::Hard).unwrap();
        let x = s.element(0, 0);
        // Oracle: brute-force DFT peak over a fine frequency grid.
        let fs = 1.0 / fmcw.sample_interval();
        let bin = fs / fmcw.samples as f64;
        let mut best = (0.0, 0.0);
        for k in 0..4000 {
            let f = k as f64 * fs / 2.0 / 4000.0;
            let acc: Complex64 = x
                .iter()
                .enumerate()
                .map(|(n, z)| z * Complex64::from_polar(1.0, -std::f64::consts::TAU * f * fmcw.sample_time(n)))
                .sum();
            if acc.norm() > best.1 {
                best = (f, acc.norm());
            }
        }
        let expect = beat_frequency(r, &fmcw);
        assert!((best.0 - expect).abs() < bin, "{} vs {}", best.0, expect);
        assert!((expect - 133_333.3).abs() / 133_333.3 < 1e-3);
    }

    #[test]
    fn phase_matches_closed_form() {
        let fmcw = FmcwConfig::default();
        let tau = round_trip_delay(0.37);
        let mut out = vec![Complex64::new(0.0, 0.0); fmcw.samples];
        accumulate_tone(&mut out, 2.0, tau, &fmcw);
        for (n, z) in out.iter().enumerate() {
            let t = fmcw.sample_time(n);
            let s = fmcw.slope();
            let phi = std::f64::consts::TAU
                * (fmcw.carrier_frequency_hz * tau + s * t * tau - 0.5 * s * tau * tau);
            let expect = Complex64::from_polar(2.0, phi);
            assert!((z - expect).norm() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn symmetric_facets_superpose() {
        let fmcw = FmcwConfig::default();
        let p = ReflectionParams::default();
        let scan = single_element_scan(vec3(0.0, 0.0, 0.4));
        let one = facet(vec3(0.01, 0.0, 0.0), 2e-3);
        let mirror = one.map_vertices(|v| vec3(-v.x, v.y, v.z)).unwrap();
        // Mirroring flips the winding; restore the +z normal.
        let mirror = TriangleMesh::new(mirror.vertices().to_vec(), vec![[0, 2, 1]]).unwrap();
        let mut v = one.vertices().to_vec();
        v.extend_from_slice(mirror.vertices());
        let both = TriangleMesh::new(v, vec![[0, 1, 2], [3, 5, 4]]).unwrap();
        let s1 = simulate_if_signal(&one, &scan, &fmcw, &p, VisibilityMode::Hard).unwrap();
        let s2 = simulate_if_signal(&both, &scan, &fmcw, &p, VisibilityMode::Hard).unwrap();
        let scale = s1.views[0].data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (a, b) in s1.views[0].data.iter().zip(&s2.views[0].data) {
            assert!((b - a * 2.0).norm() < 1e-9 * scale.max(1.0));
        }
    }

    #[test]
    fn reflectivity_scales_signal_linearly() {
        let fmcw = FmcwConfig::default();
        let m = make_icosphere(1, 0.05, Vec3::zeros()).unwrap();
        let scan = ApertureScan::orthogonal(Vec3::zeros(), 0.4, 2, 2, 0.002);
        let p1 = ReflectionParams::default();
        let p3 = ReflectionParams {
            reflectivity: 3.0,
            ..p1
        };
        let a = simulate_if_signal(&m, &scan, &fmcw, &p1, VisibilityMode::Soft).unwrap();
        let b = simulate_if_signal(&m, &scan, &fmcw, &p3, VisibilityMode::Soft).unwrap();
        for (va, vb) in a.views.iter().zip(&b.views) {
            for (x, y) in va.data.iter().zip(&vb.data) {
                assert!((y - x * 3.0).norm() <= 1e-12 * y.norm().max(1e-30));
            }
        }
    }

    #[test]
    fn nyquist_violation_is_reported() {
        let fmcw = FmcwConfig::default();
        let m = facet(Vec3::zeros(), 1e-3);
        let scan = single_element_scan(vec3(0.0, 0.0, 10.0));
        let r = simulate_if_signal(&m, &scan, &fmcw, &ReflectionParams::default(), VisibilityMode::Hard);
        assert!(matches!(r, Err(Error::Nyquist { .. })));
    }

    #[test]
    fn noise_hits_requested_snr() {
        let fmcw = FmcwConfig::default();
        let scan = ApertureScan::orthogonal(Vec3::zeros(), 0.4, 4, 4, 0.002);
        let clean = simulate_point_targets(&[(Vec3::zeros(), 1.0)], &scan, &fmcw).unwrap();
        let mut noisy = clean.clone();
        add_noise(&mut noisy, 10.0, 1);
        let v = 0;
        let ps: f64 = clean.views[v].data.iter().map(|z| z.norm_sqr()).sum();
        let pn: f64 = clean.views[v]
            .data
            .iter()
            .zip(&noisy.views[v].data)
            .map(|(a, b)| (b - a).norm_sqr())
            .sum();
        let snr = 10.0 * (ps / pn).log10();
        assert!((snr - 10.0).abs() < 0.3, "{snr}");
    }
}
