use std::f64::consts::{PI, TAU};


use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::grid::{GridSpec, ReflectivityVolume};
use crate::error::{Error, Result};
use crate::radar::{round_trip_delay, ApertureScan, ApertureView, FmcwConfig, IfSignal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BackprojectionMethod {
    /// Direct sum over every sample for every voxel.
    Exact,
    /// Matched-filter output read from an oversampled spectrum by linear
    /// interpolation.
    #[default]
    Interpolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackprojectionOptions {
    pub method: BackprojectionMethod,
    pub oversample: usize,
}

impl Default for BackprojectionOptions {
    fn default() -> Self {
        BackprojectionOptions {
            method: BackprojectionMethod::Interpolated,
            oversample: 8,
        }
    }
}

fn check_grid(grid: &GridSpec, view: &ApertureView, fmcw: &FmcwConfig) -> Result<()> {
    grid.validate()?;
    let b = grid.bounds();
    let mut worst = 0.0f64;
    for e in view.elements() {
        for c in 0..8 {
            let corner = [
                if c & 1 == 0 { b.min.x } else { b.max.x },
                if c & 2 == 0 { b.min.y } else { b.max.y },
                if c & 4 == 0 { b.min.z } else { b.max.z },
            ];
            worst = worst.max((e - crate::geometry::Vec3::from(corner)).norm());
        }
    }
    fmcw.check_range(worst)
}

/// Coherent matched-filter sum `sum_e sum_n s_e(t_n) conj(exp(j Phi(t_n, tau)))`
/// for every voxel of `grid`, from the elements of view `view`. Not normalized.
pub fn backproject_complex(
    signal: &IfSignal,
    scan: &ApertureScan,
    fmcw: &FmcwConfig,
    grid: &GridSpec,
    view: usize,
    opts: &BackprojectionOptions,
) -> Result<Vec<Complex64>> {
    signal.check_against(scan, fmcw)?;
    let ap = scan
        .views
        .get(view)
        .ok_or_else(|| Error::Dimension(format!("no view {view} in scan")))?;
    check_grid(grid, ap, fmcw)?;
    let ns = fmcw.samples;
    let data = &signal.views[view].data;
    let elements = ap.elements();
    let slice = grid.dims[0] * grid.dims[1];
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.voxel_count()];

    match opts.method {
        BackprojectionMethod::Exact => {
            let dt = fmcw.sample_interval();
            let s = fmcw.slope();
            acc.par_chunks_mut(slice).enumerate().for_each(|(k, out)| {
                for (e, x) in elements.iter().enumerate() {
                    let samples = &data[e * ns..(e + 1) * ns];
                    for j in 0..grid.dims[1] {
                        for i in 0..grid.dims[0] {
                            let tau = round_trip_delay((x - grid.voxel_center(i, j, k)).norm());
                            let w = Complex64::from_polar(1.0, -TAU * s * tau * dt);
                            // Horner evaluation of sum_n s_n w^n.
                            let mut h = Complex64::new(0.0, 0.0);
                            for z in samples.iter().rev() {
                                h = h * w + z;
                            }
                            let lead = Complex64::from_polar(1.0, -fmcw.phase(0.0, tau));
                            out[i + grid.dims[0] * j] += lead * h;
                        }
                    }
                }
            });
        }
        BackprojectionMethod::Interpolated => {
            if opts.oversample < 2 {
                return Err(Error::OutOfRange("backprojection oversample must be >= 2".into()));
            }
            let m = ns * opts.oversample;
            let spectra = demodulated_spectra(data, ns, m);
            let dt = fmcw.sample_interval();
            let s = fmcw.slope();
            let bin_per_tau = s * dt * m as f64;
            let center = (ns - 1) as f64;
            let half = m / 2;
            let table = PhaseTable::new();
            acc.par_chunks_mut(slice).enumerate().for_each(|(k, out)| {
                for (e, x) in elements.iter().enumerate() {
                    let spec = &spectra[e * (half + 1)..(e + 1) * (half + 1)];
                    for j in 0..grid.dims[1] {
                        for i in 0..grid.dims[0] {
                            let tau = round_trip_delay((x - grid.voxel_center(i, j, k)).norm());
                            let kf = tau * bin_per_tau;
                            let k0 = (kf as usize).min(half - 1);
                            let frac = kf - k0 as f64;
                            let y = spec[k0] + (spec[k0 + 1] - spec[k0]) * frac;
                            let cycles = fmcw.carrier_frequency_hz * tau - 0.5 * s * tau * tau
                                + 0.5 * s * tau * dt * center;
                            out[i + grid.dims[0] * j] += y * table.conj_turn(cycles);
                        }
                    }
                }
            });
        }
    }
    Ok(acc)
}

const PHASE_TABLE_BITS: u32 = 12;

/// `exp(-j 2 pi x)` by linear interpolation in a one-turn table; error below
/// 1e-6 in magnitude.
struct PhaseTable {
    entries: Vec<Complex64>,
}

impl PhaseTable {
    fn new() -> Self {
        let n = 1usize << PHASE_TABLE_BITS;
        PhaseTable {
            entries: (0..=n)
                .map(|i| Complex64::from_polar(1.0, -TAU * i as f64 / n as f64))
                .collect(),
        }
    }

    #[inline]
    fn conj_turn(&self, cycles: f64) -> Complex64 {
        let n = (1usize << PHASE_TABLE_BITS) as f64;
        let x = (cycles - cycles.floor()) * n;
        let i = (x as usize).min((1 << PHASE_TABLE_BITS) - 1);
        let f = x - i as f64;
        self.entries[i] + (self.entries[i + 1] - self.entries[i]) * f
    }
}

/// Zero-padded spectra `X_k` multiplied by `exp(j pi k (N-1) / M)`, which
/// removes the linear phase of an uncentered time window and leaves a smooth
/// function of frequency. Bins `0..=M/2` per element.
fn demodulated_spectra(data: &[Complex64], ns: usize, m: usize) -> Vec<Complex64> {
    let fft = FftPlanner::<f64>::new().plan_fft_forward(m);
    let half = m / 2;
    let mut out = Vec::with_capacity(data.len() / ns * (half + 1));
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for chunk in data.chunks_exact(ns) {
        buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        buf[..ns].copy_from_slice(chunk);
        fft.process(&mut buf);
        for (k, z) in buf[..=half].iter().enumerate() {
            out.push(z * Complex64::from_polar(1.0, PI * k as f64 * (ns - 1) as f64 / m as f64));
        }
    }
    out
}

/// Magnitude of the matched-filter sum, divided by the element count.
pub fn backproject_volume(
    signal: &IfSignal,
    scan: &ApertureScan,
    fmcw: &FmcwConfig,
    grid: &GridSpec,
    view: usize,
    opts: &BackprojectionOptions,
) -> Result<ReflectivityVolume> {
    let acc = backproject_complex(signal, scan, fmcw, grid, view, opts)?;
    let n = scan.views[view].element_count() as f64;
    Ok(ReflectivityVolume {
        grid: *grid,
        view_id: scan.views[view].id,
        data: acc.iter().map(|z| z.norm() / n).collect(),
    })
}
