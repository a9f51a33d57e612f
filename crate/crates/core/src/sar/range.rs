use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radar::{FmcwConfig, IfSignal, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    Hann,
    Rectangular,
}

impl Window {
    pub fn coefficients(&self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann if n < 2 => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / (n - 1) as f64).cos())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RangeCompression {
    pub window: Window,
    /// FFT length as a multiple of the samples per chirp.
    pub zero_pad: usize,
}

impl Default for RangeCompression {
    fn default() -> Self {
        RangeCompression {
            window: Window::Hann,
            zero_pad: 1,
        }
    }
}

/// Magnitude range profiles; only non-negative beat frequencies are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeProfiles {
    pub fft_len: usize,
    /// Range step between consecutive bins.
    pub bin_spacing_m: f64,
    pub bins: usize,
    /// Per view, `[element * bins + b]`.
    pub views: Vec<Vec<f64>>,
}

impl RangeProfiles {
    pub fn profile(&self, view: usize, element: usize) -> &[f64] {
        &self.views[view][element * self.bins..(element + 1) * self.bins]
    }

    pub fn bin_range(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_spacing_m
    }
}

pub fn range_compress(signal: &IfSignal, fmcw: &FmcwConfig, opts: &RangeCompression) -> Result<RangeProfiles> {
    let ns = fmcw.samples;
    if signal.fmcw.samples != ns {
        return Err(Error::Dimension(format!(
            "signal has {} samples per chirp, config {}",
            signal.fmcw.samples, ns
        )));
    }
    if opts.zero_pad == 0 {
        return Err(Error::OutOfRange("zero-pad factor must be >= 1".into()));
    }
    let n_fft = ns * opts.zero_pad;
    let bins = n_fft / 2;
    let win = opts.window.coefficients(ns);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_fft);
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    let views = signal
        .views
        .iter()
        .map(|v| {
            let mut out = Vec::with_capacity(v.element_count() * bins);
            for chunk in v.data.chunks_exact(ns) {
                buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
                for (i, (z, w)) in chunk.iter().zip(&win).enumerate() {
                    buf[i] = z * w;
                }
                fft.process(&mut buf);
                out.extend(buf[..bins].iter().map(|z| z.norm()));
            }
            out
        })
        .collect();
    Ok(RangeProfiles {
        fft_len: n_fft,
        bin_spacing_m: SPEED_OF_LIGHT / (2.0 * fmcw.bandwidth_hz) * ns as f64 / n_fft as f64,
        bins,
        views,
    })
}
