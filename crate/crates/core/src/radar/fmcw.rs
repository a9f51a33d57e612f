use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Linear up-chirp waveform parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FmcwConfig {
    pub carrier_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub chirp_duration_s: f64,
    /// Samples per chirp, taken at `t_n = n * T_c / N_s`.
    pub samples: usize,
}

impl Default for FmcwConfig {
    fn default() -> Self {
        FmcwConfig {
            carrier_frequency_hz: 77e9,
            bandwidth_hz: 4e9,
            chirp_duration_s: 100e-6,
            samples: 256,
        }
    }
}

impl FmcwConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::OutOfRange(format!("{name} must be > 0, got {v}")))
            }
        };
        pos(self.carrier_frequency_hz, "carrier frequency")?;
        pos(self.bandwidth_hz, "bandwidth")?;
        pos(self.chirp_duration_s, "chirp duration")?;
        if self.samples < 2 {
            return Err(Error::OutOfRange(format!(
                "samples per chirp must be >= 2, got {}",
                self.samples
            )));
        }
        Ok(())
    }

    /// Chirp slope `S = B / T_c`, Hz/s.
    pub fn slope(&self) -> f64 {
        self.bandwidth_hz / self.chirp_duration_s
    }

    pub fn sample_interval(&self) -> f64 {
        self.chirp_duration_s / self.samples as f64
    }

    pub fn sample_time(&self, n: usize) -> f64 {
        n as f64 * self.sample_interval()
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency_hz
    }

    /// Nominal range resolution `c / 2B`.
    pub fn range_resolution(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz)
    }

    /// Highest admissible beat frequency, `N_s / (2 T_c)`.
    pub fn max_beat_frequency(&self) -> f64 {
        self.samples as f64 / (2.0 * self.chirp_duration_s)
    }

    /// Largest range whose beat frequency stays below the Nyquist limit.
    pub fn max_unambiguous_range(&self) -> f64 {
        self.max_beat_frequency() * SPEED_OF_LIGHT / (2.0 * self.slope())
    }

    pub fn check_range(&self, range_m: f64) -> Result<()> {
        let beat = beat_frequency(range_m, self);
        let limit = self.max_beat_frequency();
        if beat >= limit {
            return Err(Error::Nyquist {
                range_m,
                beat_hz: beat,
                limit_hz: limit,
            });
        }
        Ok(())
    }

    /// Dechirped phase `2 pi (f_c tau + S t tau - S tau^2 / 2)`, reduced modulo 2 pi.
    pub fn phase(&self, t: f64, tau: f64) -> f64 {
        let s = self.slope();
        let cycles = self.carrier_frequency_hz * tau + s * t * tau - 0.5 * s * tau * tau;
        std::f64::consts::TAU * (cycles - cycles.floor())
    }
}

/// Beat frequency `2 S R / c` of a scatterer at range `range_m`.
pub fn beat_frequency(range_m: f64, fmcw: &FmcwConfig) -> f64 {
    2.0 * fmcw.slope() * range_m / SPEED_OF_LIGHT
}

/// Round-trip delay `2 R / c`.
#[inline]
pub fn round_trip_delay(range_m: f64) -> f64 {
    2.0 * range_m / SPEED_OF_LIGHT
}
