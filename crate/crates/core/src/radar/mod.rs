//! FMCW forward model: waveform, aperture geometry, facet reflection and
//! visibility, and IF signal synthesis.

mod fmcw;
mod reflect;
mod scan;
mod simulate;
mod visibility;

pub use fmcw::{beat_frequency, round_trip_delay, FmcwConfig, SPEED_OF_LIGHT};
pub use reflect::{facet_amplitude, FacetView, ReflectionParams};
pub(crate) use reflect::amplitude_unchecked;
pub use scan::{ApertureScan, ApertureView};
pub use simulate::{add_noise, simulate_if_signal, simulate_point_targets, IfSignal, ViewSignal};
pub(crate) use simulate::{accumulate_tone, rotation_per_sample};
pub use visibility::{hard_visibility, soft_visibility, soft_weight, Occluder, VisibilityMode};
