use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Parameters of the per-facet amplitude `rho * area * max(0, cos)^m / R^p`
/// and of the soft visibility sigmoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReflectionParams {
    pub specular_exponent: f64,
    pub reflectivity: f64,
    pub spreading_exponent: f64,
    pub visibility_sharpness: f64,
}

impl Default for ReflectionParams {
    fn default() -> Self {
        ReflectionParams {
            specular_exponent: 4.0,
            reflectivity: 1.0,
            spreading_exponent: 2.0,
            visibility_sharpness: 10.0,
        }
    }
}

impl ReflectionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.specular_exponent >= 0.0) {
            return Err(Error::OutOfRange("specular exponent must be >= 0".into()));
        }
        if !(self.reflectivity > 0.0) {
            return Err(Error::OutOfRange("reflectivity must be > 0".into()));
        }
        if !(self.visibility_sharpness > 0.0) {
            return Err(Error::OutOfRange("visibility sharpness must be > 0".into()));
        }
        if !self.spreading_exponent.is_finite() {
            return Err(Error::OutOfRange("spreading exponent must be finite".into()));
        }
        Ok(())
    }
}

/// Geometry of one facet as seen from one sensor position.
#[derive(Debug, Clone, Copy)]
pub struct FacetView {
    pub range: f64,
    /// Unit vector from the facet centroid toward the sensor.
    pub direction: Vec3,
    /// Cosine between the facet normal and `direction`.
    pub cos_theta: f64,
}

impl FacetView {
    pub fn new(centroid: &Vec3, normal: &Vec3, sensor: &Vec3) -> Self {
        let d = sensor - centroid;
        let range = d.norm();
        let direction = if range > 0.0 { d / range } else { Vec3::zeros() };
        FacetView {
            range,
            direction,
            cos_theta: normal.dot(&direction),
        }
    }
}

/// Amplitude of a facet of area `area` as seen along `view`.
pub fn facet_amplitude(area: f64, view: &FacetView, params: &ReflectionParams) -> Result<f64> {
    if !(view.range > 0.0) {
        return Err(Error::Degenerate("sensor coincides with facet centroid".into()));
    }
    Ok(amplitude_unchecked(area, view.cos_theta, view.range, params))
}

#[inline]
pub(crate) fn amplitude_unchecked(area: f64, cos_theta: f64, range: f64, params: &ReflectionParams) -> f64 {
    if cos_theta <= 0.0 {
        return 0.0;
    }
    params.reflectivity * area * cos_theta.powf(params.specular_exponent) * range.powf(-params.spreading_exponent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vec3;

    fn view_at(range: f64, angle: f64) -> FacetView {
        let sensor = vec3(angle.sin(), 0.0, angle.cos()) * range;
        FacetView::new(&Vec3::zeros(), &Vec3::z(), &sensor)
    }

    #[test]
    fn back_facing_is_zero() {
        let p = ReflectionParams::default();
        assert_eq!(facet_amplitude(1.0, &view_at(1.0, 2.0), &p).unwrap(), 0.0);
        assert_eq!(facet_amplitude(1.0, &view_at(1.0, std::f64::consts::FRAC_PI_2 + 1e-9), &p).unwrap(), 0.0);
    }

    #[test]
    fn inverse_square_spreading() {
        let p = ReflectionParams::default();
        let a1 = facet_amplitude(2e-4, &view_at(0.5, 0.3), &p).unwrap();
        let a2 = facet_amplitude(2e-4, &view_at(1.0, 0.3), &p).unwrap();
        assert!((a1 / a2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn isotropic_lobe_ignores_angle() {
        let p = ReflectionParams {
            specular_exponent: 0.0,
            ..Default::default()
        };
        let a1 = facet_amplitude(1.0, &view_at(1.0, 0.1), &p).unwrap();
        let a2 = facet_amplitude(1.0, &view_at(1.0, 1.2), &p).unwrap();
        assert!((a1 - a2).abs() < 1e-15);
    }

    #[test]
    fn zero_range_is_an_error() {
        let v = FacetView::new(&Vec3::zeros(), &Vec3::z(), &Vec3::zeros());
        assert!(facet_amplitude(1.0, &v, &ReflectionParams::default()).is_err());
    }
}
