use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::LossValue;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::mesh::TriangleMesh;

/// Outcome of comparing an analytic gradient with central differences.
#[derive(Debug, Clone, PartialEq)]
pub struct FdReport {
    /// Worst `|g_a - g_fd| / max(|g_a|, |g_fd|, 1e-12)` over checked coordinates.
    pub max_rel_error: f64,
    /// `(vertex, axis)` where the worst error occurred.
    pub worst: Option<(usize, usize)>,
    pub analytic: f64,
    pub numeric: f64,
    pub checked: usize,
}

/// Default central-difference step, `1e-5` of the mean edge length.
pub fn default_step(mesh: &TriangleMesh) -> f64 {
    1e-5 * mesh.mean_edge_length()
}

/// Checks `f`'s gradient at `positions` on `samples` randomly chosen
/// coordinates (distinct, drawn from `seed`).
pub fn finite_diff_check<F>(f: F, positions: &[Vec3], eps: f64, samples: usize, seed: u64) -> Result<FdReport>
where
    F: Fn(&[Vec3]) -> Result<LossValue>,
{
    if !(eps > 0.0) {
        return Err(Error::OutOfRange("finite-difference step must be > 0".into()));
    }
    let base = f(positions)?;
    if base.gradient.len() != positions.len() {
        return Err(Error::Dimension("gradient length differs from vertex count".into()));
    }
    let coords = 3 * positions.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = sample(&mut rng, coords, samples.min(coords));
    let mut report = FdReport {
        max_rel_error: 0.0,
        worst: None,
        analytic: 0.0,
        numeric: 0.0,
        checked: 0,
    };
    let mut work = positions.to_vec();
    for c in picks.iter() {
        let (v, a) = (c / 3, c % 3);
        let orig = work[v][a];
        work[v][a] = orig + eps;
        let up = f(&work)?.value;
        work[v][a] = orig - eps;
        let down = f(&work)?.value;
        work[v][a] = orig;
        let numeric = (up - down) / (2.0 * eps);
        let analytic = base.gradient[v][a];
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-12);
        report.checked += 1;
        if rel > report.max_rel_error || report.worst.is_none() {
            report.max_rel_error = rel;
            report.worst = Some((v, a));
            report.analytic = analytic;
            report.numeric = numeric;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vec3;

    #[test]
    fn quadratic_is_exact() {
        let p = vec![vec3(0.3, -1.2, 2.0), vec3(4.0, 0.5, -0.25)];
        let f = |x: &[Vec3]| -> Result<LossValue> {
            Ok(LossValue {
                value: x.iter().map(|v| v.norm_squared()).sum(),
                gradient: x.iter().map(|v| v * 2.0).collect(),
            })
        };
        let r = finite_diff_check(f, &p, 1e-3, 6, 0).unwrap();
        assert_eq!(r.checked, 6);
        assert!(r.max_rel_error < 1e-9, "{r:?}");
    }

    #[test]
    fn wrong_gradient_is_caught() {
        let p = vec![vec3(1.0, 2.0, 3.0)];
        let f = |x: &[Vec3]| -> Result<LossValue> {
            Ok(LossValue {
                value: x[0].norm_squared(),
                gradient: vec![x[0] * 2.1],
            })
        };
        assert!(finite_diff_check(f, &p, 1e-4, 3, 0).unwrap().max_rel_error > 0.04);
    }
}
