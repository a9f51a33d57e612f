//! Double-double (about 106-bit) evaluation of the radar loss value, used as a
//! finite-difference reference where `f64` round-off and the L1 kinks make
//! plain central differences unreliable.

use std::ops::{Add, Div, Mul, Neg, Sub};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::fd::FdReport;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::mesh::TriangleMesh;
use crate::radar::{ApertureScan, FmcwConfig, IfSignal, ReflectionParams, SPEED_OF_LIGHT};

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const PI_2: Dd = Dd {
    hi: std::f64::consts::FRAC_PI_2,
    lo: 6.123233995736766e-17,
};
const TAU: Dd = Dd {
    hi: std::f64::consts::TAU,
    lo: 2.4492935982947064e-16,
};
const LN_2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.3190468138462996e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let q = self.hi.sqrt();
        let qq = Dd::new(q) * Dd::new(q);
        Dd::new(q) + Dd::new((self - qq).hi / (2.0 * q))
    }

    pub fn powi(self, n: u32) -> Dd {
        let mut out = Dd::ONE;
        for _ in 0..n {
            out = out * self;
        }
        out
    }

    pub fn exp(self) -> Dd {
        let k = (self.hi / LN_2.hi).round();
        let r = self - LN_2 * k;
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for i in 1..40 {
            term = term * r / i as f64;
            sum = sum + term;
            if term.hi.abs() < 1e-34 {
                break;
            }
        }
        let s = 2f64.powi(k as i32);
        Dd {
            hi: sum.hi * s,
            lo: sum.lo * s,
        }
    }

    pub fn sin_cos(self) -> (Dd, Dd) {
        let k = (self.hi / PI_2.hi).round();
        let r = self - PI_2 * k;
        let r2 = r * r;
        let (mut s, mut c) = (r, Dd::ONE);
        let (mut ts, mut tc) = (r, Dd::ONE);
        for i in 1..30 {
            let i = i as f64;
            ts = -(ts * r2) / ((2.0 * i) * (2.0 * i + 1.0));
            tc = -(tc * r2) / ((2.0 * i - 1.0) * (2.0 * i));
            s = s + ts;
            c = c + tc;
            if ts.hi.abs() < 1e-34 && tc.hi.abs() < 1e-34 {
                break;
            }
        }
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let p = self.hi * b.hi;
        let e = self.hi.mul_add(b.hi, -p) + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, b: f64) -> Dd {
        self * Dd::new(b)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    fn div(self, b: f64) -> Dd {
        self / Dd::new(b)
    }
}

type V3 = [Dd; 3];

fn v3(p: &Vec3) -> V3 {
    [Dd::new(p.x), Dd::new(p.y), Dd::new(p.z)]
}

fn sub3(a: &V3, b: &V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: &V3, b: &V3) -> Dd {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: &V3, b: &V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn integer_exponent(x: f64, name: &str) -> Result<u32> {
    if x >= 0.0 && x.fract() == 0.0 && x <= 64.0 {
        Ok(x as u32)
    } else {
        Err(Error::Config(format!(
            "reference radar loss needs a small non-negative integer {name}, got {x}"
        )))
    }
}

/// Radar loss value computed independently of the `f64` implementation: direct
/// geometry in double-double and per-facet tones generated from
/// double-double phases.
pub fn radar_loss_reference(
    mesh: &TriangleMesh,
    positions: &[Vec3],
    observed: &IfSignal,
    scan: &ApertureScan,
    fmcw: &FmcwConfig,
    params: &ReflectionParams,
    elements: &[(usize, usize)],
) -> Result<Dd> {
    observed.check_against(scan, fmcw)?;
    if positions.len() != mesh.vertex_count() {
        return Err(Error::Dimension("position count differs from vertex count".into()));
    }
    let m = integer_exponent(params.specular_exponent, "specular exponent")?;
    let p = integer_exponent(params.spreading_exponent, "spreading exponent")?;
    let ns = fmcw.samples;
    let slope = Dd::new(fmcw.bandwidth_hz) / fmcw.chirp_duration_s;
    let dt = Dd::new(fmcw.chirp_duration_s) / ns as f64;
    let fc = Dd::new(fmcw.carrier_frequency_hz);
    let two_over_c = Dd::new(2.0) / SPEED_OF_LIGHT;
    let kappa = Dd::new(params.visibility_sharpness);
    let rho = Dd::new(params.reflectivity);

    let faces = mesh.faces();
    let tri: Vec<[V3; 3]> = faces
        .iter()
        .map(|f| f.map(|v| v3(&positions[v as usize])))
        .collect();

    let mut total = Dd::ZERO;
    let mut pred = vec![(Dd::ZERO, Dd::ZERO); ns];
    for &(v, e) in elements {
        let x = v3(&scan.views[v].element(e));
        pred.iter_mut().for_each(|z| *z = (Dd::ZERO, Dd::ZERO));
        for t in &tri {
            let c: V3 = std::array::from_fn(|a| (t[0][a] + t[1][a] + t[2][a]) / 3.0);
            let h = cross3(&sub3(&t[1], &t[0]), &sub3(&t[2], &t[0]));
            let len = dot3(&h, &h).sqrt();
            if len.hi == 0.0 {
                continue;
            }
            let d = sub3(&x, &c);
            let range = dot3(&d, &d).sqrt();
            let cos = dot3(&h, &d) / (len * range);
            if cos.hi <= 0.0 {
                continue;
            }
            let amp = rho * (len / 2.0) * cos.powi(m) / range.powi(p);
            let vis = Dd::ONE / (Dd::ONE + (-(kappa * cos)).exp());
            let w = vis * amp;
            let tau = range * two_over_c;
            let theta0 = TAU * (fc * tau - slope * tau * tau / 2.0);
            let delta = TAU * slope * tau * dt;
            let (s0, c0) = theta0.sin_cos();
            let (sd, cd) = delta.sin_cos();
            let (mut re, mut im) = (w * c0, w * s0);
            for z in pred.iter_mut() {
                z.0 = z.0 + re;
                z.1 = z.1 + im;
                let nre = re * cd - im * sd;
                im = re * sd + im * cd;
                re = nre;
            }
        }
        for (z, o) in pred.iter().zip(observed.element(v, e)) {
            total = total + (z.0 - Dd::new(o.re)).abs() + (z.1 - Dd::new(o.im)).abs();
        }
    }
    Ok(total / (elements.len() * ns) as f64)
}

/// Central differences of a double-double valued function against the
/// analytic `gradient`, on `samples` random coordinates.
pub fn finite_diff_check_dd<F>(
    gradient: &[Vec3],
    value: F,
    positions: &[Vec3],
    eps: f64,
    samples: usize,
    seed: u64,
) -> Result<FdReport>
where
    F: Fn(&[Vec3]) -> Result<Dd>,
{
    let coords = 3 * positions.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = FdReport {
        max_rel_error: 0.0,
        worst: None,
        analytic: 0.0,
        numeric: 0.0,
        checked: 0,
    };
    let mut work = positions.to_vec();
    for c in sample(&mut rng, coords, samples.min(coords)).iter() {
        let (v, a) = (c / 3, c % 3);
        let orig = work[v][a];
        work[v][a] = orig + eps;
        let up = value(&work)?;
        work[v][a] = orig - eps;
        let down = value(&work)?;
        work[v][a] = orig;
        // The perturbed coordinates are exactly representable, so the actual
        // step is (orig + eps) - (orig - eps) computed exactly.
        let step = (Dd::new(orig + eps) - Dd::new(orig - eps)).to_f64();
        let numeric = (up - down).to_f64() / step;
        let analytic = gradient[v][a];
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

    #[test]
    fn arithmetic_beats_f64() {
        let third = Dd::ONE / 3.0;
        let back = third * 3.0 - Dd::ONE;
        assert!(back.to_f64().abs() < 1e-31);
        let r = Dd::new(2.0).sqrt();
        assert!((r * r - Dd::new(2.0)).to_f64().abs() < 1e-31);
    }

    #[test]
    fn transcendental_functions_agree_with_f64() {
        for &x in &[0.0, 0.3, -1.7, 3.0, 100.25, 1234.5678] {
            let (s, c) = Dd::new(x).sin_cos();
            assert!((s.to_f64() - x.sin()).abs() < 1e-13, "sin {x}");
            assert!((c.to_f64() - x.cos()).abs() < 1e-13, "cos {x}");
            assert!(((s * s + c * c) - Dd::ONE).to_f64().abs() < 1e-30);
        }
        for &x in &[-10.0, -0.5, 0.0, 0.7, 9.9] {
            let e = Dd::new(x).exp();
            assert!((e.to_f64() / x.exp() - 1.0).abs() < 1e-15);
            let inv = Dd::new(-x).exp();
            assert!((e * inv - Dd::ONE).to_f64().abs() < 1e-30);
        }
    }
}
