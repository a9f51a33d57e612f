use serde::{Deserialize, Serialize};

/// Row-major 2D scalar grid; `data[y * width + x]`, pixel centers at integer
/// coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Raster {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height, "raster data length");
        Raster { width, height, data }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Raster::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Bilinear sample at `(u, v)` with border clamping; returns the value and
    /// its exact derivative `[d/du, d/dv]`. Clamped coordinates have zero
    /// derivative.
    pub fn sample(&self, u: f64, v: f64) -> (f64, [f64; 2]) {
        let (x0, x1, fx, gx) = axis_cell(u, self.width);
        let (y0, y1, fy, gy) = axis_cell(v, self.height);
        let a = self.get(x0, y0);
        let b = self.get(x1, y0);
        let c = self.get(x0, y1);
        let d = self.get(x1, y1);
        let top = a + (b - a) * fx;
        let bottom = c + (d - c) * fx;
        let value = top + (bottom - top) * fy;
        let du = gx * ((b - a) * (1.0 - fy) + (d - c) * fy);
        let dv = gy * (bottom - top);
        (value, [du, dv])
    }
}

/// Lower/upper pixel, fraction, and 1.0 if the coordinate is inside the
/// sampling range (0.0 when clamped).
#[inline]
fn axis_cell(u: f64, n: usize) -> (usize, usize, f64, f64) {
    if n == 1 {
        return (0, 0, 0.0, 0.0);
    }
    let hi = (n - 1) as f64;
    let (c, inside) = if u < 0.0 {
        (0.0, 0.0)
    } else if u > hi {
        (hi, 0.0)
    } else if u.is_nan() {
        (0.0, 0.0)
    } else {
        (u, 1.0)
    };
    let i0 = (c.floor() as usize).min(n - 2);
    (i0, i0 + 1, c - i0 as f64, inside)
}

/// Bilinear border-clamped sample of `image` at pixel coordinate `u`.
pub fn grid_sample(image: &Raster, u: [f64; 2]) -> (f64, [f64; 2]) {
    image.sample(u[0], u[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_raster(w: usize, h: usize, seed: u64) -> Raster {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Raster::new(w, h, (0..w * h).map(|_| rng.gen()).collect())
    }

    #[test]
    fn interpolates_exactly_at_pixel_centers() {
        let r = random_raster(5, 4, 1);
        for y in 0..4 {
            for x in 0..5 {
                assert_eq!(grid_sample(&r, [x as f64, y as f64]).0, r.get(x, y));
            }
        }
        // Gradient at a center comes from the cell to its right/below.
        let (_, g) = grid_sample(&r, [1.0, 2.0]);
        assert!((g[0] - (r.get(2, 2) - r.get(1, 2))).abs() < 1e-15);
        assert!((g[1] - (r.get(1, 3) - r.get(1, 2))).abs() < 1e-15);
    }

    #[test]
    fn midpoint_is_average() {
        let r = Raster::new(2, 1, vec![2.0, 4.0]);
        assert_eq!(grid_sample(&r, [0.5, 0.0]).0, 3.0);
    }

    #[test]
    fn border_clamp_is_flat() {
        let r = random_raster(3, 3, 2);
        let (v, g) = grid_sample(&r, [-4.0, 1.0]);
        assert_eq!(v, r.get(0, 1));
        assert_eq!(g[0], 0.0);
        let (v, _) = grid_sample(&r, [9.0, 9.0]);
        assert_eq!(v, r.get(2, 2));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let r = random_raster(8, 6, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = 1e-6;
        for _ in 0..200 {
            let u: [f64; 2] = [rng.gen_range(0.0..7.0), rng.gen_range(0.0..5.0)];
            // Keep clear of cell boundaries where the derivative jumps.
            if u.iter().any(|c| (c - c.round()).abs() < 1e-4) {
                continue;
            }
            let (_, g) = grid_sample(&r, u);
            for a in 0..2 {
                let mut up = u;
                let mut dn = u;
                up[a] += h;
                dn[a] -= h;
                let fd = (grid_sample(&r, up).0 - grid_sample(&r, dn).0) / (2.0 * h);
                assert!((fd - g[a]).abs() < 1e-6, "{fd} vs {}", g[a]);
            }
        }
    }

    #[test]
    fn continuous_across_cell_boundaries() {
        let r = random_raster(6, 6, 5);
        for k in 1..5 {
            let x = k as f64;
            let a = grid_sample(&r, [x - 1e-12, 2.3]).0;
            let b = grid_sample(&r, [x + 1e-12, 2.3]).0;
            assert!((a - b).abs() < 1e-10);
        }
    }
}
