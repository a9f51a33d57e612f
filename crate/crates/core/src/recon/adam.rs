use crate::geometry::Vec3;

/// Per-coordinate Adam state over a vertex array, with per-vertex gradient
/// norm clipping applied before the moment updates.
#[derive(Debug, Clone)]
pub struct Adam {
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub clip_norm: f64,
    m: Vec<Vec3>,
    v: Vec<Vec3>,
    t: i32,
}

impl Adam {
    pub fn new(n: usize, step_size: f64, beta1: f64, beta2: f64, epsilon: f64, clip_norm: f64) -> Self {
        Adam {
            step_size,
            beta1,
            beta2,
            epsilon,
            clip_norm,
            m: vec![Vec3::zeros(); n],
            v: vec![Vec3::zeros(); n],
            t: 0,
        }
    }

    /// Displacement for gradient `grad`; the caller adds it to the parameters.
    pub fn step(&mut self, grad: &[Vec3]) -> Vec<Vec3> {
        assert_eq!(grad.len(), self.m.len(), "gradient length changed");
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        let mut out = Vec::with_capacity(grad.len());
        for ((g, m), v) in grad.iter().zip(&mut self.m).zip(&mut self.v) {
            let norm = g.norm();
            let g = if self.clip_norm > 0.0 && norm > self.clip_norm {
                g * (self.clip_norm / norm)
            } else {
                *g
            };
            *m = *m * self.beta1 + g * (1.0 - self.beta1);
            *v = *v * self.beta2 + g.component_mul(&g) * (1.0 - self.beta2);
            let mut d = Vec3::zeros();
            for a in 0..3 {
                d[a] = -self.step_size * (m[a] / c1) / ((v[a] / c2).sqrt() + self.epsilon);
            }
            out.push(d);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vec3;

    #[test]
    fn first_step_moves_by_step_size_against_the_gradient() {
        let mut a = Adam::new(2, 1e-3, 0.9, 0.999, 1e-8, 0.0);
        let d = a.step(&[vec3(0.5, -2.0, 0.0), vec3(1e-3, 0.0, 7.0)]);
        assert!((d[0] - vec3(-1e-3, 1e-3, 0.0)).norm() < 1e-10);
        assert!((d[1] - vec3(-1e-3, 0.0, -1e-3)).norm() < 1e-8);
    }

    #[test]
    fn zero_gradient_is_zero_step() {
        let mut a = Adam::new(1, 1e-3, 0.9, 0.999, 1e-8, 1.0);
        for _ in 0..5 {
            assert_eq!(a.step(&[Vec3::zeros()])[0], Vec3::zeros());
        }
    }

    #[test]
    fn minimizes_a_quadratic() {
        let target = vec3(0.3, -0.2, 0.1);
        let mut x = Vec3::zeros();
        let mut a = Adam::new(1, 1e-2, 0.9, 0.999, 1e-8, 1.0);
        for _ in 0..2000 {
            x += a.step(&[(x - target) * 2.0])[0];
        }
        assert!((x - target).norm() < 1e-3);
    }

    #[test]
    fn clipping_bounds_the_gradient_norm() {
        let mut a = Adam::new(2, 1.0, 0.0, 0.5, 1e-8, 1.0);
        a.step(&[vec3(300.0, 400.0, 0.0), vec3(0.3, 0.4, 0.0)]);
        assert!((a.m[0] - vec3(0.6, 0.8, 0.0)).norm() < 1e-15);
        assert_eq!(a.m[1], vec3(0.3, 0.4, 0.0));
    }
}
