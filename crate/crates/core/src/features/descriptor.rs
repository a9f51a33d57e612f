use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::sar::ImagePyramid;

/// Cross-view pooled statistics of one scalar per view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewStats {
    pub max: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// Lowest view index attaining `max`.
    pub argmax: usize,
}

pub fn aggregate_views(values: &[f64]) -> Result<ViewStats> {
    if values.is_empty() {
        return Err(Error::Dimension("aggregate over an empty view set".into()));
    }
    let n = values.len() as f64;
    let mut argmax = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[argmax] {
            argmax = i;
        }
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min == values[argmax] {
        return Ok(ViewStats {
            max: min,
            mean: min,
            std: 0.0,
            argmax,
        });
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok(ViewStats {
        max: values[argmax],
        mean,
        std: var.sqrt(),
        argmax,
    })
}

/// Per-vertex descriptors `(max, mean, std)` for each selected level, in
/// ascending level order, with their derivatives with respect to the vertex
/// position.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexDescriptors {
    pub levels: Vec<usize>,
    /// `values[i * width + 3 * l + c]` for vertex `i`, level slot `l`, channel `c`.
    pub values: Vec<f64>,
    /// Same layout as `values`; the descriptor of vertex `i` depends only on `p_i`.
    pub gradients: Vec<Vec3>,
}

impl VertexDescriptors {
    pub fn width(&self) -> usize {
        3 * self.levels.len()
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn vertex_gradients(&self, i: usize) -> &[Vec3] {
        let w = self.width();
        &self.gradients[i * w..(i + 1) * w]
    }
}

pub fn vertex_descriptors(
    positions: &[Vec3],
    pyramids: &[ImagePyramid],
    levels: &[usize],
) -> Result<VertexDescriptors> {
    if pyramids.is_empty() {
        return Err(Error::Dimension("no views to sample".into()));
    }
    let mut levels = levels.to_vec();
    levels.sort_unstable();
    levels.dedup();
    for &l in &levels {
        for p in pyramids {
            if l >= p.levels.len() {
                return Err(Error::Dimension(format!(
                    "level {l} not present in view {} pyramid ({} levels)",
                    p.view_id,
                    p.levels.len()
                )));
            }
        }
    }
    let cameras: Vec<Vec<_>> = pyramids
        .iter()
        .map(|p| levels.iter().map(|&l| p.camera.at_level(l)).collect())
        .collect();
    let width = 3 * levels.len();
    let nv = pyramids.len();

    let per_vertex: Vec<(Vec<f64>, Vec<Vec3>)> = positions
        .par_iter()
        .map(|p| {
            let mut vals = Vec::with_capacity(width);
            let mut grads = Vec::with_capacity(width);
            let mut samples = vec![0.0; nv];
            let mut dsamples = vec![Vec3::zeros(); nv];
            for (slot, &l) in levels.iter().enumerate() {
                for (v, pyr) in pyramids.iter().enumerate() {
                    let cam = &cameras[v][slot];
                    let u = cam.project(p);
                    let (val, du) = pyr.levels[l].sample(u[0], u[1]);
                    let [ju, jv] = cam.jacobian();
                    samples[v] = val;
                    dsamples[v] = ju * du[0] + jv * du[1];
                }
                let s = aggregate_views(&samples).expect("non-empty views");
                let n = nv as f64;
                let dmean = dsamples.iter().sum::<Vec3>() / n;
                let dstd = if s.std > 0.0 {
                    samples
                        .iter()
                        .zip(&dsamples)
                        .map(|(x, dx)| dx * (x - s.mean))
                        .sum::<Vec3>()
                        / (n * s.std)
                } else {
                    Vec3::zeros()
                };
                vals.extend_from_slice(&[s.max, s.mean, s.std]);
                grads.extend_from_slice(&[dsamples[s.argmax], dmean, dstd]);
            }
            (vals, grads)
        })
        .collect();

    let mut values = Vec::with_capacity(positions.len() * width);
    let mut gradients = Vec::with_capacity(positions.len() * width);
    for (v, g) in per_vertex {
        values.extend(v);
        gradients.extend(g);
    }
    Ok(VertexDescriptors {
        levels,
        values,
        gradients,
    })
}
