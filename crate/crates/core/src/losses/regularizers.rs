use serde::{Deserialize, Serialize};

use super::LossValue;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::mesh::{uniform_laplacian, TriangleMesh, NO_FACE};

fn check_positions(mesh: &TriangleMesh, positions: &[Vec3]) -> Result<()> {
    if positions.len() != mesh.vertex_count() {
        return Err(Error::Dimension(format!(
            "{} positions for {} vertices",
            positions.len(),
            mesh.vertex_count()
        )));
    }
    Ok(())
}

/// `mean_i |delta_i|^2` over the umbrella Laplacian.
pub fn laplacian_loss(mesh: &TriangleMesh, positions: &[Vec3]) -> Result<LossValue> {
    let delta = uniform_laplacian(mesh, positions)?;
    let n = positions.len() as f64;
    let rings = mesh.topology().neighbors();
    let mut gradient: Vec<Vec3> = delta.iter().map(|d| -d * (2.0 / n)).collect();
    for (i, ring) in rings.iter().enumerate() {
        let share = delta[i] * (2.0 / (n * ring.len() as f64));
        for &j in ring {
            gradient[j as usize] += share;
        }
    }
    Ok(LossValue {
        value: delta.iter().map(|d| d.norm_squared()).sum::<f64>() / n,
        gradient,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EdgeLossKind {
    /// `mean (|e| - mean|e|)^2`, indifferent to overall scale.
    #[default]
    Variance,
    /// `mean |e|^2`.
    MeanSquared,
}

pub fn edge_length_loss(mesh: &TriangleMesh, positions: &[Vec3], kind: EdgeLossKind) -> Result<LossValue> {
    check_positions(mesh, positions)?;
    let edges = mesh.topology().edges();
    let mut gradient = vec![Vec3::zeros(); positions.len()];
    if edges.is_empty() {
        return Ok(LossValue { value: 0.0, gradient });
    }
    let ne = edges.len() as f64;
    let vecs: Vec<Vec3> = edges
        .iter()
        .map(|e| positions[e[0] as usize] - positions[e[1] as usize])
        .collect();
    let value = match kind {
        EdgeLossKind::Variance => {
            let lens: Vec<f64> = vecs.iter().map(|v| v.norm()).collect();
            let mean = lens.iter().sum::<f64>() / ne;
            let mut value = 0.0;
            for ((e, v), &l) in edges.iter().zip(&vecs).zip(&lens) {
                let dev = l - mean;
                value += dev * dev;
                // The mean's own derivative cancels: sum of deviations is zero.
                if l > 0.0 {
                    let g = v * (2.0 * dev / (ne * l));
                    gradient[e[0] as usize] += g;
                    gradient[e[1] as usize] -= g;
                }
            }
            value / ne
        }
        EdgeLossKind::MeanSquared => {
            let mut value = 0.0;
            for (e, v) in edges.iter().zip(&vecs) {
                value += v.norm_squared();
                let g = v * (2.0 / ne);
                gradient[e[0] as usize] += g;
                gradient[e[1] as usize] -= g;
            }
            value / ne
        }
    };
    Ok(LossValue { value, gradient })
}

/// Accumulates `dL/dc` for the face cross vector `c = (p1-p0) x (p2-p0)` into
/// the three vertex gradients.
#[inline]
pub(crate) fn scatter_cross_gradient(face: [u32; 3], p: &[Vec3; 3], g: &Vec3, out: &mut [Vec3]) {
    let e1 = p[1] - p[0];
    let e2 = p[2] - p[0];
    let g1 = e2.cross(g);
    let g2 = g.cross(&e1);
    out[face[1] as usize] += g1;
    out[face[2] as usize] += g2;
    out[face[0] as usize] -= g1 + g2;
}

/// `mean (1 - n_a . n_b)` over edges shared by two faces.
pub fn normal_consistency_loss(mesh: &TriangleMesh, positions: &[Vec3]) -> Result<LossValue> {
    check_positions(mesh, positions)?;
    let faces = mesh.faces();
    let tri = |f: usize| faces[f].map(|v| positions[v as usize]);
    let cross: Vec<Vec3> = (0..faces.len())
        .map(|f| {
            let [a, b, c] = tri(f);
            (b - a).cross(&(c - a))
        })
        .collect();
    let lens: Vec<f64> = cross.iter().map(|c| c.norm()).collect();
    let normals: Vec<Vec3> = cross
        .iter()
        .zip(&lens)
        .map(|(c, &l)| if l > 0.0 { c / l } else { Vec3::zeros() })
        .collect();

    let interior: Vec<[u32; 2]> = mesh
        .topology()
        .edge_faces()
        .iter()
        .copied()
        .filter(|f| f[1] != NO_FACE)
        .collect();
    let mut gradient = vec![Vec3::zeros(); positions.len()];
    if interior.is_empty() {
        return Ok(LossValue { value: 0.0, gradient });
    }
    let m = interior.len() as f64;
    let mut dn = vec![Vec3::zeros(); faces.len()];
    let mut value = 0.0;
    for [a, b] in &interior {
        let (a, b) = (*a as usize, *b as usize);
        value += 1.0 - normals[a].dot(&normals[b]);
        dn[a] -= normals[b] / m;
        dn[b] -= normals[a] / m;
    }
    for f in 0..faces.len() {
        if lens[f] == 0.0 {
            continue;
        }
        let n = normals[f];
        let g = (dn[f] - n * n.dot(&dn[f])) / lens[f];
        scatter_cross_gradient(faces[f], &tri(f), &g, &mut gradient);
    }
    Ok(LossValue {
        value: value / m,
        gradient,
    })
}
