use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::mesh::TriangleMesh;
use crate::sar::GridSpec;

/// Boolean voxel grid, x-fastest like [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub grid: GridSpec,
    pub data: Vec<bool>,
}

impl OccupancyGrid {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn volume(&self) -> f64 {
        self.count() as f64 * self.grid.spacing.powi(3)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.data[self.grid.index(i, j, k)]
    }
}

/// Edge function of the directed edge `a -> b` at `p` in the (y, z) plane,
/// made nonzero by perturbing `p` along `(eps, eps^2)`.
fn edge_sign(a: &Vec3, b: &Vec3, py: f64, pz: f64) -> f64 {
    let (dy, dz) = (b.y - a.y, b.z - a.z);
    let e = dy * (pz - a.z) - dz * (py - a.y);
    if e != 0.0 {
        e.signum()
    } else if dz != 0.0 {
        -dz.signum()
    } else {
        dy.signum()
    }
}

/// Whether the (y, z) point lies in the projection of triangle `tri`. Each
/// edge is evaluated in a canonical vertex order so the two faces sharing it
/// see exactly opposite signs, which counts a crossing on a shared edge or
/// vertex exactly once.
fn covers(ids: [u32; 3], tri: &[Vec3; 3], py: f64, pz: f64) -> bool {
    let mut signs = [0.0; 3];
    for k in 0..3 {
        let (i, j) = (k, (k + 1) % 3);
        signs[k] = if ids[i] < ids[j] {
            edge_sign(&tri[i], &tri[j], py, pz)
        } else {
            -edge_sign(&tri[j], &tri[i], py, pz)
        };
    }
    signs[0] == signs[1] && signs[1] == signs[2] && signs[0] != 0.0
}

/// Parity voxelization: a voxel center is inside iff a ray from it toward -x
/// crosses the surface an odd number of times.
pub fn voxelize(mesh: &TriangleMesh, grid: &GridSpec) -> Result<OccupancyGrid> {
    grid.validate()?;
    if !mesh.is_closed() {
        return Err(Error::InvalidMesh("voxelization needs a closed mesh; parity is undefined".into()));
    }
    if mesh.vertex_count() > 0 {
        let b = mesh.bounds();
        let g = grid.bounds();
        let margin = grid.spacing;
        for a in 0..3 {
            if b.min[a] < g.min[a] + margin || b.max[a] > g.max[a] - margin {
                return Err(Error::OutOfRange(format!(
                    "grid does not enclose the mesh with a one-voxel margin on axis {a}"
                )));
            }
        }
    }
    let [nx, ny, nz] = grid.dims;
    let s = grid.spacing;
    let mut hits: Vec<Vec<f64>> = vec![Vec::new(); ny * nz];
    for (fi, f) in mesh.faces().iter().enumerate() {
        let tri = mesh.triangle(fi);
        let n = (tri[1] - tri[0]).cross(&(tri[2] - tri[0]));
        if n.x == 0.0 {
            continue;
        }
        let lo_y = tri.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        let hi_y = tri.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
        let lo_z = tri.iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
        let hi_z = tri.iter().map(|p| p.z).fold(f64::NEG_INFINITY, f64::max);
        let j0 = (((lo_y - grid.origin[1]) / s).floor().max(0.0)) as usize;
        let j1 = (((hi_y - grid.origin[1]) / s).ceil().max(0.0) as usize).min(ny - 1);
        let k0 = (((lo_z - grid.origin[2]) / s).floor().max(0.0)) as usize;
        let k1 = (((hi_z - grid.origin[2]) / s).ceil().max(0.0) as usize).min(nz - 1);
        for k in k0..=k1 {
            let pz = grid.origin[2] + k as f64 * s;
            for j in j0..=j1 {
                let py = grid.origin[1] + j as f64 * s;
                if covers(*f, &tri, py, pz) {
                    // Plane n . (p - a) = 0 solved for x.
                    let x = tri[0].x - (n.y * (py - tri[0].y) + n.z * (pz - tri[0].z)) / n.x;
                    hits[j + ny * k].push(x);
                }
            }
        }
    }
    let mut data = vec![false; grid.voxel_count()];
    for k in 0..nz {
        for j in 0..ny {
            let row = &mut hits[j + ny * k];
            if !row.len().is_multiple_of(2) {
                log::warn!("odd crossing count in voxel row ({j}, {k}); mesh may not be watertight");
            }
            row.sort_by(f64::total_cmp);
            let mut h = 0;
            for i in 0..nx {
                let x = grid.origin[0] + i as f64 * s;
                while h < row.len() && row[h] < x {
                    h += 1;
                }
                data[grid.index(i, j, k)] = h % 2 == 1;
            }
        }
    }
    Ok(OccupancyGrid { grid: *grid, data })
}

/// `(dice, jaccard)` of two occupancy grids on the same lattice. Two empty
/// grids count as a perfect match.
pub fn dice_jaccard(a: &OccupancyGrid, b: &OccupancyGrid) -> Result<(f64, f64)> {
    if a.grid != b.grid {
        return Err(Error::Dimension("occupancy grids use different lattices".into()));
    }
    let (mut inter, mut na, mut nb) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.data.iter().zip(&b.data) {
        inter += (x && y) as usize;
        na += x as usize;
        nb += y as usize;
    }
    if na + nb == 0 {
        log::warn!("both occupancy grids are empty; reporting dice = jaccard = 1");
        return Ok((1.0, 1.0));
    }
    let union = na + nb - inter;
    Ok((2.0 * inter as f64 / (na + nb) as f64, inter as f64 / union as f64))
}
