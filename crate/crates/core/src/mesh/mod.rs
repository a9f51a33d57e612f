//! Indexed triangle meshes.
//!
//! A [`TriangleMesh`] pairs vertex positions with a shared, immutable
//! [`Topology`]. Deformation moves positions only, so optimizers rebuild the
//! geometric caches with [`TriangleMesh::with_positions`] while the edge and
//! adjacency tables are reused. Faces are wound counter-clockwise when seen
//! from outside; the right-hand normal points outward.

mod differential;
mod icosphere;
mod intersect;
mod obj;
mod sampling;
mod subdivide;

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{centroid, triangle_cross, Aabb, Vec3, DEGENERATE_AREA};

pub use differential::{uniform_laplacian, vertex_normals};
pub use icosphere::{make_ellipsoid, make_icosphere, MAX_ICOSPHERE_LEVEL};
pub use intersect::triangle_pair_intersect;
pub use obj::{load_mesh, parse_obj, save_mesh, write_obj};
pub use sampling::{sample_surface, sample_surface_with_origins, SampleOrigin};
pub use subdivide::loop_subdivide;

/// Marker for a missing face slot on a boundary edge.
pub const NO_FACE: u32 = u32::MAX;

/// Connectivity derived once from the face list.
#[derive(Debug, Clone)]
pub struct Topology {
    vertex_count: usize,
    faces: Vec<[u32; 3]>,
    edges: Vec<[u32; 2]>,
    edge_faces: Vec<[u32; 2]>,
    face_edges: Vec<[u32; 3]>,
    neighbors: Vec<Vec<u32>>,
}

impl Topology {
    pub fn new(vertex_count: usize, faces: Vec<[u32; 3]>) -> Result<Self> {
        for (fi, f) in faces.iter().enumerate() {
            if f.iter().any(|&v| v as usize >= vertex_count) {
                return Err(Error::InvalidMesh(format!(
                    "face {fi} {f:?} references a vertex >= {vertex_count}"
                )));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::InvalidMesh(format!("face {fi} {f:?} repeats a vertex")));
            }
        }

        let mut edge_ids: HashMap<[u32; 2], u32> = HashMap::with_capacity(faces.len() * 2);
        let mut keys: Vec<[u32; 2]> = faces
            .iter()
            .flat_map(|f| (0..3).map(move |k| sorted_edge(f[k], f[(k + 1) % 3])))
            .collect();
        keys.sort_unstable();
        keys.dedup();
        for (i, k) in keys.iter().enumerate() {
            edge_ids.insert(*k, i as u32);
        }

        let mut edge_faces = vec![[NO_FACE; 2]; keys.len()];
        let mut face_edges = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            let mut fe = [0u32; 3];
            for k in 0..3 {
                let key = sorted_edge(f[k], f[(k + 1) % 3]);
                let e = edge_ids[&key];
                fe[k] = e;
                let slot = &mut edge_faces[e as usize];
                if slot[0] == NO_FACE {
                    slot[0] = fi as u32;
                } else if slot[1] == NO_FACE {
                    slot[1] = fi as u32;
                } else {
                    return Err(Error::NonManifold(format!(
                        "edge {key:?} is shared by more than two faces"
                    )));
                }
            }
            face_edges.push(fe);
        }

        let mut neighbors = vec![Vec::new(); vertex_count];
        for e in &keys {
            neighbors[e[0] as usize].push(e[1]);
            neighbors[e[1] as usize].push(e[0]);
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }

        Ok(Topology {
            vertex_count,
            faces,
            edges: keys,
            edge_faces,
            face_edges,
            neighbors,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    /// Unique undirected edges, each stored as `[lo, hi]`, sorted.
    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    /// The one or two faces incident on each edge; a missing slot is [`NO_FACE`].
    pub fn edge_faces(&self) -> &[[u32; 2]] {
        &self.edge_faces
    }

    /// Edge ids of each face, in the order (v0v1, v1v2, v2v0).
    pub fn face_edges(&self) -> &[[u32; 3]] {
        &self.face_edges
    }

    /// Sorted one-ring of each vertex.
    pub fn neighbors(&self) -> &[Vec<u32>] {
        &self.neighbors
    }

    pub fn is_closed(&self) -> bool {
        self.edge_faces.iter().all(|ef| ef[1] != NO_FACE)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// Faces incident on each vertex.
    pub fn vertex_faces(&self) -> Vec<Vec<u32>> {
        let mut vf = vec![Vec::new(); self.vertex_count];
        for (fi, f) in self.faces.iter().enumerate() {
            for &v in f {
                vf[v as usize].push(fi as u32);
            }
        }
        vf
    }
}

#[inline]
fn sorted_edge(a: u32, b: u32) -> [u32; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Triangle surface with cached per-face geometry.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    topology: Arc<Topology>,
    face_normals: Vec<Vec3>,
    face_areas: Vec<f64>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<Self> {
        let topology = Arc::new(Topology::new(vertices.len(), faces)?);
        Self::from_topology(topology, vertices)
    }

    pub fn from_topology(topology: Arc<Topology>, vertices: Vec<Vec3>) -> Result<Self> {
        if vertices.len() != topology.vertex_count {
            return Err(Error::Dimension(format!(
                "{} positions for a topology with {} vertices",
                vertices.len(),
                topology.vertex_count
            )));
        }
        if let Some(i) = vertices.iter().position(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidMesh(format!("vertex {i} is not finite")));
        }
        let mut face_normals = Vec::with_capacity(topology.faces.len());
        let mut face_areas = Vec::with_capacity(topology.faces.len());
        for f in &topology.faces {
            let c = triangle_cross(
                &vertices[f[0] as usize],
                &vertices[f[1] as usize],
                &vertices[f[2] as usize],
            );
            let len = c.norm();
            let area = 0.5 * len;
            face_areas.push(area);
            face_normals.push(if area > DEGENERATE_AREA { c / len } else { Vec3::zeros() });
        }
        Ok(TriangleMesh {
            vertices,
            topology,
            face_normals,
            face_areas,
        })
    }

    /// Same connectivity, new vertex positions.
    pub fn with_positions(&self, positions: Vec<Vec3>) -> Result<Self> {
        Self::from_topology(Arc::clone(&self.topology), positions)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.topology.faces
    }

    pub fn topology(&self) -> &Arc<Topology> {
        &self.topology
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.topology.faces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.topology.edges.len()
    }

    /// Unit face normals; zero for degenerate faces.
    pub fn face_normals(&self) -> &[Vec3] {
        &self.face_normals
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    pub fn total_area(&self) -> f64 {
        self.face_areas.iter().sum()
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let f = self.topology.faces[face];
        [
            self.vertices[f[0] as usize],
            self.vertices[f[1] as usize],
            self.vertices[f[2] as usize],
        ]
    }

    pub fn face_centroid(&self, face: usize) -> Vec3 {
        let [a, b, c] = self.triangle(face);
        centroid(&a, &b, &c)
    }

    pub fn face_bounds(&self) -> Vec<Aabb> {
        (0..self.face_count())
            .map(|f| Aabb::from_points(self.triangle(f).iter()))
            .collect()
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter())
    }

    pub fn is_closed(&self) -> bool {
        self.topology.is_closed()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.topology.euler_characteristic()
    }

    pub fn mean_edge_length(&self) -> f64 {
        let edges = self.topology.edges();
        if edges.is_empty() {
            return 0.0;
        }
        edges
            .iter()
            .map(|e| (self.vertices[e[0] as usize] - self.vertices[e[1] as usize]).norm())
            .sum::<f64>()
            / edges.len() as f64
    }

    /// Apply `f` to every vertex, keeping connectivity.
    pub fn map_vertices(&self, f: impl Fn(&Vec3) -> Vec3) -> Result<Self> {
        self.with_positions(self.vertices.iter().map(f).collect())
    }

    /// True if faces `a` and `b` share at least one vertex.
    pub fn faces_share_vertex(&self, a: usize, b: usize) -> bool {
        let fa = self.topology.faces[a];
        let fb = self.topology.faces[b];
        fa.iter().any(|v| fb.contains(v))
    }
}

/// Points sampled from a surface, optionally with unit normals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointSet {
    pub points: Vec<Vec3>,
    pub normals: Option<Vec<Vec3>>,
}

impl PointSet {
    pub fn new(points: Vec<Vec3>) -> Self {
        PointSet {
            points,
            normals: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
pub(crate) mod test_meshes {
    use super::*;
    use crate::geometry::vec3;

    /// Axis-aligned cube `[-h, h]^3` with outward CCW faces.
    pub fn cube(h: f64) -> TriangleMesh {
        let v = (0..8)
            .map(|i| {
                vec3(
                    if i & 1 != 0 { h } else { -h },
                    if i & 2 != 0 { h } else { -h },
                    if i & 4 != 0 { h } else { -h },
                )
            })
            .collect();
        let f = vec![
            [0, 2, 1], [1, 2, 3], // -z
            [4, 5, 6], [5, 7, 6], // +z
            [0, 1, 4], [1, 5, 4], // -y
            [2, 6, 3], [3, 6, 7], // +y
            [0, 4, 2], [2, 4, 6], // -x
            [1, 3, 5], [3, 7, 5], // +x
        ];
        TriangleMesh::new(v, f).unwrap()
    }

    /// Flat `n x n` quad grid in the z = 0 plane, each quad split along the same diagonal.
    pub fn flat_grid(n: usize, spacing: f64) -> TriangleMesh {
        let mut v = Vec::new();
        for j in 0..=n {
            for i in 0..=n {
                v.push(vec3(i as f64 * spacing, j as f64 * spacing, 0.0));
            }
        }
        let id = |i: usize, j: usize| (j * (n + 1) + i) as u32;
        let mut f = Vec::new();
        for j in 0..n {
            for i in 0..n {
                f.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                f.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        TriangleMesh::new(v, f).unwrap()
    }
}
