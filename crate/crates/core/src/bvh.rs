//! Bounding-volume hierarchy over indexed primitives.
//!
//! The tree only knows primitive boxes; exact primitive tests are supplied by
//! the caller as closures, so the same structure serves ray occlusion,
//! closest-point queries and broad-phase overlap.

use crate::geometry::{Aabb, Vec3};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    // Leaf: `start..start + count` into `order`. Inner: children at `left`, `left + 1`.
    start: u32,
    count: u32,
    left: u32,
}

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
}

impl Bvh {
    pub fn build(boxes: &[Aabb]) -> Self {
        let mut order: Vec<u32> = (0..boxes.len() as u32).collect();
        let centers: Vec<Vec3> = boxes.iter().map(|b| b.center()).collect();
        let mut nodes = Vec::with_capacity(2 * boxes.len() / LEAF_SIZE + 1);
        if boxes.is_empty() {
            return Bvh { nodes, order };
        }
        nodes.push(Node {
            bounds: Aabb::empty(),
            start: 0,
            count: boxes.len() as u32,
            left: 0,
        });
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let (start, count) = (nodes[ni].start as usize, nodes[ni].count as usize);
            let slice = &mut order[start..start + count];
            let bounds = slice
                .iter()
                .fold(Aabb::empty(), |acc, &i| acc.merge(&boxes[i as usize]));
            nodes[ni].bounds = bounds;
            if count <= LEAF_SIZE {
                continue;
            }
            let cb = Aabb::from_points(slice.iter().map(|&i| &centers[i as usize]));
            let ext = cb.extent();
            let axis = if ext.x >= ext.y && ext.x >= ext.z {
                0
            } else if ext.y >= ext.z {
                1
            } else {
                2
            };
            if ext[axis] <= 0.0 {
                continue;
            }
            let mid = count / 2;
            slice.select_nth_unstable_by(mid, |&a, &b| {
                centers[a as usize][axis]
                    .total_cmp(&centers[b as usize][axis])
                    .then(a.cmp(&b))
            });
            let left = nodes.len();
            nodes.push(Node {
                bounds: Aabb::empty(),
                start: start as u32,
                count: mid as u32,
                left: 0,
            });
            nodes.push(Node {
                bounds: Aabb::empty(),
                start: (start + mid) as u32,
                count: (count - mid) as u32,
                left: 0,
            });
            nodes[ni].left = left as u32;
            nodes[ni].count = 0;
            stack.push(left);
            stack.push(left + 1);
        }
        Bvh { nodes, order }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// True if `hit(i)` reports a hit for any primitive whose box the ray
    /// `origin + t * dir`, `t` in `(t_min, t_max)`, passes through.
    pub fn any_hit(
        &self,
        origin: &Vec3,
        dir: &Vec3,
        t_min: f64,
        t_max: f64,
        mut hit: impl FnMut(usize) -> bool,
    ) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut stack = vec![0u32];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if !node.bounds.ray_hit(origin, &inv, t_min, t_max) {
                continue;
            }
            if node.count > 0 {
                let s = node.start as usize;
                for &p in &self.order[s..s + node.count as usize] {
                    if hit(p as usize) {
                        return true;
                    }
                }
            } else {
                stack.push(node.left);
                stack.push(node.left + 1);
            }
        }
        false
    }

    /// Primitive minimizing `dist2(i)` (a squared distance consistent with the
    /// boxes). Ties resolve to the lowest index.
    pub fn nearest(&self, p: &Vec3, mut dist2: impl FnMut(usize) -> f64) -> Option<(usize, f64)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        let mut stack = vec![(0u32, self.nodes[0].bounds.distance_squared(p))];
        while let Some((ni, bound)) = stack.pop() {
            if let Some((_, bd)) = best {
                if bound > bd {
                    continue;
                }
            }
            let node = &self.nodes[ni as usize];
            if node.count > 0 {
                let s = node.start as usize;
                for &pi in &self.order[s..s + node.count as usize] {
                    let d = dist2(pi as usize);
                    let better = match best {
                        None => true,
                        Some((bi, bd)) => d < bd || (d == bd && (pi as usize) < bi),
                    };
                    if better {
                        best = Some((pi as usize, d));
                    }
                }
            } else {
                let l = node.left;
                let dl = self.nodes[l as usize].bounds.distance_squared(p);
                let dr = self.nodes[l as usize + 1].bounds.distance_squared(p);
                // Visit the closer child first (pushed last).
                if dl <= dr {
                    stack.push((l + 1, dr));
                    stack.push((l, dl));
                } else {
                    stack.push((l, dl));
                    stack.push((l + 1, dr));
                }
            }
        }
        best
    }

    /// Calls `visit(i)` for every primitive whose box overlaps `query`.
    pub fn for_each_overlap(&self, query: &Aabb, mut visit: impl FnMut(usize)) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0u32];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if !node.bounds.overlaps(query) {
                continue;
            }
            if node.count > 0 {
                let s = node.start as usize;
                for &p in &self.order[s..s + node.count as usize] {
                    visit(p as usize);
                }
            } else {
                stack.push(node.left);
                stack.push(node.left + 1);
            }
        }
    }
}

/// Nearest-neighbour index over a fixed point set.
#[derive(Debug, Clone)]
pub struct PointIndex {
    points: Vec<Vec3>,
    bvh: Bvh,
}

impl PointIndex {
    pub fn new(points: &[Vec3]) -> Self {
        let boxes: Vec<Aabb> = points.iter().map(|p| Aabb { min: *p, max: *p }).collect();
        PointIndex {
            points: points.to_vec(),
            bvh: Bvh::build(&boxes),
        }
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Index and squared distance of the nearest point; ties go to the lowest index.
    pub fn nearest(&self, q: &Vec3) -> Option<(usize, f64)> {
        self.bvh
            .nearest(q, |i| (self.points[i] - q).norm_squared())
    }
}
