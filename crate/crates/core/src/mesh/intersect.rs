//! Triangle/triangle overlap via the interval method: both triangles must
//! straddle each other's plane, and their intervals on the planes'
//! intersection line must overlap. Coplanar pairs fall back to a 2D test.

use crate::geometry::Vec3;

/// True iff the closed triangles `t1` and `t2` share at least one point.
/// Adjacency filtering is left to the caller.
pub fn triangle_pair_intersect(t1: &[Vec3; 3], t2: &[Vec3; 3]) -> bool {
    let n2 = (t2[1] - t2[0]).cross(&(t2[2] - t2[0]));
    let d2 = -n2.dot(&t2[0]);
    let du = [n2.dot(&t1[0]) + d2, n2.dot(&t1[1]) + d2, n2.dot(&t1[2]) + d2];
    if same_strict_sign(&du) {
        return false;
    }

    let n1 = (t1[1] - t1[0]).cross(&(t1[2] - t1[0]));
    let d1 = -n1.dot(&t1[0]);
    let dv = [n1.dot(&t2[0]) + d1, n1.dot(&t2[1]) + d1, n1.dot(&t2[2]) + d1];
    if same_strict_sign(&dv) {
        return false;
    }

    if du.iter().all(|&d| d == 0.0) || dv.iter().all(|&d| d == 0.0) {
        return coplanar_intersect(&n1, t1, t2);
    }

    let dir = n1.cross(&n2);
    let axis = dominant_axis(&dir);
    let pu = [t1[0][axis], t1[1][axis], t1[2][axis]];
    let pv = [t2[0][axis], t2[1][axis], t2[2][axis]];
    let (Some(a), Some(b)) = (interval(&pu, &du), interval(&pv, &dv)) else {
        return coplanar_intersect(&n1, t1, t2);
    };
    a.0 <= b.1 && b.0 <= a.1
}

fn same_strict_sign(d: &[f64; 3]) -> bool {
    (d[0] > 0.0 && d[1] > 0.0 && d[2] > 0.0) || (d[0] < 0.0 && d[1] < 0.0 && d[2] < 0.0)
}

fn dominant_axis(v: &Vec3) -> usize {
    let a = v.abs();
    if a.x >= a.y && a.x >= a.z {
        0
    } else if a.y >= a.z {
        1
    } else {
        2
    }
}

/// Interval where the triangle crosses the other plane, in projected coordinates.
fn interval(p: &[f64; 3], d: &[f64; 3]) -> Option<(f64, f64)> {
    let lone = if d[0] * d[1] > 0.0 {
        2
    } else if d[0] * d[2] > 0.0 {
        1
    } else if d[1] * d[2] > 0.0 || d[0] != 0.0 {
        0
    } else if d[1] != 0.0 {
        1
    } else if d[2] != 0.0 {
        2
    } else {
        return None;
    };
    let (b, c) = ((lone + 1) % 3, (lone + 2) % 3);
    let t1 = p[lone] + (p[b] - p[lone]) * d[lone] / (d[lone] - d[b]);
    let t2 = p[lone] + (p[c] - p[lone]) * d[lone] / (d[lone] - d[c]);
    Some(if t1 <= t2 { (t1, t2) } else { (t2, t1) })
}

fn coplanar_intersect(n: &Vec3, t1: &[Vec3; 3], t2: &[Vec3; 3]) -> bool {
    // Drop the dominant normal axis and work in 2D.
    let (i, j) = match dominant_axis(n) {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let a: [[f64; 2]; 3] = [0, 1, 2].map(|k| [t1[k][i], t1[k][j]]);
    let b: [[f64; 2]; 3] = [0, 1, 2].map(|k| [t2[k][i], t2[k][j]]);
    for e in 0..3 {
        for f in 0..3 {
            if segments_intersect_2d(a[e], a[(e + 1) % 3], b[f], b[(f + 1) % 3]) {
                return true;
            }
        }
    }
    point_in_triangle_2d(a[0], &b) || point_in_triangle_2d(b[0], &a)
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

fn segments_intersect_2d(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

fn point_in_triangle_2d(p: [f64; 2], t: &[[f64; 2]; 3]) -> bool {
    let s0 = orient(t[0], t[1], p);
    let s1 = orient(t[1], t[2], p);
    let s2 = orient(t[2], t[0], p);
    (s0 >= 0.0 && s1 >= 0.0 && s2 >= 0.0) || (s0 <= 0.0 && s1 <= 0.0 && s2 <= 0.0)
}
