//! Wavefront OBJ subset: `v` and `f` records, 1-based indices, lengths in
//! meters. Polygons are fan-triangulated on load; everything else is ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::TriangleMesh;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obj(&text, path)
}

pub fn parse_obj(text: &str, path: &Path) -> Result<TriangleMesh> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut verts = Vec::new();
    let mut faces = Vec::new();
    // (line, polygon) kept until all vertices are known, so range errors name the line.
    let mut polys: Vec<(usize, Vec<u32>)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .take(3)
                    .map(|t| t.parse::<f64>().map_err(|e| err(line_no, format!("bad coordinate {t:?}: {e}"))))
                    .collect::<Result<_>>()?;
                if c.len() != 3 {
                    return Err(err(line_no, "vertex needs three coordinates".into()));
                }
                if !c.iter().all(|x| x.is_finite()) {
                    return Err(err(line_no, "non-finite coordinate".into()));
                }
                verts.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let mut poly = Vec::new();
                for tok in it {
                    let idx = tok.split('/').next().unwrap_or("");
                    let k: i64 = idx
                        .parse()
                        .map_err(|e| err(line_no, format!("bad face index {tok:?}: {e}")))?;
                    if k <= 0 {
                        return Err(err(line_no, format!("face index {k} is not positive (OBJ is 1-based)")));
                    }
                    poly.push((k - 1) as u32);
                }
                if poly.len() < 3 {
                    return Err(err(line_no, "face needs at least three vertices".into()));
                }
                polys.push((line_no, poly));
            }
            _ => {}
        }
    }

    for (line_no, poly) in polys {
        if let Some(&bad) = poly.iter().find(|&&k| k as usize >= verts.len()) {
            return Err(err(
                line_no,
                format!("face index {} out of range ({} vertices)", bad + 1, verts.len()),
            ));
        }
        for k in 1..poly.len() - 1 {
            faces.push([poly[0], poly[k], poly[k + 1]]);
        }
    }
    TriangleMesh::new(verts, faces)
}

/// OBJ text for `mesh`. Coordinates use the shortest decimal form that parses
/// back to the same `f64`, so a save/load cycle is exact.
pub fn write_obj(mesh: &TriangleMesh) -> String {
    let mut s = String::with_capacity(mesh.vertex_count() * 48 + mesh.face_count() * 24);
    for v in mesh.vertices() {
        let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

pub fn save_mesh(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_obj(mesh)).map_err(|e| Error::io(path, e))
}
