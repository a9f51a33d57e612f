//! Shared fixtures for the benchmarks.

use echomesh::mesh::{make_ellipsoid, TriangleMesh};
use echomesh::radar::{ApertureScan, FmcwConfig};
use echomesh::sar::GridSpec;
use echomesh::Vec3;

pub fn scene(level: u32) -> TriangleMesh {
    make_ellipsoid(level, [0.05, 0.04, 0.03], Vec3::zeros()).expect("valid ellipsoid")
}

pub fn scan(n: usize) -> (FmcwConfig, ApertureScan) {
    let fmcw = FmcwConfig::default();
    let scan = ApertureScan::orthogonal(Vec3::zeros(), 0.25, n, n, fmcw.wavelength() / 2.0);
    (fmcw, scan)
}

pub fn grid(n: usize) -> GridSpec {
    GridSpec::cube(Vec3::zeros(), 0.08, n)
}
