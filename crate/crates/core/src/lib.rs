#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bvh;
pub mod config;
pub mod error;
pub mod features;
pub mod geometry;
pub mod gradcheck;
pub mod io;
pub mod losses;
pub mod mesh;
pub mod pipeline;
pub mod metrics;
pub mod radar;
pub mod recon;
pub mod sar;

pub use error::{Error, Result};
pub use geometry::Vec3;
pub use mesh::{PointSet, TriangleMesh};
