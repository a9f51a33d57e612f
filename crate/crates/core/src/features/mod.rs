//! Projection of mesh vertices into per-view image pyramids and cross-view
//! pooling of the sampled intensities.

mod camera;
mod descriptor;
mod raster;

pub use camera::OrthoCamera;
pub use descriptor::{aggregate_views, vertex_descriptors, VertexDescriptors, ViewStats};
pub use raster::{grid_sample, Raster};
