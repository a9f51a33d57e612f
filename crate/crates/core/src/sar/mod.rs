//! Range compression, matched-filter backprojection, view projection and
//! image pyramids.

mod backproject;
mod grid;
mod image;
mod range;

pub use backproject::{backproject_complex, backproject_volume, BackprojectionMethod, BackprojectionOptions};
pub use grid::{GridSpec, ReflectivityVolume};

pub use image::{build_pyramid, pool2, project_view_image, ImagePyramid, SarImage};
pub use range::{range_compress, RangeCompression, RangeProfiles, Window};
