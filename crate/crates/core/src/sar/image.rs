use super::grid::{aligned_axis, ReflectivityVolume};
use crate::error::{Error, Result};
use crate::features::{OrthoCamera, Raster};

/// Max-normalized 2D view image with the camera that maps world points to its
/// pixel coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SarImage {
    pub view_id: usize,
    pub camera: OrthoCamera,
    pub image: Raster,
}

impl SarImage {
    pub fn pixel_spacing(&self) -> f64 {
        1.0 / self.camera.scale
    }

    /// In-plane coordinates (along camera rows 0 and 1) of pixel `(0, 0)`.
    pub fn plane_origin(&self) -> [f64; 2] {
        let c = &self.camera;
        [
            -c.principal_point[0] / c.scale - c.translation[0],
            -c.principal_point[1] / c.scale - c.translation[1],
        ]
    }
}

/// Maximum-intensity projection of `volume` along `camera`'s depth axis,
/// scaled so the brightest pixel is 1.
pub fn project_view_image(volume: &ReflectivityVolume, camera: &OrthoCamera) -> Result<SarImage> {
    camera.validate()?;
    let g = &volume.grid;
    let mismatch = || Error::Dimension(format!("camera {} is not aligned with the volume grid", camera.view_id));
    let (a, _) = aligned_axis(&camera.axis(0)).ok_or_else(mismatch)?;
    let (b, _) = aligned_axis(&camera.axis(1)).ok_or_else(mismatch)?;
    if a == b {
        return Err(mismatch());
    }
    let (w, h) = (g.dims[a], g.dims[b]);
    // Pixel of voxel (i, j, k) is affine in the indices; evaluate it at the
    // origin and per-axis steps, and insist on integer results.
    let p0 = camera.project(&g.voxel_center(0, 0, 0));
    let steps: Vec<[f64; 2]> = (0..3)
        .map(|ax| {
            let mut idx = [0usize; 3];
            idx[ax] = 1;
            let p = camera.project(&g.voxel_center(idx[0], idx[1], idx[2]));
            [p[0] - p0[0], p[1] - p0[1]]
        })
        .collect();
    let snap = |x: f64| -> Result<i64> {
        let r = x.round();
        if (x - r).abs() > 1e-6 {
            return Err(mismatch());
        }
        Ok(r as i64)
    };
    let o = [snap(p0[0])?, snap(p0[1])?];
    let d: Vec<[i64; 2]> = steps
        .iter()
        .map(|s| Ok([snap(s[0])?, snap(s[1])?]))
        .collect::<Result<_>>()?;

    let mut img = vec![0.0f64; w * h];
    for k in 0..g.dims[2] {
        for j in 0..g.dims[1] {
            for i in 0..g.dims[0] {
                let (ii, jj, kk) = (i as i64, j as i64, k as i64);
                let u = o[0] + d[0][0] * ii + d[1][0] * jj + d[2][0] * kk;
                let v = o[1] + d[0][1] * ii + d[1][1] * jj + d[2][1] * kk;
                if u < 0 || v < 0 || u as usize >= w || v as usize >= h {
                    return Err(mismatch());
                }
                let px = &mut img[v as usize * w + u as usize];
                *px = px.max(volume.data[g.index(i, j, k)]);
            }
        }
    }
    let peak = img.iter().copied().fold(0.0, f64::max);
    if peak > 0.0 {
        img.iter_mut().for_each(|x| *x /= peak);
    } else {
        log::warn!("view {} volume is empty; image left at zero", volume.view_id);
    }
    Ok(SarImage {
        view_id: volume.view_id,
        camera: *camera,
        image: Raster::new(w, h, img),
    })
}

/// Multi-resolution stack of one view image; level 0 is the source.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePyramid {
    pub view_id: usize,
    /// Camera of level 0; level `l` uses `camera.at_level(l)`.
    pub camera: OrthoCamera,
    pub levels: Vec<Raster>,
}

impl ImagePyramid {
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }
}

/// 2x2 average pooling; output dims are `ceil(n / 2)` and edge blocks average
/// only the pixels they contain.
pub fn pool2(src: &Raster) -> Raster {
    let w = src.width.div_ceil(2);
    let h = src.height.div_ceil(2);
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mut sum = 0.0;
            let mut n = 0;
            for yy in 2 * y..(2 * y + 2).min(src.height) {
                for xx in 2 * x..(2 * x + 2).min(src.width) {
                    sum += src.get(xx, yy);
                    n += 1;
                }
            }
            out.push(sum / n as f64);
        }
    }
    Raster::new(w, h, out)
}

pub fn build_pyramid(image: &SarImage, levels: usize) -> Result<ImagePyramid> {
    if levels == 0 {
        return Err(Error::OutOfRange("pyramid needs at least one level".into()));
    }
    let need = 1usize << (levels - 1);
    if image.image.width < need || image.image.height < need {
        return Err(Error::OutOfRange(format!(
            "{}x{} image too small for {levels} pyramid levels",
            image.image.width, image.image.height
        )));
    }
    let mut out = vec![image.image.clone()];
    while out.len() < levels {
        let next = pool2(out.last().unwrap());
        out.push(next);
    }
    Ok(ImagePyramid {
        view_id: image.view_id,
        camera: image.camera,
        levels: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::radar::ApertureScan;
    use crate::sar::GridSpec;

    fn volume(n: usize, f: impl Fn(Vec3) -> f64) -> ReflectivityVolume {
        let grid = GridSpec::cube(Vec3::zeros(), 1.0, n);
        let mut data = vec![0.0; grid.voxel_count()];
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    data[grid.index(i, j, k)] = f(grid.voxel_center(i, j, k));
                }
            }
        }
        ReflectivityVolume { grid, view_id: 0, data }
    }

    fn cameras(grid: &GridSpec) -> Vec<OrthoCamera> {
        let scan = ApertureScan::orthogonal(grid.center(), 3.0, 2, 2, 0.01);
        scan.views.iter().map(|v| grid.camera_for_view(v).unwrap()).collect()
    }

    #[test]
    fn single_voxel_projects_to_single_pixel() {
        let mut vol = volume(8, |_| 0.0);
        let idx = [2usize, 5, 6];
        let at = vol.grid.index(idx[0], idx[1], idx[2]);
        vol.data[at] = 0.3;
        for cam in cameras(&vol.grid) {
            let img = project_view_image(&vol, &cam).unwrap();
            let u = cam.project(&vol.grid.voxel_center(idx[0], idx[1], idx[2]));
            let (x, y) = (u[0].round() as usize, u[1].round() as usize);
            assert_eq!(img.image.get(x, y), 1.0);
            assert_eq!(img.image.data.iter().filter(|&&v| v != 0.0).count(), 1);
        }
    }

    #[test]
    fn uniform_volume_gives_uniform_image() {
        let vol = volume(6, |_| 2.5);
        for cam in cameras(&vol.grid) {
            let img = project_view_image(&vol, &cam).unwrap();
            assert!(img.image.data.iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn shell_projects_to_disk_of_its_radius() {
        let r = 0.6;
        let n = 48;
        let spacing = 2.0 / n as f64;
        let vol = volume(n, |p| if (p.norm() - r).abs() < spacing { 1.0 } else { 0.0 });
        for cam in cameras(&vol.grid) {
            let img = project_view_image(&vol, &cam).unwrap();
            let c = cam.project(&Vec3::zeros());
            let mut extent = 0.0f64;
            for y in 0..n {
                for x in 0..n {
                    if img.image.get(x, y) > 0.0 {
                        extent = extent.max(((x as f64 - c[0]).powi(2) + (y as f64 - c[1]).powi(2)).sqrt());
                    }
                }
            }
            assert!((extent - r / spacing).abs() <= 1.0 + 1e-9, "{extent} vs {}", r / spacing);
        }
    }

    #[test]
    fn misaligned_camera_is_rejected() {
        let vol = volume(4, |_| 1.0);
        let mut cam = cameras(&vol.grid)[0];
        cam.rotation[0] = [0.0, 0.0, 1.0];
        cam.rotation[1] = [0.0, 1.0, 0.0];
        cam.rotation[2] = [-1.0, 0.0, 0.0];
        // Aligned but with half-pixel offset: not on integer pixels.
        cam.principal_point = [0.5, 0.0];
        assert!(project_view_image(&vol, &cam).is_err());
    }

    #[test]
    fn pyramid_pooling() {
        let cam = cameras(&GridSpec::cube(Vec3::zeros(), 1.0, 4))[2];
        let checker = Raster::new(4, 4, (0..16).map(|i| ((i % 4 + i / 4) % 2) as f64).collect());
        let img = SarImage { view_id: 2, camera: cam, image: checker };
        let p = build_pyramid(&img, 2).unwrap();
        assert_eq!(p.levels[0], img.image);
        assert!(p.levels[1].data.iter().all(|&v| v == 0.5));
        assert_eq!(build_pyramid(&img, 1).unwrap().levels.len(), 1);
        assert!(build_pyramid(&img, 4).is_err());

        let c = SarImage { view_id: 2, camera: cam, image: Raster::filled(4, 4, 0.7) };
        for l in build_pyramid(&c, 3).unwrap().levels {
            assert!(l.data.iter().all(|&v| v == 0.7));
        }
    }

    #[test]
    fn pooling_preserves_mean_and_ceil_dims() {
        let r = Raster::new(5, 3, (0..15).map(|i| i as f64 * 0.1).collect());
        let p = pool2(&r);
        assert_eq!((p.width, p.height), (3, 2));
        let even = Raster::new(6, 4, (0..24).map(|i| (i * 7 % 5) as f64).collect());
        assert!((pool2(&even).mean() - even.mean()).abs() < 1e-12);
    }
}
