//! Binary artifact formats. Each file is one line of JSON header followed by
//! a little-endian `f32` payload:
//!
//! * `.sig`: IF signal, per view element-major then sample order, interleaved
//!   `(re, im)`.
//! * `.vol`: reflectivity volume, x-fastest.
//! * `.simg`: view image, row-major, with its camera in the header.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{OrthoCamera, Raster};
use crate::radar::{FmcwConfig, IfSignal, ViewSignal};
use crate::sar::{GridSpec, ReflectivityVolume, SarImage};

pub const FORMAT_VERSION: u32 = 1;
const ENDIANNESS: &str = "little";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignalView {
    view_id: usize,
    rows: usize,
    cols: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignalHeader {
    format: String,
    version: u32,
    endianness: String,
    samples: usize,
    fmcw: FmcwConfig,
    empty_scene: bool,
    views: Vec<SignalView>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VolumeHeader {
    format: String,
    version: u32,
    endianness: String,
    view_id: usize,
    grid: GridSpec,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImageHeader {
    format: String,
    version: u32,
    endianness: String,
    view_id: usize,
    width: usize,
    height: usize,
    camera: OrthoCamera,
}

fn write_file<H: Serialize>(path: &Path, header: &H, values: impl Iterator<Item = f64>) -> Result<()> {
    let mut buf = serde_json::to_vec(header).expect("header serializes");
    buf.push(b'\n');
    for v in values {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

fn read_file<H: DeserializeOwned>(path: &Path, kind: &'static str) -> Result<(H, Vec<f32>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |message: String| Error::Format {
        kind,
        path: path.to_path_buf(),
        message,
    };
    let split = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("missing header line".into()))?;
    let header: H = serde_json::from_slice(&bytes[..split]).map_err(|e| bad(format!("header: {e}")))?;
    let payload = &bytes[split + 1..];
    if payload.len() % 4 != 0 {
        return Err(bad(format!("payload of {} bytes is not a whole number of f32", payload.len())));
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok((header, values))
}

fn check_common(kind: &'static str, path: &Path, format: &str, version: u32, endianness: &str) -> Result<()> {
    let bad = |message: String| Error::Format {
        kind,
        path: path.to_path_buf(),
        message,
    };
    if format != kind {
        return Err(bad(format!("format tag {format:?}, expected {kind:?}")));
    }
    if version != FORMAT_VERSION {
        return Err(bad(format!("version {version} is not supported")));
    }
    if endianness != ENDIANNESS {
        return Err(bad(format!("endianness {endianness:?} is not supported")));
    }
    Ok(())
}

fn length_error(kind: &'static str, path: &Path, got: usize, want: usize) -> Error {
    Error::Format {
        kind,
        path: path.to_path_buf(),
        message: format!("payload holds {got} values, header implies {want}"),
    }
}

pub fn write_signal(signal: &IfSignal, path: impl AsRef<Path>) -> Result<()> {
    let header = SignalHeader {
        format: "signal".into(),
        version: FORMAT_VERSION,
        endianness: ENDIANNESS.into(),
        samples: signal.fmcw.samples,
        fmcw: signal.fmcw,
        empty_scene: signal.empty_scene,
        views: signal
            .views
            .iter()
            .map(|v| SignalView {
                view_id: v.view_id,
                rows: v.rows,
                cols: v.cols,
            })
            .collect(),
    };
    let values = signal.views.iter().flat_map(|v| v.data.iter().flat_map(|z| [z.re, z.im]));
    write_file(path.as_ref(), &header, values)
}

pub fn read_signal(path: impl AsRef<Path>) -> Result<IfSignal> {
    let path = path.as_ref();
    let (h, values): (SignalHeader, _) = read_file(path, "signal")?;
    check_common("signal", path, &h.format, h.version, &h.endianness)?;
    if h.samples != h.fmcw.samples {
        return Err(Error::Format {
            kind: "signal",
            path: path.to_path_buf(),
            message: "sample count disagrees with the waveform echo".into(),
        });
    }
    let want: usize = h.views.iter().map(|v| 2 * v.rows * v.cols * h.samples).sum();
    if values.len() != want {
        return Err(length_error("signal", path, values.len(), want));
    }
    let mut at = 0;
    let views = h
        .views
        .iter()
        .map(|v| {
            let n = v.rows * v.cols * h.samples;
            let data = values[at..at + 2 * n]
                .chunks_exact(2)
                .map(|c| Complex64::new(c[0] as f64, c[1] as f64))
                .collect();
            at += 2 * n;
            ViewSignal {
                view_id: v.view_id,
                rows: v.rows,
                cols: v.cols,
                data,
            }
        })
        .collect();
    Ok(IfSignal {
        fmcw: h.fmcw,
        views,
        empty_scene: h.empty_scene,
    })
}

pub fn write_volume(volume: &ReflectivityVolume, path: impl AsRef<Path>) -> Result<()> {
    let header = VolumeHeader {
        format: "volume".into(),
        version: FORMAT_VERSION,
        endianness: ENDIANNESS.into(),
        view_id: volume.view_id,
        grid: volume.grid,
    };
    write_file(path.as_ref(), &header, volume.data.iter().copied())
}

pub fn read_volume(path: impl AsRef<Path>) -> Result<ReflectivityVolume> {
    let path = path.as_ref();
    let (h, values): (VolumeHeader, _) = read_file(path, "volume")?;
    check_common("volume", path, &h.format, h.version, &h.endianness)?;
    h.grid.validate()?;
    if values.len() != h.grid.voxel_count() {
        return Err(length_error("volume", path, values.len(), h.grid.voxel_count()));
    }
    Ok(ReflectivityVolume {
        grid: h.grid,
        view_id: h.view_id,
        data: values.into_iter().map(f64::from).collect(),
    })
}

pub fn write_image(image: &SarImage, path: impl AsRef<Path>) -> Result<()> {
    let header = ImageHeader {
        format: "image".into(),
        version: FORMAT_VERSION,
        endianness: ENDIANNESS.into(),
        view_id: image.view_id,
        width: image.image.width,
        height: image.image.height,
        camera: image.camera,
    };
    write_file(path.as_ref(), &header, image.image.data.iter().copied())
}

pub fn read_image(path: impl AsRef<Path>) -> Result<SarImage> {
    let path = path.as_ref();
    let (h, values): (ImageHeader, _) = read_file(path, "image")?;
    check_common("image", path, &h.format, h.version, &h.endianness)?;
    h.camera.validate()?;
    if values.len() != h.width * h.height {
        return Err(length_error("image", path, values.len(), h.width * h.height));
    }
    Ok(SarImage {
        view_id: h.view_id,
        camera: h.camera,
        image: Raster::new(h.width, h.height, values.into_iter().map(f64::from).collect()),
    })
}

/// 8-bit grayscale PNG of `raster`, scaled so its maximum maps to 255.
pub fn export_png(raster: &Raster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let max = raster.max();
    let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
    let pixels: Vec<u8> = raster
        .data
        .iter()
        .map(|&v| (v.max(0.0) * scale).round().min(255.0) as u8)
        .collect();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut enc = png::Encoder::new(std::io::BufWriter::new(file), raster.width as u32, raster.height as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Eight);
    let to_io = |e: png::EncodingError| Error::io(path, std::io::Error::other(e));
    let mut w = enc.write_header().map_err(to_io)?;
    w.write_image_data(&pixels).map_err(to_io)?;
    w.finish().map_err(to_io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::radar::ApertureScan;

    fn signal() -> IfSignal {
        let fmcw = FmcwConfig {
            samples: 8,
            ..FmcwConfig::default()
        };
        let scan = ApertureScan::orthogonal(Vec3::zeros(), 0.3, 2, 3, 0.002);
        let mut s = IfSignal::zeros(&scan, &fmcw);
        for (v, view) in s.views.iter_mut().enumerate() {
            for (i, z) in view.data.iter_mut().enumerate() {
                *z = Complex64::new(i as f64 * 0.25, -(v as f64) - 0.5);
            }
        }
        s
    }

    #[test]
    fn signal_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.sig");
        let s = signal();
        write_signal(&s, &p).unwrap();
        assert_eq!(read_signal(&p).unwrap(), s);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.sig");
        write_signal(&signal(), &p).unwrap();
        let mut bytes = fs::read(&p).unwrap();
        bytes.truncate(bytes.len() - 8);
        fs::write(&p, bytes).unwrap();
        assert!(matches!(read_signal(&p), Err(Error::Format { .. })));
        fs::write(&p, b"not json\n").unwrap();
        assert!(matches!(read_signal(&p), Err(Error::Format { .. })));
    }

    #[test]
    fn volume_and_image_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = GridSpec::cube(Vec3::zeros(), 0.1, 4);
        let vol = ReflectivityVolume {
            grid,
            view_id: 2,
            data: (0..64).map(|i| i as f64 / 8.0).collect(),
        };
        let p = dir.path().join("v.vol");
        write_volume(&vol, &p).unwrap();
        assert_eq!(read_volume(&p).unwrap(), vol);

        let scan = ApertureScan::orthogonal(Vec3::zeros(), 0.3, 2, 2, 0.002);
        let img = SarImage {
            view_id: 1,
            camera: grid.camera_for_view(&scan.views[1]).unwrap(),
            image: Raster::new(4, 4, (0..16).map(|i| i as f64 / 16.0).collect()),
        };
        let p = dir.path().join("i.simg");
        write_image(&img, &p).unwrap();
        assert_eq!(read_image(&p).unwrap(), img);
        let png_path = dir.path().join("i.png");
        export_png(&img.image, &png_path).unwrap();
        assert!(fs::metadata(&png_path).unwrap().len() > 0);
        assert!(matches!(read_volume(dir.path().join("i.simg")), Err(Error::Format { .. })));
    }
}
