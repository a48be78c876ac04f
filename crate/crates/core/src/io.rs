//! File formats: raw complex images (`CIMG0001`), real CSV grids, 8-bit PNG
//! magnitude images and masks.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use image::{GrayImage, ImageReader, Luma};
use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SamplingMask;
use crate::{ComplexImage, RealImage};

pub const RAW_MAGIC: &[u8; 8] = b"CIMG0001";

/// 8-byte magic, then little-endian `f64` (re, im) pairs in row-major
/// order. Images are square; the side length follows from the file size.
pub fn encode_raw(image: &ComplexImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 16 * image.len());
    out.extend_from_slice(RAW_MAGIC);
    for v in image.iter() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn decode_raw(bytes: &[u8], path: &Path) -> Result<ComplexImage> {
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    if bytes.len() < 8 || &bytes[..8] != RAW_MAGIC {
        return Err(bad("missing CIMG0001 header".into()));
    }
    let body = &bytes[8..];
    let count = body.len() / 16;
    let n = (count as f64).sqrt().round() as usize;
    if !body.len().is_multiple_of(16) || n * n != count {
        return Err(bad(format!(
            "{} payload bytes do not hold a square complex image",
            body.len()
        )));
    }
    let (r, c) = (n, n);
    let values = body
        .chunks_exact(16)
        .map(|ch| {
            let re = f64::from_le_bytes(ch[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(ch[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Array2::from_shape_vec((r, c), values).map_err(|e| bad(e.to_string()))
}

pub fn write_raw(path: &Path, image: &ComplexImage) -> Result<()> {
    fs::write(path, encode_raw(image)).map_err(|e| Error::io(path, e))
}

pub fn read_raw(path: &Path) -> Result<ComplexImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_raw(&bytes, path)
}

/// Comma-separated rows, full round-trip precision.
pub fn write_real_csv(path: &Path, a: &RealImage) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for row in a.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", line.join(",")).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_real_csv(path: &Path) -> Result<RealImage> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|e| bad(format!("{t:?}: {e}"))))
                .collect()
        })
        .collect::<Result<_>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(bad("ragged rows".into()));
    }
    Array2::from_shape_vec((rows.len(), cols), rows.concat()).map_err(|e| bad(e.to_string()))
}

/// 8-bit grayscale PNG, `0 ↦ 0` and `peak ↦ 255` (clamped). Row `i` of the
/// array becomes image row `i`.
pub fn write_png(path: &Path, a: &RealImage, peak: f64) -> Result<()> {
    let (r, c) = a.dim();
    let scale = if peak > 0.0 { 255.0 / peak } else { 0.0 };
    let img = GrayImage::from_fn(c as u32, r as u32, |x, y| {
        let v = a[[y as usize, x as usize]] * scale;
        Luma([v.round().clamp(0.0, 255.0) as u8])
    });
    img.save(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Magnitude PNG scaled to its own maximum.
pub fn write_magnitude_png(path: &Path, image: &ComplexImage) -> Result<()> {
    let mag = image.mapv(|v| v.norm());
    let peak = mag.iter().cloned().fold(0.0, f64::max);
    write_png(path, &mag, peak)
}

/// Grayscale PNG as values in `[0, 1]`.
pub fn read_png(path: &Path) -> Result<RealImage> {
    let img = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| Error::Image {
            path: path.to_path_buf(),
            source: e,
        })?
        .to_luma8();
    let (w, h) = img.dimensions();
    Ok(Array2::from_shape_fn((h as usize, w as usize), |(i, j)| {
        f64::from(img.get_pixel(j as u32, i as u32)[0]) / 255.0
    }))
}

fn is_png(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

/// Real image from PNG (scaled to `[0, 1]`), CSV, or raw (magnitude).
pub fn read_real_image(path: &Path) -> Result<RealImage> {
    if is_png(path) {
        read_png(path)
    } else if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        read_real_csv(path)
    } else {
        Ok(read_raw(path)?.mapv(|v| v.norm()))
    }
}

/// Mask from PNG (nonzero = sampled) or raw (nonzero magnitude = sampled).
/// Files store the mask in display order, DC in the middle.
pub fn read_mask(path: &Path) -> Result<SamplingMask> {
    let values = read_real_image(path)?;
    if values.nrows() != values.ncols() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: format!("mask must be square, got {:?}", values.dim()),
        });
    }
    Ok(SamplingMask::from_centered(values.mapv(|v| v > 0.0)))
}

/// Display-order PNG of a mask (0/255).
pub fn write_mask_png(path: &Path, mask: &SamplingMask) -> Result<()> {
    let centred = mask.to_centered().mapv(|b| if b { 1.0 } else { 0.0 });
    write_png(path, &centred, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_spiral_mask;

    #[test]
    fn raw_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.cimg");
        let a = Array2::from_shape_fn((3, 3), |(i, j)| Complex64::new(i as f64 - 0.5, 1e-300 * j as f64));
        write_raw(&path, &a).unwrap();
        assert_eq!(read_raw(&path).unwrap(), a);
        let bytes = fs::read(&path).unwrap();
        assert_eq!(&bytes[..8], b"CIMG0001");
        assert_eq!(bytes.len(), 8 + 16 * 9);
    }

    #[test]
    fn raw_rejects_garbage() {
        let p = Path::new("mem");
        assert!(decode_raw(b"NOTMAGIC........", p).is_err());
        let mut bytes = encode_raw(&Array2::zeros((2, 2)));
        bytes.pop();
        assert!(decode_raw(&bytes, p).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let a = Array2::from_shape_fn((3, 2), |(i, j)| 0.1 * i as f64 - std::f64::consts::PI * j as f64);
        write_real_csv(&path, &a).unwrap();
        assert_eq!(read_real_csv(&path).unwrap(), a);
    }

    #[test]
    fn mask_png_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mask.png");
        let m = make_spiral_mask(20, 0.3, 3, 2).unwrap();
        write_mask_png(&path, &m).unwrap();
        assert_eq!(read_mask(&path).unwrap(), m);
    }
}
