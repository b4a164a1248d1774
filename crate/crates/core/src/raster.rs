//! Georeferenced rasters, world files, color conversion and resolution
//! reduction.

use std::fs;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::Scalar;

/// Affine map from pixel space to planar world meters.
///
/// Pixel space has its origin at the outer corner of pixel (0, 0); pixel
/// `(col, row)` covers `[col, col+1) x [row, row+1)` and its center sits
/// at `(col + 0.5, row + 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GeoTransform<T> {
    pub origin_x: T,
    pub origin_y: T,
    pub pixel_size_x: T,
    pub pixel_size_y: T,
    #[serde(default)]
    pub rotation_x: T,
    #[serde(default)]
    pub rotation_y: T,
}

impl<T: Scalar> GeoTransform<T> {
    /// North-up transform with square pixels of size `gsd`.
    pub fn north_up(origin_x: T, origin_y: T, gsd: T) -> Self {
        Self {
            origin_x,
            origin_y,
            pixel_size_x: gsd,
            pixel_size_y: -gsd,
            rotation_x: T::zero(),
            rotation_y: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pixel_size_x > T::zero()) || !(self.pixel_size_y.abs() > T::zero()) {
            return Err(Error::Parameter(format!(
                "pixel sizes must be nonzero with positive x: ({}, {})",
                self.pixel_size_x, self.pixel_size_y
            )));
        }
        Ok(())
    }

    /// Ground sample distance along x.
    pub fn gsd(&self) -> T {
        self.pixel_size_x.hypot(self.rotation_y)
    }

    fn det(&self) -> T {
        self.pixel_size_x * self.pixel_size_y - self.rotation_x * self.rotation_y
    }

    /// Map continuous corner-based pixel coordinates to world.
    #[inline]
    pub fn corner_to_world(&self, cx: T, cy: T) -> Point<T> {
        Point::new(
            self.origin_x + self.pixel_size_x * cx + self.rotation_x * cy,
            self.origin_y + self.rotation_y * cx + self.pixel_size_y * cy,
        )
    }

    /// World position of the center of pixel `(col, row)`.
    #[inline]
    pub fn pixel_to_world(&self, col: T, row: T) -> Point<T> {
        let h = T::lit(0.5);
        self.corner_to_world(col + h, row + h)
    }

    /// Inverse of [`corner_to_world`](Self::corner_to_world).
    pub fn world_to_corner(&self, p: Point<T>) -> Result<(T, T)> {
        let det = self.det();
        if det.abs() <= T::epsilon() * (self.pixel_size_x.abs() * self.pixel_size_y.abs()) {
            return Err(Error::SingularTransform(det.as_f64()));
        }
        let dx = p.x - self.origin_x;
        let dy = p.y - self.origin_y;
        let cx = (self.pixel_size_y * dx - self.rotation_x * dy) / det;
        let cy = (-self.rotation_y * dx + self.pixel_size_x * dy) / det;
        Ok((cx, cy))
    }

    /// Inverse of [`pixel_to_world`](Self::pixel_to_world): fractional
    /// pixel indices whose integer values denote pixel centers.
    pub fn world_to_pixel(&self, p: Point<T>) -> Result<(T, T)> {
        let (cx, cy) = self.world_to_corner(p)?;
        let h = T::lit(0.5);
        Ok((cx - h, cy - h))
    }

    /// Same transform with pixel sizes multiplied by `(fx, fy)`.
    pub fn scaled(&self, fx: T, fy: T) -> Self {
        Self {
            origin_x: self.origin_x,
            origin_y: self.origin_y,
            pixel_size_x: self.pixel_size_x * fx,
            pixel_size_y: self.pixel_size_y * fy,
            rotation_x: self.rotation_x * fy,
            rotation_y: self.rotation_y * fx,
        }
    }

    pub fn cast<U: Scalar>(&self) -> GeoTransform<U> {
        GeoTransform {
            origin_x: U::lit(self.origin_x.as_f64()),
            origin_y: U::lit(self.origin_y.as_f64()),
            pixel_size_x: U::lit(self.pixel_size_x.as_f64()),
            pixel_size_y: U::lit(self.pixel_size_y.as_f64()),
            rotation_x: U::lit(self.rotation_x.as_f64()),
            rotation_y: U::lit(self.rotation_y.as_f64()),
        }
    }
}

impl GeoTransform<f64> {
    /// Parse a six line ESRI-style world file (A, D, B, E, C, F). C and F
    /// locate the outer corner of the upper-left pixel.
    pub fn parse_world_file(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        if lines.len() < 6 {
            return Err(Error::WorldFileParse {
                line: lines.len() + 1,
                reason: format!("expected 6 values, found {}", lines.len()),
            });
        }
        let mut v = [0.0f64; 6];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = lines[i].parse::<f64>().map_err(|e| Error::WorldFileParse {
                line: i + 1,
                reason: format!("{:?}: {e}", lines[i]),
            })?;
            if !slot.is_finite() {
                return Err(Error::WorldFileParse {
                    line: i + 1,
                    reason: "non-finite value".into(),
                });
            }
        }
        if lines.len() > 6 {
            return Err(Error::WorldFileParse {
                line: 7,
                reason: "unexpected trailing content".into(),
            });
        }
        let t = Self {
            pixel_size_x: v[0],
            rotation_y: v[1],
            rotation_x: v[2],
            pixel_size_y: v[3],
            origin_x: v[4],
            origin_y: v[5],
        };
        t.validate().map_err(|e| Error::WorldFileParse {
            line: 1,
            reason: e.to_string(),
        })?;
        Ok(t)
    }

    pub fn to_world_file(&self) -> String {
        format!(
            "{}\n{}\n{}\n{}\n{}\n{}\n",
            self.pixel_size_x,
            self.rotation_y,
            self.rotation_x,
            self.pixel_size_y,
            self.origin_x,
            self.origin_y
        )
    }

    pub fn read_world_file(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::WorldFileNotFound(path.to_path_buf()));
        }
        Self::parse_world_file(&fs::read_to_string(path)?)
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width < 2 || height < 2 {
        return Err(Error::TooSmall { width, height, min: 2 });
    }
    Ok(())
}

/// 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    pub width: usize,
    pub height: usize,
    /// Interleaved RGB, row-major.
    pub data: Vec<u8>,
    pub transform: GeoTransform<f64>,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, data: Vec<u8>, transform: GeoTransform<f64>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height * 3 {
            return Err(Error::Dimension(format!(
                "expected {} samples, got {}",
                width * height * 3,
                data.len()
            )));
        }
        transform.validate()?;
        Ok(Self { width, height, data, transform })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        transform: GeoTransform<f64>,
        f: impl Fn(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for r in 0..height {
            for c in 0..width {
                data.extend_from_slice(&f(c, r));
            }
        }
        Self::new(width, height, data, transform)
    }

    #[inline]
    pub fn rgb(&self, col: usize, row: usize) -> [u8; 3] {
        let i = (row * self.width + col) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// World extent (width, height) in meters.
    pub fn extent(&self) -> (f64, f64) {
        world_extent(&self.transform, self.width, self.height)
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let buf: ImageBuffer<image::Rgb<u8>, _> =
            ImageBuffer::from_raw(self.width as u32, self.height as u32, self.data.clone())
                .expect("buffer size checked at construction");
        buf.save(path)?;
        Ok(())
    }
}

pub(crate) fn world_extent(t: &GeoTransform<f64>, width: usize, height: usize) -> (f64, f64) {
    let w = width as f64;
    let h = height as f64;
    let ex = (t.pixel_size_x * w).hypot(t.rotation_y * w);
    let ey = (t.pixel_size_y * h).hypot(t.rotation_x * h);
    (ex, ey)
}

/// Read an 8-bit RGB PNG or binary PPM plus its world file.
pub fn load_image(image_path: &Path, worldfile_path: &Path) -> Result<ImageGrid> {
    if !worldfile_path.exists() {
        return Err(Error::WorldFileNotFound(worldfile_path.to_path_buf()));
    }
    if !image_path.exists() {
        return Err(Error::ImageNotFound(image_path.to_path_buf()));
    }
    let transform = GeoTransform::read_world_file(worldfile_path)?;
    let img = image::ImageReader::open(image_path)?
        .with_guessed_format()?
        .decode()?;
    let rgb = match img {
        DynamicImage::ImageRgb8(b) => b,
        DynamicImage::ImageRgba8(_) | DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_) => {
            img.to_rgb8()
        }
        other => {
            return Err(Error::Format(format!(
                "{:?}; only 8-bit RGB is supported",
                other.color()
            )))
        }
    };
    let (w, h) = rgb.dimensions();
    ImageGrid::new(w as usize, h as usize, rgb.into_raw(), transform)
}

/// Locate the world file next to an image: `.pgw`/`.ppw`/`.wld` and the
/// generic `<ext>w` convention.
pub fn sidecar_world_file(image_path: &Path) -> std::path::PathBuf {
    let ext = image_path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    let mut candidates = Vec::new();
    if ext.len() >= 2 {
        let mut short = String::new();
        short.push(ext.as_bytes()[0] as char);
        short.push(ext.as_bytes()[ext.len() - 1] as char);
        short.push('w');
        candidates.push(image_path.with_extension(short));
    }
    candidates.push(image_path.with_extension(format!("{ext}w")));
    candidates.push(image_path.with_extension("wld"));
    candidates
        .iter()
        .find(|p| p.exists())
        .cloned()
        .unwrap_or_else(|| candidates[0].clone())
}

/// CIELAB raster, one plane per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct LabGrid {
    pub width: usize,
    pub height: usize,
    pub l: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub transform: GeoTransform<f64>,
}

impl LabGrid {
    #[inline]
    pub fn lab(&self, idx: usize) -> [f64; 3] {
        [self.l[idx], self.a[idx], self.b[idx]]
    }
}

#[inline]
fn srgb_to_linear(c: u8) -> f64 {
    let v = c as f64 / 255.0;
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

/// sRGB (D65) to CIELAB.
pub fn rgb_pixel_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let r = srgb_to_linear(rgb[0]);
    let g = srgb_to_linear(rgb[1]);
    let b = srgb_to_linear(rgb[2]);
    let x = 0.412_456_4 * r + 0.357_576_1 * g + 0.180_437_5 * b;
    let y = 0.212_672_9 * r + 0.715_152_2 * g + 0.072_175_0 * b;
    let z = 0.019_333_9 * r + 0.119_192_0 * g + 0.950_304_1 * b;
    const XN: f64 = 0.950_47;
    const YN: f64 = 1.0;
    const ZN: f64 = 1.088_83;
    let f = |t: f64| {
        const D: f64 = 6.0 / 29.0;
        if t > D * D * D {
            t.cbrt()
        } else {
            t / (3.0 * D * D) + 4.0 / 29.0
        }
    };
    let fx = f(x / XN);
    let fy = f(y / YN);
    let fz = f(z / ZN);
    let l = (116.0 * fy - 16.0).clamp(0.0, 100.0);
    [l, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

pub fn rgb_to_lab(img: &ImageGrid) -> LabGrid {
    let n = img.width * img.height;
    let lab: Vec<[f64; 3]> = (0..n)
        .into_par_iter()
        .map(|i| rgb_pixel_to_lab([img.data[3 * i], img.data[3 * i + 1], img.data[3 * i + 2]]))
        .collect();
    LabGrid {
        width: img.width,
        height: img.height,
        l: lab.iter().map(|v| v[0]).collect(),
        a: lab.iter().map(|v| v[1]).collect(),
        b: lab.iter().map(|v| v[2]).collect(),
        transform: img.transform,
    }
}

/// Target dimensions for a max-dimension cap; `None` if already within it.
fn capped_dims(width: usize, height: usize, max_dim: usize) -> Option<(usize, usize)> {
    let m = width.max(height);
    if m <= max_dim {
        return None;
    }
    let f = m as f64 / max_dim as f64;
    let nw = if width >= height { max_dim } else { ((width as f64 / f).round() as usize).max(1) };
    let nh = if height > width { max_dim } else { ((height as f64 / f).round() as usize).max(1) };
    Some((nw, nh))
}

/// Area-weighted contributions of source cells to each destination cell
/// along one axis.
fn box_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let lo = i as f64 * scale;
            let hi = (i + 1) as f64 * scale;
            let mut w = Vec::new();
            let mut j = lo.floor() as usize;
            while (j as f64) < hi && j < src {
                let a = lo.max(j as f64);
                let b = hi.min((j + 1) as f64);
                if b > a {
                    w.push((j, (b - a) / scale));
                }
                j += 1;
            }
            w
        })
        .collect()
}

/// Box-filter resampling of one plane.
pub fn box_resample(plane: &[f64], w: usize, h: usize, nw: usize, nh: usize) -> Vec<f64> {
    let wx = box_weights(w, nw);
    let wy = box_weights(h, nh);
    let mut tmp = vec![0.0; nw * h];
    tmp.par_chunks_mut(nw).enumerate().for_each(|(r, row)| {
        for (c, out) in row.iter_mut().enumerate() {
            *out = wx[c].iter().map(|&(j, wt)| plane[r * w + j] * wt).sum();
        }
    });
    let mut out = vec![0.0; nw * nh];
    out.par_chunks_mut(nw).enumerate().for_each(|(r, row)| {
        for (c, o) in row.iter_mut().enumerate() {
            *o = wy[r].iter().map(|&(j, wt)| tmp[j * nw + c] * wt).sum();
        }
    });
    out
}

/// Reduce resolution so that the larger dimension is at most `max_dim`,
/// keeping the world extent.
pub trait Downscale: Sized {
    /// Returns the (possibly unchanged) raster and the linear scale factor
    /// applied to pixel sizes (1.0 when unchanged).
    fn downscale(&self, max_dim: usize) -> (Self, f64);
}

pub const DEFAULT_MAX_DIM: usize = 1000;

fn scaled_transform(t: &GeoTransform<f64>, w: usize, h: usize, nw: usize, nh: usize) -> GeoTransform<f64> {
    t.scaled(w as f64 / nw as f64, h as f64 / nh as f64)
}

impl Downscale for ImageGrid {
    fn downscale(&self, max_dim: usize) -> (Self, f64) {
        let max_dim = max_dim.max(2);
        let Some((nw, nh)) = capped_dims(self.width, self.height, max_dim) else {
            return (self.clone(), 1.0);
        };
        let planes: Vec<Vec<f64>> = (0..3)
            .map(|ch| {
                let p: Vec<f64> = (0..self.width * self.height)
                    .map(|i| self.data[3 * i + ch] as f64)
                    .collect();
                box_resample(&p, self.width, self.height, nw, nh)
            })
            .collect();
        let mut data = vec![0u8; nw * nh * 3];
        for i in 0..nw * nh {
            for ch in 0..3 {
                data[3 * i + ch] = planes[ch][i].round().clamp(0.0, 255.0) as u8;
            }
        }
        let factor = self.width.max(self.height) as f64 / max_dim as f64;
        (
            ImageGrid {
                width: nw,
                height: nh,
                data,
                transform: scaled_transform(&self.transform, self.width, self.height, nw, nh),
            },
            factor,
        )
    }
}

impl Downscale for LabGrid {
    fn downscale(&self, max_dim: usize) -> (Self, f64) {
        let max_dim = max_dim.max(2);
        let Some((nw, nh)) = capped_dims(self.width, self.height, max_dim) else {
            return (self.clone(), 1.0);
        };
        let factor = self.width.max(self.height) as f64 / max_dim as f64;
        let rs = |p: &[f64]| box_resample(p, self.width, self.height, nw, nh);
        (
            LabGrid {
                width: nw,
                height: nh,
                l: rs(&self.l),
                a: rs(&self.a),
                b: rs(&self.b),
                transform: scaled_transform(&self.transform, self.width, self.height, nw, nh),
            },
            factor,
        )
    }
}

/// Region labels partitioning a grid (superpixels or watershed basins).
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMap {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub transform: GeoTransform<f64>,
}

impl LabelMap {
    #[inline]
    pub fn at(&self, col: usize, row: usize) -> u32 {
        self.labels[row * self.width + col]
    }

    /// Number of labels, assuming ids are dense from zero.
    pub fn count(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m as usize + 1)
    }

    pub fn save_png16(&self, path: &Path) -> Result<()> {
        let data: Vec<u16> = self.labels.iter().map(|&l| (l % 65536) as u16).collect();
        save_gray16(path, self.width, self.height, data)
    }
}

pub(crate) fn save_gray16(path: &Path, width: usize, height: usize, data: Vec<u16>) -> Result<()> {
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(width as u32, height as u32, data).expect("size checked");
    buf.save(path)?;
    Ok(())
}

/// Write a world file describing `t` (corner-origin convention).
pub fn write_world_file(path: &Path, t: &GeoTransform<f64>) -> Result<()> {
    fs::write(path, t.to_world_file())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_t() -> GeoTransform<f64> {
        GeoTransform::north_up(0.0, 0.0, 1.0)
    }

    #[test]
    fn world_file_example_center_of_first_pixel() {
        let t = GeoTransform::parse_world_file("0.05\n0\n0\n-0.05\n100.0\n200.0").unwrap();
        let p = t.pixel_to_world(0.0, 0.0);
        assert_abs_diff_eq!(p.x, 100.025, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 199.975, epsilon = 1e-12);
    }

    #[test]
    fn world_file_errors_name_the_line() {
        let err = GeoTransform::parse_world_file("0.05\n0\nzero\n-0.05\n1\n2").unwrap_err();
        match err {
            Error::WorldFileParse { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
        assert!(matches!(
            GeoTransform::parse_world_file("1\n0\n0"),
            Err(Error::WorldFileParse { line: 4, .. })
        ));
    }

    #[test]
    fn pixel_center_mapping() {
        let p = unit_t().pixel_to_world(3.0, 2.0);
        assert_eq!((p.x, p.y), (3.5, -2.5));
        let t = GeoTransform::north_up(0.0, 0.0, 0.05);
        let a = t.pixel_to_world(0.0, 0.0);
        let b = t.pixel_to_world(20.0, 0.0);
        assert_abs_diff_eq!(b.x - a.x, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn round_trip_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let t = GeoTransform {
            origin_x: 1_234.5,
            origin_y: 5_678.25,
            pixel_size_x: 0.05,
            pixel_size_y: -0.05,
            rotation_x: 0.003,
            rotation_y: -0.002,
        };
        for _ in 0..100 {
            let c: f64 = rng.random_range(-500.0..5000.0);
            let r: f64 = rng.random_range(-500.0..5000.0);
            let (c2, r2) = t.world_to_pixel(t.pixel_to_world(c, r)).unwrap();
            // error expressed in meters on the ground
            let err = ((c - c2) * t.gsd()).hypot((r - r2) * t.gsd());
            assert!(err < 1e-9, "{c} {r} -> {c2} {r2}");
        }
    }

    #[test]
    fn singular_transform_errors() {
        let t = GeoTransform {
            origin_x: 0.0,
            origin_y: 0.0,
            pixel_size_x: 1.0,
            pixel_size_y: 2.0,
            rotation_x: 1.0,
            rotation_y: 2.0,
        };
        assert!(matches!(
            t.world_to_pixel(Point::new(1.0, 1.0)),
            Err(Error::SingularTransform(_))
        ));
    }

    #[test]
    fn lab_reference_colors() {
        let w = rgb_pixel_to_lab([255, 255, 255]);
        assert!((w[0] - 100.0).abs() < 0.5 && w[1].abs() < 0.5 && w[2].abs() < 0.5);
        let k = rgb_pixel_to_lab([0, 0, 0]);
        assert!(k.iter().all(|v| v.abs() < 0.5));
        let r = rgb_pixel_to_lab([255, 0, 0]);
        assert!((r[0] - 53.2).abs() < 1.0, "{r:?}");
        assert!((r[1] - 80.1).abs() < 1.0, "{r:?}");
        assert!((r[2] - 67.2).abs() < 1.0, "{r:?}");
    }

    #[test]
    fn lab_gray_monotone_and_neutral() {
        let mut prev = -1.0;
        for g in 0..=255u8 {
            let v = rgb_pixel_to_lab([g, g, g]);
            assert!(v[0] > prev);
            assert!(v[1].abs() < 1.0 && v[2].abs() < 1.0);
            prev = v[0];
        }
    }

    #[test]
    fn downscale_cases() {
        let t = GeoTransform::north_up(0.0, 0.0, 0.05);
        let img = ImageGrid::from_fn(2000, 1000, t, |c, _| [(c % 256) as u8, 0, 0]).unwrap();
        let (d, f) = img.downscale(1000);
        assert_eq!((d.width, d.height), (1000, 500));
        assert_eq!(f, 2.0);
        assert_abs_diff_eq!(d.transform.pixel_size_x, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(d.transform.pixel_size_y, -0.1, epsilon = 1e-15);

        let small = ImageGrid::from_fn(800, 600, t, |_, _| [1, 2, 3]).unwrap();
        let (same, f) = small.downscale(1000);
        assert_eq!(same, small);
        assert_eq!(f, 1.0);

        let sq = ImageGrid::from_fn(1000, 1000, t, |_, _| [9, 9, 9]).unwrap();
        let (d, _) = sq.downscale(500);
        assert_eq!((d.width, d.height), (500, 500));
        assert_abs_diff_eq!(d.transform.pixel_size_x, 0.10, epsilon = 1e-15);
        let (ex0, ey0) = sq.extent();
        let (ex1, ey1) = d.extent();
        assert_abs_diff_eq!(ex0, ex1, epsilon = 1e-9);
        assert_abs_diff_eq!(ey0, ey1, epsilon = 1e-9);
        assert!(d.data.iter().all(|&v| v == 9));
    }

    #[test]
    fn box_resample_preserves_mean() {
        let w = 7;
        let h = 5;
        let p: Vec<f64> = (0..w * h).map(|i| (i * 37 % 11) as f64).collect();
        let out = box_resample(&p, w, h, 3, 2);
        let m0: f64 = p.iter().sum::<f64>() / p.len() as f64;
        let m1: f64 = out.iter().sum::<f64>() / out.len() as f64;
        assert_abs_diff_eq!(m0, m1, epsilon = 1e-9);
    }
}
