//! Grayscale rasters, decoding, the crop/orient/luminance preprocessing
//! step, and pixel-domain quality metrics.

use std::fs;
use std::path::{Path, PathBuf};

use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default side of the centered square crop.
pub const DEFAULT_CROP_SIZE: usize = 2048;

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

/// Row-major single-precision luminance raster.
///
/// Values live in `[0, 255]` at rest. Intermediate results (residuals,
/// transform coefficients) reuse the type and may leave that range.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidImage(format!(
                "empty raster {height}x{width}"
            )));
        }
        if data.len() != height * width {
            return Err(Error::InvalidImage(format!(
                "{} values for a {height}x{width} raster",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidImage(format!(
                "non-finite value at index {bad}"
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// Panics on a zero dimension.
    pub fn filled(height: usize, width: usize, value: f32) -> Self {
        assert!(height > 0 && width > 0, "empty raster");
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        assert!(height > 0 && width > 0, "empty raster");
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            height,
            width,
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f32) {
        self.data[row * self.width + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f32] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> Self {
        Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Element-wise combination of two equally sized rasters.
    pub fn zip_map(&self, other: &GrayImage, f: impl Fn(f32, f32) -> f32) -> Result<Self> {
        self.ensure_same_dims(other)?;
        Ok(Self {
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Like [`GrayImage::map`], threading a random stream in row-major order.
    pub fn map_with_rng<R>(&self, rng: &mut R, mut f: impl FnMut(f32, &mut R) -> f32) -> Self {
        Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v, rng)).collect(),
        }
    }

    pub fn clamped(&self) -> Self {
        self.map(|v| v.clamp(0.0, 255.0))
    }

    pub fn clamp_in_place(&mut self) {
        for v in &mut self.data {
            *v = v.clamp(0.0, 255.0);
        }
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.data
            .iter()
            .map(|&v| {
                let d = v as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / self.data.len() as f64
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|&v| (v as f64) * (v as f64)).sum()
    }

    pub fn max_abs_diff(&self, other: &GrayImage) -> f32 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f32::max)
    }

    /// Copy of the window starting at `(top, left)`.
    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 || top + height > self.height || left + width > self.width {
            return Err(Error::InvalidImage(format!(
                "crop {height}x{width}@({top},{left}) outside {}x{}",
                self.height, self.width
            )));
        }
        let mut data = Vec::with_capacity(height * width);
        for r in top..top + height {
            data.extend_from_slice(&self.data[r * self.width + left..r * self.width + left + width]);
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn ensure_same_dims(&self, other: &GrayImage) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::dims(self.dims(), other.dims()));
        }
        Ok(())
    }

    /// Writes the raster as an 8-bit grayscale PNG after clamping and rounding.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let bytes: Vec<u8> = self
            .data
            .iter()
            .map(|v| v.clamp(0.0, 255.0).round() as u8)
            .collect();
        let buf = image::GrayImage::from_raw(self.width as u32, self.height as u32, bytes)
            .expect("buffer length matches dimensions");
        buf.save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| match e {
                image::ImageError::IoError(io) => Error::io(path, io),
                other => Error::Decode {
                    path: path.to_path_buf(),
                    message: other.to_string(),
                },
            })
    }
}

/// Decodes a JPEG or PNG file into 8-bit RGB.
pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Decode {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })?;
    Ok(img.to_rgb8())
}

/// Decodes and preprocesses one file.
pub fn load_gray(path: &Path, crop_size: usize) -> Result<GrayImage> {
    preprocess(&load_rgb(path)?, crop_size)
}

/// Luminance of a whole file, without orientation change or cropping.
pub fn load_luminance(path: &Path) -> Result<GrayImage> {
    let raw = load_rgb(path)?;
    Ok(GrayImage::from_fn(raw.height() as usize, raw.width() as usize, |r, c| {
        let p = raw.get_pixel(c as u32, r as u32).0;
        luminance(p[0], p[1], p[2])
    }))
}

/// BT.601 luma.
#[inline]
pub fn luminance(r: u8, g: u8, b: u8) -> f32 {
    (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64) as f32
}

/// Orientation normalization, centered square crop and luminance reduction.
///
/// Portrait inputs are turned a quarter clockwise first so every crop comes
/// from a landscape frame.
pub fn preprocess(raw: &RgbImage, crop_size: usize) -> Result<GrayImage> {
    let (w, h) = (raw.width() as usize, raw.height() as usize);
    if crop_size == 0 || h.min(w) < crop_size {
        return Err(Error::ImageTooSmall {
            height: h,
            width: w,
            crop_size,
        });
    }
    let rotated;
    let frame = if h > w {
        rotated = image::imageops::rotate90(raw);
        &rotated
    } else {
        raw
    };
    let (fw, fh) = (frame.width() as usize, frame.height() as usize);
    let top = (fh - crop_size) / 2;
    let left = (fw - crop_size) / 2;
    Ok(GrayImage::from_fn(crop_size, crop_size, |r, c| {
        let p = frame.get_pixel((left + c) as u32, (top + r) as u32).0;
        luminance(p[0], p[1], p[2])
    }))
}

/// Sentinel returned by [`snr_db`] when the two images are identical.
pub const SNR_IDENTICAL: f64 = f64::INFINITY;

/// `10 log10(sum original^2 / sum (original - processed)^2)`.
pub fn snr_db(original: &GrayImage, processed: &GrayImage) -> Result<f64> {
    original.ensure_same_dims(processed)?;
    let mut signal = 0.0f64;
    let mut noise = 0.0f64;
    for (&a, &b) in original.data().iter().zip(processed.data()) {
        let a = a as f64;
        let d = a - b as f64;
        signal += a * a;
        noise += d * d;
    }
    if noise == 0.0 {
        return Ok(SNR_IDENTICAL);
    }
    Ok(10.0 * (signal / noise).log10())
}

/// Labeled image collection laid out as `root/<camera_id>/<image files>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraDataset {
    pub cameras: Vec<CameraImages>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraImages {
    pub camera_id: String,
    pub image_paths: Vec<PathBuf>,
}

impl CameraDataset {
    /// Scans `root`; camera ids and file names are sorted lexicographically.
    pub fn discover(root: &Path) -> Result<Self> {
        let mut cameras = Vec::new();
        for dir in sorted_entries(root)? {
            if !dir.is_dir() {
                continue;
            }
            let camera_id = dir
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| Error::Dataset(format!("non UTF-8 directory {}", dir.display())))?
                .to_string();
            let image_paths = list_images(&dir)?;
            if image_paths.is_empty() {
                continue;
            }
            cameras.push(CameraImages {
                camera_id,
                image_paths,
            });
        }
        if cameras.is_empty() {
            return Err(Error::Dataset(format!(
                "no camera directories with images under {}",
                root.display()
            )));
        }
        Ok(Self { cameras })
    }

    pub fn num_cameras(&self) -> usize {
        self.cameras.len()
    }
}

/// Image files directly inside `dir`, sorted by file name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    Ok(sorted_entries(dir)?
        .into_iter()
        .filter(|p| p.is_file() && is_image_file(p))
        .collect())
}

fn is_image_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        .unwrap_or(false)
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|entry| entry.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(dir, e))?;
    entries.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(entries)
}
