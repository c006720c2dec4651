//! Synthetic cameras following the multiplicative sensor model
//! `out = (1 + K) * scene + noise`, so detection and attack efficacy can be
//! checked against a known fingerprint.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand_distr::{Distribution, Normal, StandardNormal};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::rng::{derive_seed, seeded};
use crate::transforms::Fft2;

/// A simulated sensor and its planted PRNU multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSensor {
    pub sensor_id: String,
    pub pattern: GrayImage,
    pub strength: f64,
    pub seed: u64,
}

/// i.i.d. zero-mean Gaussian pattern with std `strength`.
pub fn make_sensor(height: usize, width: usize, strength: f64, seed: u64) -> Result<SyntheticSensor> {
    if !(strength > 0.0 && strength.is_finite()) {
        return Err(Error::Config(format!("sensor strength must be positive, got {strength}")));
    }
    let normal = Normal::new(0.0, strength).expect("positive std");
    let mut rng = seeded(seed);
    let pattern = GrayImage::from_fn(height, width, |_, _| normal.sample(&mut rng) as f32);
    Ok(SyntheticSensor {
        sensor_id: format!("sensor-{seed:016x}"),
        pattern,
        strength,
        seed,
    })
}

/// One exposure: `(1 + K) * scene + N(0, additive_sigma^2)`, clamped to `[0, 255]`.
pub fn capture(
    scene: &GrayImage,
    sensor: &SyntheticSensor,
    additive_sigma: f64,
    seed: u64,
) -> Result<GrayImage> {
    scene.ensure_same_dims(&sensor.pattern)?;
    if !(additive_sigma >= 0.0) {
        return Err(Error::Config(format!("additive_sigma must be >= 0, got {additive_sigma}")));
    }
    let mut rng = seeded(seed);
    let normal = (additive_sigma > 0.0).then(|| Normal::new(0.0, additive_sigma).expect("valid std"));
    let mut out = scene.zip_map(&sensor.pattern, |s, k| (1.0 + k) * s)?;
    if let Some(normal) = normal {
        for v in out.data_mut() {
            *v += normal.sample(&mut rng) as f32;
        }
    }
    out.clamp_in_place();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SceneKind {
    Flat,
    Gradient,
    Texture,
}

impl FromStr for SceneKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat" => Ok(SceneKind::Flat),
            "gradient" => Ok(SceneKind::Gradient),
            "texture" => Ok(SceneKind::Texture),
            other => Err(Error::Config(format!("unknown scene kind {other:?}"))),
        }
    }
}

/// Test content: constant 128, a 32..224 horizontal ramp, or a smoothed
/// random field stretched to `[16, 240]`.
pub fn make_scene(height: usize, width: usize, kind: SceneKind, seed: u64) -> GrayImage {
    match kind {
        SceneKind::Flat => GrayImage::filled(height, width, 128.0),
        SceneKind::Gradient => GrayImage::from_fn(height, width, |_, c| {
            if width == 1 {
                32.0
            } else {
                32.0 + 192.0 * c as f32 / (width - 1) as f32
            }
        }),
        SceneKind::Texture => TextureSynth::new(height, width).generate(seed),
    }
}

/// Texture scenes: Gaussian white noise shaped by a sum of Gaussian low-pass
/// octaves (std in pixels) weighted by `std^TEXTURE_SLOPE`, then mapped to
/// mean [`TEXTURE_MEAN`] and std [`TEXTURE_STD`] and clamped to `[16, 240]`.
pub const TEXTURE_OCTAVES: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];
pub const TEXTURE_SLOPE: f64 = 0.5;
pub const TEXTURE_MEAN: f64 = 128.0;
pub const TEXTURE_STD: f64 = 40.0;

/// Planned transform and shaping filter for one texture size.
struct TextureSynth {
    height: usize,
    width: usize,
    fft: Fft2,
    gain: Vec<f64>,
}

impl TextureSynth {
    fn new(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            fft: Fft2::new(height, width),
            gain: octave_gain(height, width),
        }
    }

    fn generate(&self, seed: u64) -> GrayImage {
        let mut rng = seeded(seed);
        let mut buf: Vec<Complex64> = (0..self.height * self.width)
            .map(|_| Complex64::new(StandardNormal.sample(&mut rng), 0.0))
            .collect();
        self.fft.forward(&mut buf);
        for (z, g) in buf.iter_mut().zip(&self.gain) {
            *z *= g;
        }
        self.fft.inverse(&mut buf);
        let n = buf.len() as f64;
        let mean = buf.iter().map(|z| z.re).sum::<f64>() / n;
        let std = (buf.iter().map(|z| (z.re - mean).powi(2)).sum::<f64>() / n).sqrt();
        let scale = if std > 0.0 { TEXTURE_STD / std } else { 0.0 };
        let data = buf
            .iter()
            .map(|z| (TEXTURE_MEAN + (z.re - mean) * scale).clamp(16.0, 240.0) as f32)
            .collect();
        GrayImage::new(self.height, self.width, data).expect("finite texture")
    }
}

/// Amplitude response of the octave mixture, each octave normalized to unit
/// output variance for unit white input.
fn octave_gain(height: usize, width: usize) -> Vec<f64> {
    let freq = |i: usize, n: usize| {
        let k = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
        k / n as f64
    };
    let radius2: Vec<f64> = (0..height * width)
        .map(|i| freq(i / width, height).powi(2) + freq(i % width, width).powi(2))
        .collect();
    let mut power = vec![0.0; radius2.len()];
    for &sigma in &TEXTURE_OCTAVES {
        let a = 2.0 * std::f64::consts::PI * std::f64::consts::PI * sigma * sigma;
        let response: Vec<f64> = radius2.iter().map(|&f2| (-a * f2).exp()).collect();
        let variance = response.iter().map(|g| g * g).sum::<f64>() / response.len() as f64;
        let weight = sigma.powf(2.0 * TEXTURE_SLOPE) / variance;
        for (p, g) in power.iter_mut().zip(&response) {
            *p += weight * g * g;
        }
    }
    power.into_iter().map(f64::sqrt).collect()
}

/// Parameters of a simulated camera study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub cameras: usize,
    pub images_per_camera: usize,
    pub size: usize,
    pub strength: f64,
    pub additive_sigma: f64,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            cameras: 4,
            images_per_camera: 20,
            size: 256,
            strength: 0.02,
            additive_sigma: 2.0,
            seed: 0,
        }
    }
}

/// Labeled in-memory images, one entry per camera.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImages {
    pub cameras: Vec<(String, Vec<GrayImage>)>,
}

impl LabeledImages {
    pub fn num_cameras(&self) -> usize {
        self.cameras.len()
    }
}

/// A generated study plus the sensors that produced it.
#[derive(Debug, Clone)]
pub struct SyntheticStudy {
    pub images: LabeledImages,
    pub sensors: Vec<SyntheticSensor>,
}

pub fn camera_id(index: usize) -> String {
    format!("cam{index:02}")
}

pub fn image_file_name(index: usize) -> String {
    format!("img{index:04}.png")
}

/// Generates textured captures; values are rounded to 8-bit levels so the
/// in-memory study is identical to what [`materialize`] writes to disk.
pub fn synthesize(config: &SimulationConfig) -> Result<SyntheticStudy> {
    let n = config.size;
    let mut cameras = Vec::with_capacity(config.cameras);
    let mut sensors = Vec::with_capacity(config.cameras);
    let textures = TextureSynth::new(n, n);
    for cam in 0..config.cameras {
        let sensor = make_sensor(n, n, config.strength, derive_seed(config.seed, &[cam as u64, 0]))?;
        let images = (0..config.images_per_camera)
            .map(|i| {
                let scene = textures.generate(derive_seed(config.seed, &[cam as u64, 1, i as u64]));
                let shot = capture(
                    &scene,
                    &sensor,
                    config.additive_sigma,
                    derive_seed(config.seed, &[cam as u64, 2, i as u64]),
                )?;
                Ok(shot.map(f32::round))
            })
            .collect::<Result<Vec<_>>>()?;
        cameras.push((camera_id(cam), images));
        sensors.push(sensor);
    }
    Ok(SyntheticStudy {
        images: LabeledImages { cameras },
        sensors,
    })
}

/// Writes a study as `root/<camera_id>/imgNNNN.png`.
pub fn materialize(config: &SimulationConfig, root: &Path) -> Result<SyntheticStudy> {
    let study = synthesize(config)?;
    for (id, images) in &study.images.cameras {
        let dir = root.join(id);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for (i, img) in images.iter().enumerate() {
            img.save_png(&dir.join(image_file_name(i)))?;
        }
    }
    Ok(study)
}

/// Pearson correlation of two equally sized rasters.
pub fn correlation(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let (ma, mb) = (a.mean(), b.mean());
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.data().iter().zip(b.data()) {
        let (dx, dy) = (x as f64 - ma, y as f64 - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Ok(0.0);
    }
    Ok(sab / (saa * sbb).sqrt())
}
