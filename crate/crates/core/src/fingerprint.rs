//! Sensor fingerprint estimation, peak-to-correlation-energy scoring and
//! source identification.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::denoise::{wavelet_wiener_with, WaveletWienerConfig};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::transforms::xcorr::{
    correlate_pair, correlate_spectra, CorrelationSurface, Fft2, Spectrum,
};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FingerprintConfig {
    pub denoise: WaveletWienerConfig,
    /// Added to the denominator of the estimator to stabilize dark pixels.
    pub epsilon: f64,
    /// Side of the square excluded around the correlation peak.
    pub pce_neighborhood: usize,
}

impl Default for FingerprintConfig {
    fn default() -> Self {
        Self {
            denoise: WaveletWienerConfig::default(),
            epsilon: 1.0,
            pce_neighborhood: 11,
        }
    }
}

/// Zero-mean PRNU estimate for one camera.
#[derive(Debug, Clone, PartialEq)]
pub struct FingerprintPattern {
    pub camera_id: String,
    pub training_count: usize,
    pub values: GrayImage,
    pub config: FingerprintConfig,
}

impl FingerprintPattern {
    pub fn dims(&self) -> (usize, usize) {
        self.values.dims()
    }
}

/// Running sums of the weighted estimator `sum W*I / (sum I^2 + eps)`.
#[derive(Debug, Clone)]
pub struct FingerprintAccumulator {
    dims: (usize, usize),
    numerator: Vec<f64>,
    denominator: Vec<f64>,
    count: usize,
}

impl FingerprintAccumulator {
    pub fn new(height: usize, width: usize) -> Self {
        Self {
            dims: (height, width),
            numerator: vec![0.0; height * width],
            denominator: vec![0.0; height * width],
            count: 0,
        }
    }

    /// Adds one training image with its noise residual.
    pub fn add(&mut self, image: &GrayImage, residual: &GrayImage) -> Result<()> {
        if image.dims() != self.dims {
            return Err(Error::dims(self.dims, image.dims()));
        }
        image.ensure_same_dims(residual)?;
        for (((num, den), &i), &w) in self
            .numerator
            .iter_mut()
            .zip(&mut self.denominator)
            .zip(image.data())
            .zip(residual.data())
        {
            let i = i as f64;
            *num += w as f64 * i;
            *den += i * i;
        }
        self.count += 1;
        Ok(())
    }

    pub fn finish(self, camera_id: &str, config: &FingerprintConfig) -> Result<FingerprintPattern> {
        if self.count == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        let mut k: Vec<f64> = self
            .numerator
            .iter()
            .zip(&self.denominator)
            .map(|(n, d)| n / (d + config.epsilon))
            .collect();
        let mean = k.iter().sum::<f64>() / k.len() as f64;
        k.iter_mut().for_each(|v| *v -= mean);
        let (h, w) = self.dims;
        Ok(FingerprintPattern {
            camera_id: camera_id.to_string(),
            training_count: self.count,
            values: GrayImage::new(h, w, k.into_iter().map(|v| v as f32).collect())?,
            config: *config,
        })
    }
}

/// Noise residual used both for training and for queries.
pub fn noise_residual(image: &GrayImage, config: &FingerprintConfig) -> Result<GrayImage> {
    Ok(wavelet_wiener_with(image, &config.denoise)?.residual)
}

pub fn estimate_fingerprint(images: &[GrayImage], camera_id: &str) -> Result<FingerprintPattern> {
    estimate_fingerprint_with(images, camera_id, &FingerprintConfig::default())
}

pub fn estimate_fingerprint_with(
    images: &[GrayImage],
    camera_id: &str,
    config: &FingerprintConfig,
) -> Result<FingerprintPattern> {
    let first = images.first().ok_or(Error::EmptyTrainingSet)?;
    let mut acc = FingerprintAccumulator::new(first.height(), first.width());
    for img in images {
        let residual = noise_residual(img, config)?;
        acc.add(img, &residual)?;
    }
    acc.finish(camera_id, config)
}

/// Signed peak-to-correlation energy and where the peak sits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PceScore {
    pub pce: f64,
    pub peak_shift: (usize, usize),
}

/// Distinct circular indices within `half` of `center` along an axis of length `n`.
fn neighborhood_indices(center: isize, half: isize, n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (-half..=half)
        .map(|d| (center + d).rem_euclid(n as isize) as usize)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// `sign(peak) * peak^2 / mean(surface^2 outside the peak neighbourhood)`.
pub fn pce_from_surface(surface: &CorrelationSurface, neighborhood: usize) -> PceScore {
    let peak = surface.peak_value();
    let (h, w) = (surface.height, surface.width);
    let half = (neighborhood / 2) as isize;
    let (pr, pc) = (surface.peak.0 as isize, surface.peak.1 as isize);
    let total: f64 = surface.values.iter().map(|v| v * v).sum();
    let mut near_energy = 0.0;
    let mut near_count = 0usize;
    let rows = neighborhood_indices(pr, half, h);
    let cols = neighborhood_indices(pc, half, w);
    for &r in &rows {
        for &c in &cols {
            let v = surface.get(r, c);
            near_energy += v * v;
            near_count += 1;
        }
    }
    let energy = (total - near_energy).max(0.0);
    let count = h * w - near_count;
    let pce = if peak == 0.0 || count == 0 || energy == 0.0 {
        0.0
    } else {
        peak.signum() * peak * peak / (energy / count as f64)
    };
    PceScore {
        pce,
        peak_shift: surface.peak,
    }
}

/// Reusable FFT plan and settings for scoring many queries against many
/// patterns of one size.
pub struct Detector {
    fft: Fft2,
    config: FingerprintConfig,
}

/// A query image with its residual spectrum computed once.
pub struct PreparedQuery {
    image: GrayImage,
    residual: Spectrum,
}

impl Detector {
    pub fn new(height: usize, width: usize, config: FingerprintConfig) -> Self {
        Self {
            fft: Fft2::new(height, width),
            config,
        }
    }

    pub fn config(&self) -> &FingerprintConfig {
        &self.config
    }

    pub fn prepare(&self, image: &GrayImage) -> Result<PreparedQuery> {
        let residual = noise_residual(image, &self.config)?;
        self.prepare_with_residual(image, &residual)
    }

    pub fn prepare_with_residual(&self, image: &GrayImage, residual: &GrayImage) -> Result<PreparedQuery> {
        let dims = self.fft.dims();
        if image.dims() != dims {
            return Err(Error::dims(dims, image.dims()));
        }
        image.ensure_same_dims(residual)?;
        Ok(PreparedQuery {
            image: image.clone(),
            residual: Spectrum::new(&self.fft, residual),
        })
    }

    pub fn surface(&self, query: &PreparedQuery, pattern: &FingerprintPattern) -> Result<CorrelationSurface> {
        query.image.ensure_same_dims(&pattern.values)?;
        let modulated = Spectrum::from_values(
            &self.fft,
            query
                .image
                .data()
                .iter()
                .zip(pattern.values.data())
                .map(|(&i, &k)| i as f64 * k as f64),
        );
        Ok(correlate_spectra(&self.fft, &query.residual, &modulated))
    }

    /// Surfaces against two patterns, sharing one transform pair.
    pub fn surface_pair(
        &self,
        query: &PreparedQuery,
        first: &FingerprintPattern,
        second: &FingerprintPattern,
    ) -> Result<(CorrelationSurface, CorrelationSurface)> {
        query.image.ensure_same_dims(&first.values)?;
        query.image.ensure_same_dims(&second.values)?;
        let modulate = |p: &'_ FingerprintPattern| {
            query
                .image
                .data()
                .iter()
                .zip(p.values.data())
                .map(|(&i, &k)| i as f64 * k as f64)
                .collect::<Vec<_>>()
                .into_iter()
        };
        Ok(correlate_pair(
            &self.fft,
            &query.residual,
            modulate(first),
            modulate(second),
        ))
    }

    pub fn score(&self, query: &PreparedQuery, pattern: &FingerprintPattern) -> Result<PceScore> {
        let surface = self.surface(query, pattern)?;
        Ok(pce_from_surface(&surface, self.config.pce_neighborhood))
    }

    /// Index of the best-scoring pattern (first on ties) and all scores.
    pub fn rank(
        &self,
        query: &PreparedQuery,
        patterns: &[FingerprintPattern],
    ) -> Result<(usize, Vec<PceScore>)> {
        if patterns.is_empty() {
            return Err(Error::NoPatterns);
        }
        let mut scores = Vec::with_capacity(patterns.len());
        for pair in patterns.chunks(2) {
            match pair {
                [a, b] => {
                    let (sa, sb) = self.surface_pair(query, a, b)?;
                    let k = self.config.pce_neighborhood;
                    scores.push(pce_from_surface(&sa, k));
                    scores.push(pce_from_surface(&sb, k));
                }
                [a] => scores.push(self.score(query, a)?),
                _ => unreachable!(),
            }
        }
        let mut best = 0;
        for (i, s) in scores.iter().enumerate().skip(1) {
            if s.pce > scores[best].pce {
                best = i;
            }
        }
        Ok((best, scores))
    }
}

/// PCE between the residual of `image` and `image * pattern`.
pub fn pce(image: &GrayImage, pattern: &FingerprintPattern) -> Result<PceScore> {
    image.ensure_same_dims(&pattern.values)?;
    let detector = Detector::new(image.height(), image.width(), pattern.config);
    detector.score(&detector.prepare(image)?, pattern)
}

/// Camera id of the pattern with the largest PCE; ties go to the earliest.
pub fn identify(image: &GrayImage, patterns: &[FingerprintPattern]) -> Result<String> {
    let first = patterns.first().ok_or(Error::NoPatterns)?;
    let detector = Detector::new(image.height(), image.width(), first.config);
    let (best, _) = detector.rank(&detector.prepare(image)?, patterns)?;
    Ok(patterns[best].camera_id.clone())
}

/// Sidecar metadata stored next to the raw pattern values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternMetadata {
    pub camera_id: String,
    pub height: usize,
    pub width: usize,
    pub training_count: usize,
    pub toolkit_version: String,
    pub config: FingerprintConfig,
}

pub fn sidecar_path(data_path: &Path) -> PathBuf {
    data_path.with_extension("json")
}

/// Writes `path` (little-endian f32, row-major) and its `.json` sidecar.
pub fn save_pattern(pattern: &FingerprintPattern, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(pattern.values.len() * 4);
    for v in pattern.values.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let (height, width) = pattern.dims();
    let meta = PatternMetadata {
        camera_id: pattern.camera_id.clone(),
        height,
        width,
        training_count: pattern.training_count,
        toolkit_version: TOOLKIT_VERSION.to_string(),
        config: pattern.config,
    };
    let sidecar = sidecar_path(path);
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    fs::write(&sidecar, text).map_err(|e| Error::io(&sidecar, e))
}

pub fn load_pattern(path: &Path) -> Result<FingerprintPattern> {
    let sidecar = sidecar_path(path);
    let text = fs::read_to_string(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
    let meta: PatternMetadata = serde_json::from_str(&text)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() != meta.height * meta.width * 4 {
        return Err(Error::Dataset(format!(
            "{} holds {} bytes, expected {} for {}x{}",
            path.display(),
            bytes.len(),
            meta.height * meta.width * 4,
            meta.height,
            meta.width
        )));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok(FingerprintPattern {
        camera_id: meta.camera_id,
        training_count: meta.training_count,
        values: GrayImage::new(meta.height, meta.width, data)?,
        config: meta.config,
    })
}

/// All `.prnu` patterns in `dir`, sorted by file name.
pub fn load_patterns(dir: &Path) -> Result<Vec<FingerprintPattern>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("prnu"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_pattern(p)).collect()
}
