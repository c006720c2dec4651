use serde::{Deserialize, Serialize};

use super::filter2;
use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Guard for the ratio step.
const EPS: f64 = 1e-12;

/// Small odd-sized, non-negative blur kernel summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSpreadFunction {
    size: usize,
    kernel: Vec<f64>,
}

impl PointSpreadFunction {
    pub fn new(size: usize, kernel: Vec<f64>) -> Result<Self> {
        if size == 0 || size % 2 == 0 || kernel.len() != size * size {
            return Err(Error::InvalidSpec(format!(
                "PSF must be odd-sized and square, got size {size} with {} entries",
                kernel.len()
            )));
        }
        if kernel.iter().any(|&k| !(k >= 0.0) || !k.is_finite()) {
            return Err(Error::InvalidSpec("PSF entries must be non-negative".into()));
        }
        let sum: f64 = kernel.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSpec(format!("PSF sums to {sum}, not 1")));
        }
        Ok(Self { size, kernel })
    }

    pub fn identity() -> Self {
        Self {
            size: 1,
            kernel: vec![1.0],
        }
    }

    /// Sampled isotropic Gaussian, renormalized.
    pub fn gaussian(size: usize, sigma: f64) -> Result<Self> {
        if size == 0 || size % 2 == 0 || !(sigma > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "Gaussian PSF needs odd size and positive sigma, got {size}, {sigma}"
            )));
        }
        let r = (size / 2) as f64;
        let mut kernel = Vec::with_capacity(size * size);
        for y in 0..size {
            for x in 0..size {
                let (dy, dx) = (y as f64 - r, x as f64 - r);
                kernel.push((-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp());
            }
        }
        let sum: f64 = kernel.iter().sum();
        kernel.iter_mut().for_each(|k| *k /= sum);
        Ok(Self { size, kernel })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    /// Kernel rotated by 180 degrees.
    pub fn flipped(&self) -> Vec<f64> {
        self.kernel.iter().rev().copied().collect()
    }

    /// Blurs an image with this PSF (symmetric boundary).
    pub fn blur(&self, image: &GrayImage) -> GrayImage {
        let (h, w) = image.dims();
        let x: Vec<f64> = image.data().iter().map(|&v| v as f64).collect();
        // Convolution is correlation with the flipped kernel.
        let out = filter2(&x, h, w, &self.flipped(), self.size);
        GrayImage::new(h, w, out.into_iter().map(|v| v as f32).collect())
            .expect("finite blur output")
    }
}

/// Richardson-Lucy deconvolution starting from the observed image.
pub fn lucy_richardson(
    image: &GrayImage,
    psf: &PointSpreadFunction,
    iterations: usize,
) -> Result<GrayImage> {
    if iterations == 0 {
        return Err(Error::InvalidSpec("Lucy-Richardson needs >= 1 iteration".into()));
    }
    let (h, w) = image.dims();
    let observed: Vec<f64> = image.data().iter().map(|&v| (v as f64).max(0.0)).collect();
    let forward = psf.flipped();
    let adjoint = psf.kernel().to_vec();
    let mut estimate = observed.clone();
    for _ in 0..iterations {
        let blurred = filter2(&estimate, h, w, &forward, psf.size());
        let ratio: Vec<f64> = observed
            .iter()
            .zip(&blurred)
            .map(|(&o, &b)| o / b.max(EPS))
            .collect();
        let correction = filter2(&ratio, h, w, &adjoint, psf.size());
        for (u, c) in estimate.iter_mut().zip(correction) {
            *u *= c;
            debug_assert!(*u >= 0.0);
        }
    }
    GrayImage::new(h, w, estimate.into_iter().map(|v| v as f32).collect())
}
