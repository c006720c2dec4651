use serde::{Deserialize, Serialize};

use super::box_mean;
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::transforms::{dwt2_with, idwt2, WaveletFamily};

/// Square windows over which the local signal variance is estimated; the
/// smallest estimate wins.
pub const LOCAL_WINDOWS: [usize; 4] = [3, 5, 7, 9];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveletWienerConfig {
    /// Noise standard deviation in 0-255 pixel units.
    pub sigma0: f64,
    pub levels: usize,
    pub family: WaveletFamily,
}

impl Default for WaveletWienerConfig {
    fn default() -> Self {
        Self {
            sigma0: 2.0,
            levels: 4,
            family: WaveletFamily::Db8,
        }
    }
}

/// `denoised + residual == input` up to f32 rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseResult {
    pub denoised: GrayImage,
    /// Noise estimate: detail coefficients scaled by `1 - H`, lowpass erased.
    pub residual: GrayImage,
}

/// Wavelet-domain Wiener denoising with the default transform settings.
pub fn wavelet_wiener(image: &GrayImage, sigma0: f64) -> Result<DenoiseResult> {
    wavelet_wiener_with(
        image,
        &WaveletWienerConfig {
            sigma0,
            ..WaveletWienerConfig::default()
        },
    )
}

pub fn wavelet_wiener_with(image: &GrayImage, config: &WaveletWienerConfig) -> Result<DenoiseResult> {
    if !(config.sigma0 > 0.0 && config.sigma0.is_finite()) {
        return Err(Error::Config(format!(
            "sigma0 must be positive, got {}",
            config.sigma0
        )));
    }
    let noise_var = config.sigma0 * config.sigma0;
    let mut pyramid = dwt2_with(image, config.levels, config.family)?;
    for band in pyramid.details.iter_mut().flat_map(|d| d.subbands_mut()) {
        let (h, w) = band.dims();
        let coeffs: Vec<f64> = band.data().iter().map(|&c| c as f64).collect();
        let squared: Vec<f64> = coeffs.iter().map(|c| c * c).collect();
        let mut local_var = vec![f64::INFINITY; coeffs.len()];
        for &size in &LOCAL_WINDOWS {
            let mean_sq = box_mean(&squared, h, w, size);
            for (v, m) in local_var.iter_mut().zip(mean_sq) {
                *v = v.min((m - noise_var).max(0.0));
            }
        }
        for ((out, &c), &v) in band.data_mut().iter_mut().zip(&coeffs).zip(&local_var) {
            let gain = v / (v + noise_var);
            debug_assert!((0.0..=1.0).contains(&gain), "Wiener gain {gain}");
            *out = (c * (1.0 - gain)) as f32;
        }
    }
    pyramid.approximation.data_mut().fill(0.0);
    let residual = idwt2(&pyramid)?;
    let denoised = image.zip_map(&residual, |x, n| x - n)?;
    Ok(DenoiseResult { denoised, residual })
}
