//! Wavelet, blockwise DCT and FFT correlation primitives.

pub mod dct;
pub mod wavelet;
pub mod xcorr;

pub use dct::{block_dct8, DctDirection};
pub use wavelet::{dwt2, dwt2_with, idwt2, DetailLevel, WaveletFamily, WaveletPyramid};
pub use xcorr::{correlate_pair, correlate_spectra, xcorr2, CorrelationSurface, Fft2, Spectrum};
