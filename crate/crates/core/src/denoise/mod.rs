//! Denoising and restoration engines.

mod lucy;
mod spatial_wiener;
mod wavelet_wiener;

pub use lucy::{lucy_richardson, PointSpreadFunction};
pub use spatial_wiener::spatial_wiener;
pub use wavelet_wiener::{
    wavelet_wiener, wavelet_wiener_with, DenoiseResult, WaveletWienerConfig, LOCAL_WINDOWS,
};

/// Half-sample symmetric index: `-1 -> 0`, `n -> n - 1`.
#[inline]
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - i - 1;
        } else {
            return i as usize;
        }
    }
}

/// Copy of `values` with a symmetric border of `radius` samples on every side.
fn pad_symmetric(values: &[f64], height: usize, width: usize, radius: usize) -> Vec<f64> {
    let pw = width + 2 * radius;
    let r = radius as isize;
    let cols: Vec<usize> = (-r..width as isize + r).map(|c| reflect(c, width)).collect();
    let mut out = Vec::with_capacity((height + 2 * radius) * pw);
    for y in -r..height as isize + r {
        let row = &values[reflect(y, height) * width..][..width];
        out.extend(cols.iter().map(|&c| row[c]));
    }
    out
}

/// Mean over a `size x size` window centred on every sample, symmetric
/// boundary. `size` must be odd.
pub(crate) fn box_mean(values: &[f64], height: usize, width: usize, size: usize) -> Vec<f64> {
    debug_assert!(size % 2 == 1);
    let radius = size / 2;
    let padded = pad_symmetric(values, height, width, radius);
    let pw = width + 2 * radius;
    // Horizontal running sums on the padded rows.
    let mut horizontal = vec![0.0; (height + 2 * radius) * width];
    for (src, dst) in padded.chunks_exact(pw).zip(horizontal.chunks_exact_mut(width)) {
        let mut acc: f64 = src[..size].iter().sum();
        dst[0] = acc;
        for c in 1..width {
            acc += src[c + size - 1] - src[c - 1];
            dst[c] = acc;
        }
    }
    let norm = 1.0 / (size * size) as f64;
    let mut out = vec![0.0; height * width];
    for (r, dst) in out.chunks_exact_mut(width).enumerate() {
        for line in horizontal[r * width..(r + size) * width].chunks_exact(width) {
            for (o, &v) in dst.iter_mut().zip(line) {
                *o += v;
            }
        }
        dst.iter_mut().for_each(|v| *v *= norm);
    }
    out
}

/// 2-D correlation with an odd kernel, symmetric boundary.
pub(crate) fn filter2(
    values: &[f64],
    height: usize,
    width: usize,
    kernel: &[f64],
    ksize: usize,
) -> Vec<f64> {
    let radius = ksize / 2;
    let padded = pad_symmetric(values, height, width, radius);
    let pw = width + 2 * radius;
    let mut out = vec![0.0; height * width];
    for (r, dst) in out.chunks_exact_mut(width).enumerate() {
        for ky in 0..ksize {
            let line = &padded[(r + ky) * pw..(r + ky + 1) * pw];
            for kx in 0..ksize {
                let k = kernel[ky * ksize + kx];
                for (o, &v) in dst.iter_mut().zip(&line[kx..kx + width]) {
                    *o += k * v;
                }
            }
        }
    }
    out
}
