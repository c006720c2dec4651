//! Circular cross-correlation of mean-removed rasters via the 2-D FFT.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::image::GrayImage;

/// Normalized correlation at every circular shift.
///
/// `value(s) = sum_p a'(p) b'(p + s) / (|a'| |b'|)` with `a'`, `b'` the
/// mean-removed inputs; identically zero if either input is constant.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSurface {
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
    /// Index of the maximum absolute value (first in row-major order on ties).
    pub peak: (usize, usize),
}

impl CorrelationSurface {
    fn from_values(height: usize, width: usize, values: Vec<f64>) -> Self {
        let mut best = 0;
        let mut best_abs = f64::NEG_INFINITY;
        for (i, v) in values.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        Self {
            height,
            width,
            values,
            peak: (best / width, best % width),
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn peak_value(&self) -> f64 {
        self.get(self.peak.0, self.peak.1)
    }
}

/// Planned forward/inverse 2-D FFTs for one raster size.
pub struct Fft2 {
    height: usize,
    width: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(height: usize, width: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            height,
            width,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    fn run(&self, buf: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        const BLOCK: usize = 16;
        let (h, w) = (self.height, self.width);
        let zero = Complex64::new(0.0, 0.0);
        let mut scratch = vec![zero; rows.get_inplace_scratch_len().max(cols.get_inplace_scratch_len())];
        rows.process_with_scratch(buf, &mut scratch[..rows.get_inplace_scratch_len()]);
        // Columns are gathered a block at a time into contiguous lanes.
        let mut lanes = vec![zero; BLOCK * h];
        for c0 in (0..w).step_by(BLOCK) {
            let bw = BLOCK.min(w - c0);
            for r in 0..h {
                for (k, &v) in buf[r * w + c0..r * w + c0 + bw].iter().enumerate() {
                    lanes[k * h + r] = v;
                }
            }
            cols.process_with_scratch(&mut lanes[..bw * h], &mut scratch[..cols.get_inplace_scratch_len()]);
            for r in 0..h {
                for (k, v) in buf[r * w + c0..r * w + c0 + bw].iter_mut().enumerate() {
                    *v = lanes[k * h + r];
                }
            }
        }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.row_fwd, &self.col_fwd);
    }

    /// Unnormalized inverse (rustfft convention).
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.row_inv, &self.col_inv);
    }
}

/// Mean-removed, unit-norm copy; `None` for a constant input.
fn normalized(values: impl ExactSizeIterator<Item = f64>) -> Option<Vec<f64>> {
    let mut data: Vec<f64> = values.collect();
    let mean = data.iter().sum::<f64>() / data.len() as f64;
    let mut norm = 0.0;
    for v in &mut data {
        *v -= mean;
        norm += *v * *v;
    }
    if norm > 0.0 {
        let scale = 1.0 / norm.sqrt();
        data.iter_mut().for_each(|v| *v *= scale);
        Some(data)
    } else {
        None
    }
}

/// Mean-removed, unit-norm spectrum of one correlation operand.
pub struct Spectrum {
    values: Vec<Complex64>,
    /// False when the input was constant (zero after mean removal).
    nonzero: bool,
}

impl Spectrum {
    pub fn new(fft: &Fft2, image: &GrayImage) -> Self {
        Self::from_values(fft, image.data().iter().map(|&v| v as f64))
    }

    pub fn from_values(fft: &Fft2, values: impl ExactSizeIterator<Item = f64>) -> Self {
        let n = fft.height * fft.width;
        assert_eq!(values.len(), n, "operand size does not match the FFT plan");
        match normalized(values) {
            Some(data) => {
                let mut buf: Vec<Complex64> =
                    data.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
                fft.forward(&mut buf);
                Self {
                    values: buf,
                    nonzero: true,
                }
            }
            None => Self {
                values: vec![Complex64::new(0.0, 0.0); n],
                nonzero: false,
            },
        }
    }
}

/// Correlates two prepared spectra: `sum_p a(p) b(p + s)`.
pub fn correlate_spectra(fft: &Fft2, a: &Spectrum, b: &Spectrum) -> CorrelationSurface {
    let (h, w) = fft.dims();
    let n = h * w;
    if !a.nonzero || !b.nonzero {
        return CorrelationSurface::from_values(h, w, vec![0.0; n]);
    }
    let mut prod: Vec<Complex64> = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| x.conj() * y)
        .collect();
    fft.inverse(&mut prod);
    let inv_n = 1.0 / n as f64;
    CorrelationSurface::from_values(h, w, prod.iter().map(|z| z.re * inv_n).collect())
}

/// Correlates a prepared spectrum with two real operands at the cost of one
/// forward and one inverse transform: the operands travel as the real and
/// imaginary parts of a single complex signal, and correlation is linear.
pub fn correlate_pair(
    fft: &Fft2,
    a: &Spectrum,
    first: impl ExactSizeIterator<Item = f64>,
    second: impl ExactSizeIterator<Item = f64>,
) -> (CorrelationSurface, CorrelationSurface) {
    let (h, w) = fft.dims();
    let n = h * w;
    assert!(first.len() == n && second.len() == n, "operand size does not match the FFT plan");
    let (first, second) = (normalized(first), normalized(second));
    let zero = || CorrelationSurface::from_values(h, w, vec![0.0; n]);
    if !a.nonzero || (first.is_none() && second.is_none()) {
        return (zero(), zero());
    }
    let mut buf: Vec<Complex64> = (0..n)
        .map(|i| {
            Complex64::new(
                first.as_ref().map_or(0.0, |v| v[i]),
                second.as_ref().map_or(0.0, |v| v[i]),
            )
        })
        .collect();
    fft.forward(&mut buf);
    for (z, x) in buf.iter_mut().zip(&a.values) {
        *z *= x.conj();
    }
    fft.inverse(&mut buf);
    let inv_n = 1.0 / n as f64;
    let part = |present: bool, f: fn(&Complex64) -> f64| {
        if present {
            CorrelationSurface::from_values(h, w, buf.iter().map(|z| f(z) * inv_n).collect())
        } else {
            zero()
        }
    };
    (
        part(first.is_some(), |z| z.re),
        part(second.is_some(), |z| z.im),
    )
}

pub fn xcorr2(a: &GrayImage, b: &GrayImage) -> Result<CorrelationSurface> {
    a.ensure_same_dims(b)?;
    let fft = Fft2::new(a.height(), a.width());
    let sa = Spectrum::new(&fft, a);
    let sb = Spectrum::new(&fft, b);
    Ok(correlate_spectra(&fft, &sa, &sb))
}
