//! Interpolation kernels, separable resizing and rotation.

use crate::image::GrayImage;

/// Keys cubic convolution kernel with `a = -0.5`.
#[inline]
pub fn cubic(x: f64) -> f64 {
    const A: f64 = -0.5;
    let x = x.abs();
    if x <= 1.0 {
        ((A + 2.0) * x - (A + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((A * x - 5.0 * A) * x + 8.0 * A) * x - 4.0 * A
    } else {
        0.0
    }
}

#[inline]
fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Lanczos window of order `a` (2 or 3 in practice).
#[inline]
pub fn lanczos(x: f64, a: usize) -> f64 {
    let a = a as f64;
    if x.abs() < a {
        sinc(x) * sinc(x / a)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Cubic,
    Lanczos2,
    Lanczos3,
}

impl Kernel {
    fn support(self) -> f64 {
        match self {
            Kernel::Cubic | Kernel::Lanczos2 => 2.0,
            Kernel::Lanczos3 => 3.0,
        }
    }

    fn eval(self, x: f64) -> f64 {
        match self {
            Kernel::Cubic => cubic(x),
            Kernel::Lanczos2 => lanczos(x, 2),
            Kernel::Lanczos3 => lanczos(x, 3),
        }
    }
}

/// Normalized weights for one output sample over the contiguous source
/// range `start..start + weights.len()` (borders already folded in).
#[derive(Debug, Clone)]
struct Taps {
    start: usize,
    weights: Vec<f64>,
}

/// A 1-D linear resampling operator, one [`Taps`] row per output sample.
#[derive(Debug, Clone)]
pub(crate) struct Resampler {
    src_len: usize,
    rows: Vec<Taps>,
}

impl Resampler {
    /// Pixel-center aligned resampling of `src_len` samples to `dst_len` with
    /// replicated borders. Downscaling stretches the kernel by the scale
    /// factor (antialiasing).
    pub(crate) fn new(src_len: usize, dst_len: usize, kernel: Kernel) -> Self {
        let scale = src_len as f64 / dst_len as f64;
        let stretch = scale.max(1.0);
        let support = kernel.support() * stretch;
        let rows = (0..dst_len)
            .map(|i| {
                let center = (i as f64 + 0.5) * scale - 0.5;
                let first = (center - support).floor() as isize + 1;
                let last = (center + support).ceil() as isize;
                let lo = clamp_index(first, src_len);
                let hi = clamp_index(last - 1, src_len);
                let mut weights = vec![0.0; hi - lo + 1];
                for j in first..last {
                    weights[clamp_index(j, src_len) - lo] +=
                        kernel.eval((j as f64 - center) / stretch);
                }
                let sum: f64 = weights.iter().sum();
                weights.iter_mut().for_each(|w| *w /= sum);
                Taps { start: lo, weights }
            })
            .collect();
        Self { src_len, rows }
    }

    fn dst_len(&self) -> usize {
        self.rows.len()
    }

    /// Keeps output samples `offset..offset + len`.
    pub(crate) fn window(mut self, offset: usize, len: usize) -> Self {
        self.rows = self.rows.drain(offset..offset + len).collect();
        self
    }

    /// The operator applying `self` first and `then` second.
    pub(crate) fn then(&self, then: &Resampler) -> Resampler {
        debug_assert_eq!(then.src_len, self.dst_len());
        let rows = then
            .rows
            .iter()
            .map(|outer| {
                let inner = &self.rows[outer.start..outer.start + outer.weights.len()];
                let lo = inner.iter().map(|t| t.start).min().unwrap_or(0);
                let hi = inner
                    .iter()
                    .map(|t| t.start + t.weights.len())
                    .max()
                    .unwrap_or(0);
                let mut weights = vec![0.0; hi - lo];
                for (&wo, t) in outer.weights.iter().zip(inner) {
                    for (k, &wi) in t.weights.iter().enumerate() {
                        weights[t.start - lo + k] += wo * wi;
                    }
                }
                Taps { start: lo, weights }
            })
            .collect();
        Resampler {
            src_len: self.src_len,
            rows,
        }
    }
}

#[inline]
fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Applies a resampler along columns (`horizontal`) and rows (`vertical`).
pub(crate) fn resample_separable(
    image: &GrayImage,
    vertical: &Resampler,
    horizontal: &Resampler,
) -> GrayImage {
    let (h, w) = image.dims();
    debug_assert_eq!((vertical.src_len, horizontal.src_len), (h, w));
    let width = horizontal.dst_len();
    let height = vertical.dst_len();
    let src: Vec<f64> = image.data().iter().map(|&v| v as f64).collect();

    let mut rows_out = vec![0.0; h * width];
    for (row, dst) in src.chunks_exact(w).zip(rows_out.chunks_exact_mut(width)) {
        for (o, t) in dst.iter_mut().zip(&horizontal.rows) {
            *o = t
                .weights
                .iter()
                .zip(&row[t.start..])
                .map(|(&wt, &v)| wt * v)
                .sum();
        }
    }

    let mut out = vec![0.0f32; height * width];
    let mut acc = vec![0.0f64; width];
    for (t, dst) in vertical.rows.iter().zip(out.chunks_exact_mut(width)) {
        acc.iter_mut().for_each(|v| *v = 0.0);
        for (k, &wt) in t.weights.iter().enumerate() {
            let line = &rows_out[(t.start + k) * width..][..width];
            for (a, &v) in acc.iter_mut().zip(line) {
                *a += wt * v;
            }
        }
        for (o, &a) in dst.iter_mut().zip(&acc) {
            *o = a as f32;
        }
    }
    GrayImage::new(height, width, out).expect("finite resize output")
}

/// Separable resize with replicated borders.
pub fn resize(image: &GrayImage, height: usize, width: usize, kernel: Kernel) -> GrayImage {
    let (h, w) = image.dims();
    resample_separable(
        image,
        &Resampler::new(h, height, kernel),
        &Resampler::new(w, width, kernel),
    )
}

/// Bicubic sample at a fractional position, replicated borders.
pub fn sample_cubic(image: &GrayImage, y: f64, x: f64) -> f64 {
    let (h, w) = image.dims();
    let (y0, x0) = (y.floor(), x.floor());
    let (ty, tx) = (y - y0, x - x0);
    let wy = [cubic(ty + 1.0), cubic(ty), cubic(1.0 - ty), cubic(2.0 - ty)];
    let wx = [cubic(tx + 1.0), cubic(tx), cubic(1.0 - tx), cubic(2.0 - tx)];
    let (y0, x0) = (y0 as isize, x0 as isize);
    let cols = [
        clamp_index(x0 - 1, w),
        clamp_index(x0, w),
        clamp_index(x0 + 1, w),
        clamp_index(x0 + 2, w),
    ];
    let mut acc = 0.0;
    for (dy, &wyv) in wy.iter().enumerate() {
        let row = image.row(clamp_index(y0 - 1 + dy as isize, h));
        let mut line = 0.0;
        for (&c, &wxv) in cols.iter().zip(&wx) {
            line += wxv * row[c] as f64;
        }
        acc += wyv * line;
    }
    acc
}

/// Rotation result: pixels whose source fell outside the frame are flagged.
pub struct Rotated {
    pub image: GrayImage,
    pub defined: Vec<bool>,
}

/// Same-size bicubic rotation by `degrees` (counter-clockwise as displayed)
/// about the exact image center. Undefined pixels are left at zero.
pub fn rotate_bicubic(image: &GrayImage, degrees: f64) -> Rotated {
    let (h, w) = image.dims();
    let (cy, cx) = ((h as f64 - 1.0) / 2.0, (w as f64 - 1.0) / 2.0);
    let (sin, cos) = degrees.to_radians().sin_cos();
    let tol = 1e-9;
    let mut out = GrayImage::zeros(h, w);
    let mut defined = vec![false; h * w];
    for r in 0..h {
        let dy = r as f64 - cy;
        for c in 0..w {
            let dx = c as f64 - cx;
            let sx = cos * dx - sin * dy + cx;
            let sy = sin * dx + cos * dy + cy;
            if sx < -tol || sy < -tol || sx > w as f64 - 1.0 + tol || sy > h as f64 - 1.0 + tol {
                continue;
            }
            out.set(r, c, sample_cubic(image, sy, sx) as f32);
            defined[r * w + c] = true;
        }
    }
    Rotated {
        image: out,
        defined,
    }
}

/// Fills undefined pixels by linear extrapolation along the ray toward the
/// image center: from the first two defined pixels met on that ray, the
/// line through them is evaluated back at the undefined pixel.
pub fn extrapolate_undefined(rotated: &Rotated) -> GrayImage {
    let img = &rotated.image;
    let (h, w) = img.dims();
    let (cy, cx) = ((h as f64 - 1.0) / 2.0, (w as f64 - 1.0) / 2.0);
    let mut out = img.clone();
    let defined = |r: isize, c: isize| {
        r >= 0 && c >= 0 && (r as usize) < h && (c as usize) < w && rotated.defined[r as usize * w + c as usize]
    };
    let max_steps = (h + w) as isize;
    for r in 0..h {
        for c in 0..w {
            if rotated.defined[r * w + c] {
                continue;
            }
            let (vy, vx) = (cy - r as f64, cx - c as f64);
            let norm = (vy * vy + vx * vx).sqrt();
            if norm == 0.0 {
                continue;
            }
            let (uy, ux) = (vy / norm, vx / norm);
            let at = |t: f64| {
                (
                    (r as f64 + uy * t).round() as isize,
                    (c as f64 + ux * t).round() as isize,
                )
            };
            let mut hit = None;
            for step in 1..=max_steps {
                let (qr, qc) = at(step as f64);
                if defined(qr, qc) {
                    hit = Some((step as f64, qr, qc));
                    break;
                }
            }
            let Some((t1, r1, c1)) = hit else { continue };
            let v1 = img.get(r1 as usize, c1 as usize) as f64;
            let (r2, c2) = at(t1 + 1.0);
            let v2 = if defined(r2, c2) && (r2, c2) != (r1, c1) {
                img.get(r2 as usize, c2 as usize) as f64
            } else {
                v1
            };
            out.set(r, c, (v1 + (v1 - v2) * t1) as f32);
        }
    }
    out
}
