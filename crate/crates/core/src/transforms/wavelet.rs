//! Separable orthogonal 2-D discrete wavelet transform with periodic
//! boundary extension.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;

const HAAR: [f64; 2] = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];

const DB4: [f64; 8] = [
    0.230_377_813_308_896_5,
    0.714_846_570_552_915_6,
    0.630_880_767_929_858_9,
    -0.027_983_769_416_859_854,
    -0.187_034_811_719_093_08,
    0.030_841_381_835_560_764,
    0.032_883_011_666_885_2,
    -0.010_597_401_785_069_032,
];

const DB8: [f64; 16] = [
    0.054_415_842_243_104_01,
    0.312_871_590_914_299_97,
    0.675_630_736_297_289_8,
    0.585_354_683_654_206_7,
    -0.015_829_105_256_349_306,
    -0.284_015_542_961_546_93,
    0.000_472_484_573_913_282_8,
    0.128_747_426_620_478_46,
    -0.017_369_301_001_807_546,
    -0.044_088_253_930_794_75,
    0.013_981_027_917_398_282,
    0.008_746_094_047_405_777,
    -0.004_870_352_993_451_574,
    -0.000_391_740_373_376_947,
    0.000_675_449_406_450_569_4,
    -0.000_117_476_784_124_769_53,
];

/// Orthogonal wavelet families available to the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WaveletFamily {
    Haar,
    Db4,
    #[default]
    Db8,
}

impl WaveletFamily {
    /// Minimum-phase scaling (lowpass synthesis) filter.
    pub fn lowpass(self) -> &'static [f64] {
        match self {
            WaveletFamily::Haar => &HAAR,
            WaveletFamily::Db4 => &DB4,
            WaveletFamily::Db8 => &DB8,
        }
    }

    /// Quadrature mirror highpass: `g[j] = (-1)^j h[L-1-j]`.
    pub fn highpass(self) -> Vec<f64> {
        let h = self.lowpass();
        let l = h.len();
        (0..l)
            .map(|j| if j % 2 == 0 { h[l - 1 - j] } else { -h[l - 1 - j] })
            .collect()
    }
}

impl std::str::FromStr for WaveletFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haar" | "db1" => Ok(WaveletFamily::Haar),
            "db4" => Ok(WaveletFamily::Db4),
            "db8" => Ok(WaveletFamily::Db8),
            other => Err(Error::Config(format!("unknown wavelet family {other:?}"))),
        }
    }
}

/// Detail subbands of one decomposition level.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailLevel {
    /// Lowpass across columns, highpass down rows.
    pub horizontal: GrayImage,
    /// Highpass across columns, lowpass down rows.
    pub vertical: GrayImage,
    pub diagonal: GrayImage,
}

impl DetailLevel {
    pub fn subbands(&self) -> [&GrayImage; 3] {
        [&self.horizontal, &self.vertical, &self.diagonal]
    }

    pub fn subbands_mut(&mut self) -> [&mut GrayImage; 3] {
        [&mut self.horizontal, &mut self.vertical, &mut self.diagonal]
    }
}

/// Multi-level decomposition. `details[0]` is the finest level.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    pub family: WaveletFamily,
    /// Input shape seen by each level, finest first.
    pub shapes: Vec<(usize, usize)>,
    pub details: Vec<DetailLevel>,
    pub approximation: GrayImage,
}

impl WaveletPyramid {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn coefficient_count(&self) -> usize {
        self.approximation.len()
            + self
                .details
                .iter()
                .map(|d| d.subbands().iter().map(|s| s.len()).sum::<usize>())
                .sum::<usize>()
    }

    pub fn energy(&self) -> f64 {
        self.approximation.energy()
            + self
                .details
                .iter()
                .flat_map(|d| d.subbands())
                .map(GrayImage::energy)
                .sum::<f64>()
    }

    fn validate(&self) -> Result<()> {
        if self.details.is_empty() || self.shapes.len() != self.details.len() {
            return Err(Error::MalformedPyramid(format!(
                "{} detail levels with {} recorded shapes",
                self.details.len(),
                self.shapes.len()
            )));
        }
        for (k, (&(h, w), level)) in self.shapes.iter().zip(&self.details).enumerate() {
            let expected = (h.div_ceil(2), w.div_ceil(2));
            for band in level.subbands() {
                if band.dims() != expected {
                    return Err(Error::MalformedPyramid(format!(
                        "level {k} subband is {:?}, expected {expected:?}",
                        band.dims()
                    )));
                }
            }
            let next = self.shapes.get(k + 1).copied();
            if let Some(next) = next {
                if next != expected {
                    return Err(Error::MalformedPyramid(format!(
                        "level {} shape {next:?} does not follow {expected:?}",
                        k + 1
                    )));
                }
            }
        }
        let last = self.shapes[self.shapes.len() - 1];
        if self.approximation.dims() != (last.0.div_ceil(2), last.1.div_ceil(2)) {
            return Err(Error::MalformedPyramid("approximation shape".into()));
        }
        Ok(())
    }
}

/// Number of leading outputs whose filter window does not wrap around.
#[inline]
fn unwrapped(n: usize, taps: usize) -> usize {
    if n >= taps {
        (n - taps) / 2 + 1
    } else {
        0
    }
}

/// Forward transform of an even-length periodic signal into `lo` and `hi`.
fn analyze_1d(x: &[f64], h: &[f64], g: &[f64], lo: &mut [f64], hi: &mut [f64]) {
    let n = x.len();
    debug_assert!(n % 2 == 0);
    let split = unwrapped(n, h.len());
    for k in 0..n / 2 {
        let (mut a, mut d) = (0.0, 0.0);
        let base = 2 * k;
        if k < split {
            for ((&hj, &gj), &v) in h.iter().zip(g).zip(&x[base..base + h.len()]) {
                a += hj * v;
                d += gj * v;
            }
        } else {
            for (j, (&hj, &gj)) in h.iter().zip(g).enumerate() {
                let v = x[(base + j) % n];
                a += hj * v;
                d += gj * v;
            }
        }
        lo[k] = a;
        hi[k] = d;
    }
}

/// Adjoint of [`analyze_1d`]; `out` has length `2 * lo.len()`.
fn synthesize_1d(lo: &[f64], hi: &[f64], h: &[f64], g: &[f64], out: &mut [f64]) {
    let n = out.len();
    let split = unwrapped(n, h.len());
    out.iter_mut().for_each(|v| *v = 0.0);
    for k in 0..lo.len() {
        let base = 2 * k;
        let (a, d) = (lo[k], hi[k]);
        if k < split {
            for ((&hj, &gj), o) in h.iter().zip(g).zip(&mut out[base..base + h.len()]) {
                *o += hj * a + gj * d;
            }
        } else {
            for (j, (&hj, &gj)) in h.iter().zip(g).enumerate() {
                out[(base + j) % n] += hj * a + gj * d;
            }
        }
    }
}

/// Column-wise [`analyze_1d`] over a `rows x cols` block, processing whole
/// rows at a time. Odd row counts repeat the last row.
fn analyze_columns(src: &[f64], rows: usize, cols: usize, h: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let half = rows.div_ceil(2);
    let ext = 2 * half;
    let mut low = vec![0.0; half * cols];
    let mut high = vec![0.0; half * cols];
    for k in 0..half {
        let lo = &mut low[k * cols..(k + 1) * cols];
        let hi = &mut high[k * cols..(k + 1) * cols];
        for (j, (&hj, &gj)) in h.iter().zip(g).enumerate() {
            let r = ((2 * k + j) % ext).min(rows - 1);
            let line = &src[r * cols..(r + 1) * cols];
            for ((l, d), &v) in lo.iter_mut().zip(hi.iter_mut()).zip(line) {
                *l += hj * v;
                *d += gj * v;
            }
        }
    }
    (low, high)
}

/// Adjoint of [`analyze_columns`], keeping the first `rows` rows.
fn synthesize_columns(
    low: &[f64],
    high: &[f64],
    rows: usize,
    cols: usize,
    h: &[f64],
    g: &[f64],
) -> Vec<f64> {
    let half = low.len() / cols;
    let ext = 2 * half;
    let mut out = vec![0.0; ext * cols];
    for k in 0..half {
        let lo = &low[k * cols..(k + 1) * cols];
        let hi = &high[k * cols..(k + 1) * cols];
        for (j, (&hj, &gj)) in h.iter().zip(g).enumerate() {
            let r = (2 * k + j) % ext;
            let line = &mut out[r * cols..(r + 1) * cols];
            for ((o, &a), &d) in line.iter_mut().zip(lo).zip(hi) {
                *o += hj * a + gj * d;
            }
        }
    }
    out.truncate(rows * cols);
    out
}

/// Row-major f64 plane used while a level is being processed.
struct Plane {
    h: usize,
    w: usize,
    v: Vec<f64>,
}

impl Plane {
    fn from_image(img: &GrayImage) -> Self {
        Self {
            h: img.height(),
            w: img.width(),
            v: img.data().iter().map(|&x| x as f64).collect(),
        }
    }

    fn to_image(&self) -> GrayImage {
        GrayImage::new(self.h, self.w, self.v.iter().map(|&x| x as f32).collect())
            .expect("finite wavelet coefficients")
    }
}

fn one_level(input: &Plane, h: &[f64], g: &[f64]) -> (Plane, DetailLevel) {
    let (rows, cols) = (input.h, input.w);
    let (half_r, half_c) = (rows.div_ceil(2), cols.div_ceil(2));
    let ext_c = 2 * half_c;

    // Row pass: each row -> [lo | hi], odd lengths padded by repeating the last sample.
    let mut row_lo = vec![0.0; rows * half_c];
    let mut row_hi = vec![0.0; rows * half_c];
    let mut buf = vec![0.0; ext_c];
    for r in 0..rows {
        buf[..cols].copy_from_slice(&input.v[r * cols..(r + 1) * cols]);
        if ext_c > cols {
            buf[cols] = buf[cols - 1];
        }
        analyze_1d(
            &buf,
            h,
            g,
            &mut row_lo[r * half_c..(r + 1) * half_c],
            &mut row_hi[r * half_c..(r + 1) * half_c],
        );
    }

    // Column pass over both row outputs.
    let (ll, lh) = analyze_columns(&row_lo, rows, half_c, h, g);
    let (hl, hh) = analyze_columns(&row_hi, rows, half_c, h, g);

    let plane = |v| Plane {
        h: half_r,
        w: half_c,
        v,
    };
    let detail = DetailLevel {
        horizontal: plane(lh).to_image(),
        vertical: plane(hl).to_image(),
        diagonal: plane(hh).to_image(),
    };
    (plane(ll), detail)
}

fn inverse_level(
    approx: &Plane,
    detail: &DetailLevel,
    shape: (usize, usize),
    h: &[f64],
    g: &[f64],
) -> Plane {
    let (rows, cols) = shape;
    let half_c = approx.w;
    let ext_c = 2 * half_c;
    let lh = Plane::from_image(&detail.horizontal);
    let hl = Plane::from_image(&detail.vertical);
    let hh = Plane::from_image(&detail.diagonal);

    // Undo the column pass.
    let row_lo = synthesize_columns(&approx.v, &lh.v, rows, half_c, h, g);
    let row_hi = synthesize_columns(&hl.v, &hh.v, rows, half_c, h, g);

    // Undo the row pass.
    let mut out = vec![0.0; rows * cols];
    let mut buf = vec![0.0; ext_c];
    for r in 0..rows {
        synthesize_1d(
            &row_lo[r * half_c..(r + 1) * half_c],
            &row_hi[r * half_c..(r + 1) * half_c],
            h,
            g,
            &mut buf,
        );
        out[r * cols..(r + 1) * cols].copy_from_slice(&buf[..cols]);
    }
    Plane {
        h: rows,
        w: cols,
        v: out,
    }
}

/// Forward multi-level decomposition with the default family (Daubechies-8).
pub fn dwt2(image: &GrayImage, levels: usize) -> Result<WaveletPyramid> {
    dwt2_with(image, levels, WaveletFamily::default())
}

/// Forward multi-level decomposition.
///
/// Each dimension must be at least `2^levels`. Odd extents are padded by
/// repeating the last row/column, so subbands have `ceil(n/2)` samples and
/// the pyramid is critically sampled whenever both sides divide `2^levels`.
pub fn dwt2_with(
    image: &GrayImage,
    levels: usize,
    family: WaveletFamily,
) -> Result<WaveletPyramid> {
    let (height, width) = image.dims();
    if levels == 0 || levels >= usize::BITS as usize || height.min(width) < (1usize << levels) {
        return Err(Error::TooManyLevels {
            levels,
            height,
            width,
        });
    }
    let h = family.lowpass();
    let g = family.highpass();
    let mut current = Plane::from_image(image);
    let mut shapes = Vec::with_capacity(levels);
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        shapes.push((current.h, current.w));
        let (next, detail) = one_level(&current, h, &g);
        details.push(detail);
        current = next;
    }
    Ok(WaveletPyramid {
        family,
        shapes,
        details,
        approximation: current.to_image(),
    })
}

/// Inverse of [`dwt2_with`].
pub fn idwt2(pyramid: &WaveletPyramid) -> Result<GrayImage> {
    pyramid.validate()?;
    let h = pyramid.family.lowpass();
    let g = pyramid.family.highpass();
    let mut current = Plane::from_image(&pyramid.approximation);
    for (detail, &shape) in pyramid.details.iter().zip(&pyramid.shapes).rev() {
        current = inverse_level(&current, detail, shape, h, &g);
    }
    Ok(current.to_image())
}
