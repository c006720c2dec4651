//! Counter-forensic attacks behind a uniform, seed-deterministic dispatch.
//!
//! Every attack maps a `[0, 255]` raster to a raster of the same size,
//! clamped back to `[0, 255]`.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::denoise::{
    lucy_richardson, spatial_wiener, wavelet_wiener_with, PointSpreadFunction,
    WaveletWienerConfig,
};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::resample::{
    extrapolate_undefined, resample_separable, resize, rotate_bicubic, Kernel, Resampler,
};
use crate::rng::{derive_seed, seeded, Rng};
use crate::transforms::dct::{for_each_tile, DctDirection, BLOCK};
use crate::transforms::WaveletFamily;

/// Luminance quantization table from the JPEG standard's informative annex,
/// row-major by (vertical, horizontal) frequency.
pub const JPEG_LUMA_TABLE: [[f64; 8]; 8] = [
    [16.0, 11.0, 10.0, 16.0, 24.0, 40.0, 51.0, 61.0],
    [12.0, 12.0, 14.0, 19.0, 26.0, 58.0, 60.0, 55.0],
    [14.0, 13.0, 16.0, 24.0, 40.0, 57.0, 69.0, 56.0],
    [14.0, 17.0, 22.0, 29.0, 51.0, 87.0, 80.0, 62.0],
    [18.0, 22.0, 37.0, 56.0, 68.0, 109.0, 103.0, 77.0],
    [24.0, 35.0, 55.0, 64.0, 81.0, 104.0, 113.0, 92.0],
    [49.0, 64.0, 78.0, 87.0, 103.0, 121.0, 120.0, 101.0],
    [72.0, 92.0, 95.0, 98.0, 112.0, 100.0, 103.0, 99.0],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    Lsb,
    DctNoise,
    Scramble,
    Rotate,
    Rescale,
    SpatialWiener,
    WaveletWiener,
    ComboNoiseGeom,
    ComboWienerRotateDeblur,
    Definite,
}

impl AttackKind {
    pub const ALL: [AttackKind; 10] = [
        AttackKind::Lsb,
        AttackKind::DctNoise,
        AttackKind::Scramble,
        AttackKind::Rotate,
        AttackKind::Rescale,
        AttackKind::SpatialWiener,
        AttackKind::WaveletWiener,
        AttackKind::ComboNoiseGeom,
        AttackKind::ComboWienerRotateDeblur,
        AttackKind::Definite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackKind::Lsb => "lsb",
            AttackKind::DctNoise => "dct_noise",
            AttackKind::Scramble => "scramble",
            AttackKind::Rotate => "rotate",
            AttackKind::Rescale => "rescale",
            AttackKind::SpatialWiener => "spatial_wiener",
            AttackKind::WaveletWiener => "wavelet_wiener",
            AttackKind::ComboNoiseGeom => "combo_noise_geom",
            AttackKind::ComboWienerRotateDeblur => "combo_wiener_rotate_deblur",
            AttackKind::Definite => "definite",
        }
    }

    /// Attacks that move pixels, which makes same-position SNR pessimistic.
    pub fn is_geometric(self) -> bool {
        matches!(
            self,
            AttackKind::Scramble
                | AttackKind::Rotate
                | AttackKind::Rescale
                | AttackKind::ComboNoiseGeom
                | AttackKind::ComboWienerRotateDeblur
                | AttackKind::Definite
        )
    }

    pub fn is_randomized(self) -> bool {
        matches!(
            self,
            AttackKind::Lsb | AttackKind::DctNoise | AttackKind::Scramble | AttackKind::ComboNoiseGeom
        )
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AttackKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown attack kind {s:?}")))
    }
}

/// Parameter record shared by all attack kinds; each kind reads its subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackParams {
    /// Randomized low bits.
    pub n: u32,
    /// Scramble radius in pixels.
    pub r: u32,
    /// Rotation angle, degrees.
    pub alpha: f64,
    /// De-rotation error, degrees.
    pub beta: f64,
    /// Integer up-scaling factor.
    pub sf: u32,
    /// Spatial Wiener window.
    pub window: usize,
    /// Noise std assumed by the wavelet Wiener attack.
    pub sigma0: f64,
    pub levels: usize,
    pub family: WaveletFamily,
    pub psf_size: usize,
    pub psf_sigma: f64,
    pub iterations: usize,
    /// JPEG-style quality (1-100) scaling the DCT noise table; 100 disables noise.
    pub dct_quality: f64,
    /// Scramble displacement std as a fraction of `r`.
    pub scramble_sigma_ratio: f64,
    pub dct_table: [[f64; 8]; 8],
}

impl Default for AttackParams {
    fn default() -> Self {
        Self {
            n: 3,
            r: 1,
            alpha: 10.0,
            beta: 0.5,
            sf: 3,
            window: 3,
            sigma0: 3.0,
            levels: 4,
            family: WaveletFamily::Db8,
            psf_size: 3,
            psf_sigma: 0.8,
            iterations: 10,
            dct_quality: 99.0,
            scramble_sigma_ratio: 0.5,
            dct_table: JPEG_LUMA_TABLE,
        }
    }
}

impl AttackParams {
    /// Defaults for one kind: the scramble row uses `r = 1`, the noise and
    /// geometry cascade uses `r = 2`.
    pub fn defaults_for(kind: AttackKind) -> Self {
        let mut p = Self::default();
        if kind == AttackKind::ComboNoiseGeom {
            p.r = 2;
        }
        p
    }

    /// Multiplier applied to the quantization table, from the JPEG quality
    /// scaling rule.
    pub fn dct_noise_scale(&self) -> f64 {
        let q = self.dct_quality.clamp(1.0, 100.0);
        if q < 50.0 {
            50.0 / q
        } else {
            (200.0 - 2.0 * q) / 100.0
        }
    }

    pub fn psf(&self) -> Result<PointSpreadFunction> {
        PointSpreadFunction::gaussian(self.psf_size, self.psf_sigma)
    }

    fn wavelet_config(&self) -> WaveletWienerConfig {
        WaveletWienerConfig {
            sigma0: self.sigma0,
            levels: self.levels,
            family: self.family,
        }
    }

    /// Sets one parameter from its textual form (`key=value` on the CLI).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("bad value {value:?} for {key}")))
        }
        match key {
            "n" => self.n = parse(key, value)?,
            "r" => self.r = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "beta" => self.beta = parse(key, value)?,
            "sf" => self.sf = parse(key, value)?,
            "window" => self.window = parse(key, value)?,
            "sigma0" => self.sigma0 = parse(key, value)?,
            "levels" => self.levels = parse(key, value)?,
            "family" => self.family = value.parse()?,
            "psf_size" => self.psf_size = parse(key, value)?,
            "psf_sigma" => self.psf_sigma = parse(key, value)?,
            "iterations" => self.iterations = parse(key, value)?,
            "dct_quality" => self.dct_quality = parse(key, value)?,
            "scramble_sigma_ratio" => self.scramble_sigma_ratio = parse(key, value)?,
            "dct_table" => self.dct_table = parse_table(value)?,
            other => return Err(Error::InvalidSpec(format!("unknown attack parameter {other:?}"))),
        }
        Ok(())
    }
}

/// An 8x8 table as nested JSON arrays or 64 numbers separated by commas or
/// whitespace, row-major.
fn parse_table(value: &str) -> Result<[[f64; 8]; 8]> {
    if let Ok(table) = serde_json::from_str::<[[f64; 8]; 8]>(value) {
        return Ok(table);
    }
    let numbers = value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::InvalidSpec(format!("bad DCT table {value:?}")))?;
    if numbers.len() != 64 {
        return Err(Error::InvalidSpec(format!(
            "DCT table needs 64 entries, got {}",
            numbers.len()
        )));
    }
    let mut table = [[0.0; 8]; 8];
    for (i, v) in numbers.into_iter().enumerate() {
        table[i / 8][i % 8] = v;
    }
    Ok(table)
}

/// One attack with its parameters and random seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub params: AttackParams,
    pub seed: u64,
}

impl AttackSpec {
    pub fn new(kind: AttackKind, seed: u64) -> Self {
        Self {
            kind,
            params: AttackParams::defaults_for(kind),
            seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        let uses = |kinds: &[AttackKind]| kinds.contains(&self.kind);
        use AttackKind::*;
        if uses(&[Lsb, ComboNoiseGeom]) && !(1..=7).contains(&p.n) {
            return bad(format!("n must be in 1..=7, got {}", p.n));
        }
        if uses(&[Scramble, ComboNoiseGeom]) {
            if p.r < 1 {
                return bad("r must be >= 1".into());
            }
            if !(p.scramble_sigma_ratio > 0.0) {
                return bad("scramble_sigma_ratio must be positive".into());
            }
        }
        if uses(&[Rotate, ComboNoiseGeom, ComboWienerRotateDeblur, Definite])
            && !(p.beta > 0.0 && p.beta < p.alpha && p.alpha < 90.0)
        {
            return bad(format!(
                "need 0 < beta < alpha < 90, got alpha={} beta={}",
                p.alpha, p.beta
            ));
        }
        if uses(&[Rescale, ComboNoiseGeom]) && p.sf < 2 {
            return bad(format!("sf must be >= 2, got {}", p.sf));
        }
        if uses(&[SpatialWiener, ComboWienerRotateDeblur, Definite])
            && (p.window < 3 || p.window % 2 == 0)
        {
            return bad(format!("window must be odd and >= 3, got {}", p.window));
        }
        if uses(&[WaveletWiener]) && (!(p.sigma0 > 0.0) || p.levels == 0) {
            return bad("sigma0 must be positive and levels >= 1".into());
        }
        if uses(&[ComboWienerRotateDeblur, Definite]) {
            if p.iterations == 0 {
                return bad("iterations must be >= 1".into());
            }
            p.psf()?;
        }
        if uses(&[DctNoise]) {
            if !(1.0..=100.0).contains(&p.dct_quality) {
                return bad(format!("dct_quality must be in 1..=100, got {}", p.dct_quality));
            }
            if p.dct_table.iter().flatten().any(|&q| !(q >= 0.0) || !q.is_finite()) {
                return bad("DCT table entries must be finite and non-negative".into());
            }
        }
        Ok(())
    }
}

/// Validates `spec`, runs the attack and clamps to `[0, 255]`.
pub fn apply_attack(image: &GrayImage, spec: &AttackSpec) -> Result<GrayImage> {
    spec.validate()?;
    dispatch(image, spec)
}

fn dispatch(image: &GrayImage, spec: &AttackSpec) -> Result<GrayImage> {
    let p = &spec.params;
    let mut out = match spec.kind {
        AttackKind::Lsb => attack_lsb(image, p.n, spec.seed),
        AttackKind::DctNoise => {
            attack_dct_noise_with(image, &p.dct_table, p.dct_noise_scale(), spec.seed)?
        }
        AttackKind::Scramble => scramble(image, p.r, p.scramble_sigma_ratio, spec.seed),
        AttackKind::Rotate => attack_rotate(image, p.alpha, p.beta),
        AttackKind::Rescale => attack_rescale(image, p.sf),
        AttackKind::SpatialWiener => spatial_wiener(image, p.window)?,
        AttackKind::WaveletWiener => wavelet_wiener_with(image, &p.wavelet_config())?.denoised,
        AttackKind::ComboNoiseGeom => attack_combo_noise_geom(image, p, spec.seed),
        AttackKind::ComboWienerRotateDeblur => attack_combo_wiener_rotate_deblur(image, p)?,
        AttackKind::Definite => attack_definite(image, p)?,
    };
    out.clamp_in_place();
    Ok(out)
}

/// Replaces the `n` low bits of every rounded pixel with random bits.
/// `n = 0` returns the input untouched.
pub fn attack_lsb(image: &GrayImage, n: u32, seed: u64) -> GrayImage {
    if n == 0 {
        return image.clone();
    }
    let n = n.min(8);
    let mask: u16 = (1u16 << n) - 1;
    let mut rng = seeded(seed);
    image.map_with_rng(&mut rng, |v, rng| {
        let px = v.clamp(0.0, 255.0).round() as u16;
        let bits = rng.random::<u16>() & mask;
        ((px & !mask) | bits) as f32
    })
}

/// Uniform noise on every DCT coefficient, bounded by the default table.
pub fn attack_dct_noise(image: &GrayImage, seed: u64) -> Result<GrayImage> {
    let params = AttackParams::default();
    attack_dct_noise_with(image, &params.dct_table, params.dct_noise_scale(), seed)
}

/// Adds to coefficient `(u, v)` of every tile a sample from
/// `[-scale*Q(u,v)/2, scale*Q(u,v)/2]`.
pub fn attack_dct_noise_with(
    image: &GrayImage,
    table: &[[f64; 8]; 8],
    scale: f64,
    seed: u64,
) -> Result<GrayImage> {
    let mut rng = seeded(seed);
    let mut out = for_each_tile(
        image,
        DctDirection::Forward,
        |_, _, block| {
            let noise = dct_noise_block(&mut rng, table, scale);
            for (row, nrow) in block.iter_mut().zip(&noise) {
                for (c, n) in row.iter_mut().zip(nrow) {
                    *c += n;
                }
            }
        },
        Some(DctDirection::Inverse),
    )?;
    out.clamp_in_place();
    Ok(out)
}

/// One tile of bounded uniform coefficient noise.
pub fn dct_noise_block(rng: &mut Rng, table: &[[f64; 8]; 8], scale: f64) -> [[f64; BLOCK]; BLOCK] {
    let mut noise = [[0.0; BLOCK]; BLOCK];
    for (nrow, qrow) in noise.iter_mut().zip(table) {
        for (n, &q) in nrow.iter_mut().zip(qrow) {
            let half = 0.5 * scale * q;
            let u: f64 = rng.random();
            *n = (2.0 * u - 1.0) * half;
        }
    }
    noise
}

/// Integer displacement with per-axis Gaussian std `sigma_ratio * r`,
/// resampled until both components lie within `r`.
pub fn scramble_displacement(rng: &mut Rng, r: u32, sigma_ratio: f64) -> (isize, isize) {
    let normal = Normal::new(0.0, sigma_ratio * r as f64).expect("positive std");
    let r = r as isize;
    loop {
        let dy = normal.sample(rng).round() as isize;
        let dx = normal.sample(rng).round() as isize;
        if dy.abs() <= r && dx.abs() <= r {
            return (dy, dx);
        }
    }
}

/// Moves every pixel to a nearby random source position (mirrored bounds).
pub fn attack_scramble(image: &GrayImage, r: u32, seed: u64) -> GrayImage {
    scramble(image, r, AttackParams::default().scramble_sigma_ratio, seed)
}

fn scramble(image: &GrayImage, r: u32, sigma_ratio: f64, seed: u64) -> GrayImage {
    let (h, w) = image.dims();
    let mut rng = seeded(seed);
    GrayImage::from_fn(h, w, |row, col| {
        let (dy, dx) = scramble_displacement(&mut rng, r, sigma_ratio);
        let sr = crate::denoise::reflect(row as isize + dy, h);
        let sc = crate::denoise::reflect(col as isize + dx, w);
        image.get(sr, sc)
    })
}

/// Rotation by `degrees` with linear extrapolation into undefined borders.
pub fn rotate_filled(image: &GrayImage, degrees: f64) -> GrayImage {
    extrapolate_undefined(&rotate_bicubic(image, degrees))
}

/// Bicubic rotation by `alpha`, then by `-alpha + beta`.
pub fn attack_rotate(image: &GrayImage, alpha: f64, beta: f64) -> GrayImage {
    let once = rotate_filled(image, alpha);
    let mut out = rotate_filled(&once, -alpha + beta);
    out.clamp_in_place();
    out
}

/// Lanczos-3 up-scaling by `sf`, removal of the first row and column, then
/// Lanczos-2 down-scaling back to the original size.
pub fn attack_rescale(image: &GrayImage, sf: u32) -> GrayImage {
    let (h, w) = image.dims();
    let sf = sf.max(1) as usize;
    // Both resamplings are linear per axis, so they are folded into one
    // operator per axis instead of materializing the large image.
    let axis = |n: usize| {
        let up = n * sf;
        let (offset, kept) = if up > 1 { (1, up - 1) } else { (0, up) };
        Resampler::new(n, up, Kernel::Lanczos3)
            .window(offset, kept)
            .then(&Resampler::new(kept, n, Kernel::Lanczos2))
    };
    let mut out = resample_separable(image, &axis(h), &axis(w));
    out.clamp_in_place();
    out
}

/// LSB randomization, scrambling, rotation and rescaling in cascade.
pub fn attack_combo_noise_geom(image: &GrayImage, params: &AttackParams, seed: u64) -> GrayImage {
    let noisy = attack_lsb(image, params.n, derive_seed(seed, &[1]));
    let scrambled = scramble(&noisy, params.r, params.scramble_sigma_ratio, derive_seed(seed, &[2]));
    let rotated = attack_rotate(&scrambled, params.alpha, params.beta);
    attack_rescale(&rotated, params.sf)
}

/// Spatial Wiener, rotation/de-rotation, Lucy-Richardson deblurring.
pub fn attack_combo_wiener_rotate_deblur(
    image: &GrayImage,
    params: &AttackParams,
) -> Result<GrayImage> {
    let smoothed = spatial_wiener(image, params.window)?;
    let rotated = attack_rotate(&smoothed, params.alpha, params.beta);
    let mut out = lucy_richardson(&rotated, &params.psf()?, params.iterations)?;
    out.clamp_in_place();
    Ok(out)
}

/// Border margin removed by [`attack_definite`]:
/// `ceil(max(H, W) * tan(beta)) + 2`.
pub fn definite_margin(height: usize, width: usize, beta_degrees: f64) -> usize {
    (height.max(width) as f64 * beta_degrees.to_radians().tan()).ceil() as usize + 2
}

/// The combined Wiener/rotation/deblur attack followed by a centered crop
/// that drops the de-rotation border and a Lanczos-3 rescale to full size.
pub fn attack_definite(image: &GrayImage, params: &AttackParams) -> Result<GrayImage> {
    let (h, w) = image.dims();
    let attacked = attack_combo_wiener_rotate_deblur(image, params)?;
    let m = definite_margin(h, w, params.beta);
    if 2 * m >= h || 2 * m >= w {
        return Err(Error::InvalidSpec(format!(
            "border margin {m} leaves nothing of a {h}x{w} image"
        )));
    }
    let cropped = attacked.crop(m, m, h - 2 * m, w - 2 * m)?;
    let mut out = resize(&cropped, h, w, Kernel::Lanczos3);
    out.clamp_in_place();
    Ok(out)
}
