//! Helpers shared by the integration suites: seeded inputs, brute-force
//! oracles, and cached synthetic benchmark runs.
#![allow(dead_code)]

pub mod invariants;

use std::sync::OnceLock;
use std::time::Instant;

use prnu_core::attacks::{AttackKind, AttackSpec};
use prnu_core::bench::{run_suite, split_labeled, BenchConfig, BenchReport, TrainingMode};
use prnu_core::rng::seeded;
use prnu_core::simulate::{synthesize, SimulationConfig};
use prnu_core::transforms::WaveletFamily;
use prnu_core::GrayImage;
use rand::Rng;
use rand_distr::{Distribution, Normal};

pub fn uniform_image(h: usize, w: usize, seed: u64) -> GrayImage {
    let mut rng = seeded(seed);
    GrayImage::from_fn(h, w, |_, _| rng.random_range(0.0..255.0))
}

pub fn gaussian_image(h: usize, w: usize, mean: f64, std: f64, seed: u64) -> GrayImage {
    let normal = Normal::new(mean, std).unwrap();
    let mut rng = seeded(seed);
    GrayImage::from_fn(h, w, |_, _| normal.sample(&mut rng) as f32)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Literal periodic filter bank: one level of convolve-and-downsample along
/// both axes, `out[k][l] = sum_ij f_row[i] f_col[j] x[2k+i][2l+j]`.
pub fn literal_analysis(x: &[f64], n: usize, m: usize, f_row: &[f64], f_col: &[f64]) -> Vec<f64> {
    let (hn, hm) = (n / 2, m / 2);
    let mut out = vec![0.0; hn * hm];
    for k in 0..hn {
        for l in 0..hm {
            let mut acc = 0.0;
            for (i, &a) in f_row.iter().enumerate() {
                for (j, &b) in f_col.iter().enumerate() {
                    acc += a * b * x[((2 * k + i) % n) * m + (2 * l + j) % m];
                }
            }
            out[k * hm + l] = acc;
        }
    }
    out
}

/// Subbands of a square power-of-two image from the literal filter bank:
/// per level `[horizontal, vertical, diagonal]`, then the approximation.
pub fn literal_dwt(image: &GrayImage, levels: usize, family: WaveletFamily) -> (Vec<[Vec<f64>; 3]>, Vec<f64>) {
    let h = family.lowpass();
    let g = family.highpass();
    let (mut n, mut m) = image.dims();
    let mut current: Vec<f64> = image.data().iter().map(|&v| v as f64).collect();
    let mut details = Vec::new();
    for _ in 0..levels {
        let horizontal = literal_analysis(&current, n, m, &g, h);
        let vertical = literal_analysis(&current, n, m, h, &g);
        let diagonal = literal_analysis(&current, n, m, &g, &g);
        current = literal_analysis(&current, n, m, h, h);
        details.push([horizontal, vertical, diagonal]);
        n /= 2;
        m /= 2;
    }
    (details, current)
}

/// Normalized circular cross-correlation by direct summation over every
/// shift: `sum_p a'(p) b'(p + s) / (|a'| |b'|)`.
pub fn direct_xcorr(a: &GrayImage, b: &GrayImage) -> Vec<f64> {
    let (h, w) = a.dims();
    let center = |img: &GrayImage| {
        let mean = img.data().iter().map(|&v| v as f64).sum::<f64>() / img.len() as f64;
        img.data().iter().map(|&v| v as f64 - mean).collect::<Vec<f64>>()
    };
    let (ca, cb) = (center(a), center(b));
    let norm = ca.iter().map(|v| v * v).sum::<f64>().sqrt() * cb.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut out = vec![0.0; h * w];
    for sr in 0..h {
        for sc in 0..w {
            let mut acc = 0.0;
            for r in 0..h {
                for c in 0..w {
                    acc += ca[r * w + c] * cb[((r + sr) % h) * w + (c + sc) % w];
                }
            }
            out[sr * w + sc] = acc / norm;
        }
    }
    out
}

pub fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Reports of one seeded synthetic study, keyed by attack name and mode.
pub struct SeedRun {
    pub seed: u64,
    pub reports: Vec<BenchReport>,
    /// Wall time of synthesis plus the no-attack evaluation.
    pub baseline_seconds: f64,
}

impl SeedRun {
    pub fn get(&self, attack: &str, mode: TrainingMode) -> &BenchReport {
        self.reports
            .iter()
            .find(|r| r.attack_name == attack && r.training_mode == mode)
            .unwrap_or_else(|| panic!("no report for {attack}/{mode}"))
    }
}

pub fn run_study(
    sim: &SimulationConfig,
    attacks: &[Option<AttackKind>],
    modes: &[TrainingMode],
) -> SeedRun {
    let start = Instant::now();
    let study = synthesize(sim).expect("synthetic study");
    let plan = split_labeled(&study.images).expect("split");
    let config = BenchConfig {
        seed: sim.seed,
        crop_size: sim.size,
        ..BenchConfig::default()
    };
    let specs: Vec<Option<AttackSpec>> = attacks
        .iter()
        .map(|k| k.map(|k| AttackSpec::new(k, sim.seed)))
        .collect();
    // The no-attack column runs first and alone so its cost can be timed.
    let (baseline, rest) = match specs.split_first() {
        Some((None, rest)) => (vec![None], rest),
        _ => (vec![], &specs[..]),
    };
    let mut reports = run_suite(&plan, &baseline, modes, &config).expect("benchmark");
    let baseline_seconds = start.elapsed().as_secs_f64();
    reports.extend(run_suite(&plan, rest, modes, &config).expect("benchmark"));
    SeedRun {
        seed: sim.seed,
        reports,
        baseline_seconds,
    }
}

pub const FULL_SEEDS: u64 = 20;
pub const REDUCED_SEEDS: u64 = 50;

/// Attacks evaluated on the full-size study: the two ranked groups plus the
/// remaining single attacks.
pub const FULL_ATTACKS: [AttackKind; 9] = [
    AttackKind::Definite,
    AttackKind::ComboWienerRotateDeblur,
    AttackKind::Rotate,
    AttackKind::Lsb,
    AttackKind::DctNoise,
    AttackKind::Rescale,
    AttackKind::Scramble,
    AttackKind::SpatialWiener,
    AttackKind::WaveletWiener,
];

/// Four cameras, twenty 256x256 textured captures each, clean training,
/// twenty seeds.
pub fn full_suite() -> &'static [SeedRun] {
    static RUNS: OnceLock<Vec<SeedRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let attacks: Vec<Option<AttackKind>> =
            std::iter::once(None).chain(FULL_ATTACKS.iter().copied().map(Some)).collect();
        (0..FULL_SEEDS)
            .map(|seed| {
                let sim = SimulationConfig {
                    seed,
                    ..SimulationConfig::default()
                };
                run_study(&sim, &attacks, &[TrainingMode::Clean])
            })
            .collect()
    })
}

/// Reduced study for the fifty-seed aggregates: four cameras, twenty
/// 128x128 captures each, every attack, both training modes.
pub fn reduced_suite() -> &'static [SeedRun] {
    static RUNS: OnceLock<Vec<SeedRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let attacks: Vec<Option<AttackKind>> =
            std::iter::once(None).chain(AttackKind::ALL.iter().copied().map(Some)).collect();
        (0..REDUCED_SEEDS)
            .map(|seed| {
                let sim = SimulationConfig {
                    cameras: 4,
                    images_per_camera: 20,
                    size: 128,
                    seed: 1_000 + seed,
                    ..SimulationConfig::default()
                };
                run_study(&sim, &attacks, &TrainingMode::ALL)
            })
            .collect()
    })
}

/// Mean over seeds of a report statistic.
pub fn seed_mean(
    runs: &[SeedRun],
    attack: &str,
    mode: TrainingMode,
    stat: impl Fn(&BenchReport) -> f64,
) -> f64 {
    mean(runs.iter().map(|r| stat(r.get(attack, mode))))
}
