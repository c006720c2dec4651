//! Experiment harness: training/test splits, clean and fooled training
//! protocols, confusion matrices and report emission.

use std::borrow::Cow;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::attacks::{apply_attack, AttackSpec};
use crate::error::{Error, Result};
use crate::fingerprint::{
    noise_residual, Detector, FingerprintAccumulator, FingerprintConfig, FingerprintPattern,
};
use crate::image::{load_gray, snr_db, CameraDataset, GrayImage, DEFAULT_CROP_SIZE};
use crate::rng::derive_seed;
use crate::simulate::LabeledImages;

/// Smallest per-camera image count that leaves a test set.
pub const MIN_IMAGES_PER_CAMERA: usize = 4;

/// Seed roles for per-image attack streams.
const ROLE_TEST: u64 = 0;
const ROLE_TRAINING: u64 = 1;

/// Training images per camera: a quarter of the images, rounded up.
pub fn training_count(images: usize) -> usize {
    images.div_ceil(4)
}

/// Error rate of guessing uniformly among `cameras` cameras.
pub fn chance_error(cameras: usize) -> f64 {
    if cameras == 0 {
        0.0
    } else {
        1.0 - 1.0 / cameras as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainingMode {
    /// Fingerprints come from unmodified training images.
    Clean,
    /// Training images are attacked before fingerprint estimation.
    Fooled,
}

impl TrainingMode {
    pub const ALL: [TrainingMode; 2] = [TrainingMode::Clean, TrainingMode::Fooled];

    pub fn name(self) -> &'static str {
        match self {
            TrainingMode::Clean => "clean",
            TrainingMode::Fooled => "fooled",
        }
    }
}

impl fmt::Display for TrainingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TrainingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clean" => Ok(TrainingMode::Clean),
            "fooled" => Ok(TrainingMode::Fooled),
            other => Err(Error::Config(format!("unknown training mode {other:?}"))),
        }
    }
}

/// Something the harness can turn into a preprocessed luminance raster.
pub trait BenchImage {
    fn load(&self, crop_size: usize) -> Result<Cow<'_, GrayImage>>;
}

impl BenchImage for GrayImage {
    fn load(&self, _crop_size: usize) -> Result<Cow<'_, GrayImage>> {
        Ok(Cow::Borrowed(self))
    }
}

impl BenchImage for PathBuf {
    fn load(&self, crop_size: usize) -> Result<Cow<'_, GrayImage>> {
        load_gray(self, crop_size).map(Cow::Owned)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraSplit<T> {
    pub camera_id: String,
    pub training: Vec<T>,
    pub test: Vec<T>,
}

/// Per-camera partition into training and test images.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan<T> {
    pub cameras: Vec<CameraSplit<T>>,
}

impl<T> SplitPlan<T> {
    /// Splits each group in the given order: the first `ceil(n/4)` items
    /// train, the rest test.
    pub fn from_groups(groups: Vec<(String, Vec<T>)>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::Dataset("no cameras".into()));
        }
        let cameras = groups
            .into_iter()
            .map(|(camera_id, mut items)| {
                if items.len() < MIN_IMAGES_PER_CAMERA {
                    return Err(Error::TooFewImages {
                        camera: camera_id,
                        count: items.len(),
                    });
                }
                let test = items.split_off(training_count(items.len()));
                Ok(CameraSplit {
                    camera_id,
                    training: items,
                    test,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { cameras })
    }

    pub fn num_cameras(&self) -> usize {
        self.cameras.len()
    }

    pub fn camera_ids(&self) -> Vec<String> {
        self.cameras.iter().map(|c| c.camera_id.clone()).collect()
    }

    pub fn test_counts(&self) -> Vec<usize> {
        self.cameras.iter().map(|c| c.test.len()).collect()
    }
}

/// Split of an on-disk dataset (paths already in lexicographic order).
pub fn make_split(dataset: &CameraDataset) -> Result<SplitPlan<PathBuf>> {
    SplitPlan::from_groups(
        dataset
            .cameras
            .iter()
            .map(|c| (c.camera_id.clone(), c.image_paths.clone()))
            .collect(),
    )
}

/// Split of in-memory labeled images.
pub fn split_labeled(images: &LabeledImages) -> Result<SplitPlan<GrayImage>> {
    SplitPlan::from_groups(images.cameras.clone())
}

/// Harness settings echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    pub seed: u64,
    pub crop_size: usize,
    pub fingerprint: FingerprintConfig,
    /// Record attack wall time; off by default so reports are byte-stable.
    pub timing: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            crop_size: DEFAULT_CROP_SIZE,
            fingerprint: FingerprintConfig::default(),
            timing: false,
        }
    }
}

/// Settings and split rule as recorded in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub crop_size: usize,
    pub fingerprint: FingerprintConfig,
    pub split_rule: String,
    pub training_counts: Vec<usize>,
    pub test_counts: Vec<usize>,
    pub test_seed_role: u64,
    pub training_seed_role: u64,
}

/// Outcome of one attack under one training protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    /// Attack name, `none` when images are left untouched.
    pub attack_name: String,
    pub attack: Option<AttackSpec>,
    pub training_mode: TrainingMode,
    pub camera_ids: Vec<String>,
    /// Rows are true cameras, columns predicted cameras.
    pub confusion: Vec<Vec<u64>>,
    pub error_rate: f64,
    pub per_camera_error: Vec<f64>,
    pub chance_error: f64,
    /// `error_rate >= chance_error`.
    pub successful: bool,
    /// Mean SNR of attacked vs. original test images; absent without an attack.
    pub mean_snr_db: Option<f64>,
    pub mean_attack_seconds: Option<f64>,
    /// Mean PCE of each test image against its own camera's pattern.
    pub mean_matched_pce: f64,
    pub notes: Vec<String>,
    pub config: ConfigEcho,
}

impl BenchReport {
    /// Checks the confusion matrix against the recorded counts and rates.
    pub fn validate(&self) -> Result<()> {
        let broken = |msg: String| Err(Error::ReportInvariantBroken(msg));
        let c = self.camera_ids.len();
        if self.confusion.len() != c || self.confusion.iter().any(|row| row.len() != c) {
            return broken(format!("confusion matrix is not {c}x{c}"));
        }
        if self.config.test_counts.len() != c || self.per_camera_error.len() != c {
            return broken("per-camera vectors do not match the camera count".into());
        }
        let mut total = 0u64;
        let mut trace = 0u64;
        for (i, row) in self.confusion.iter().enumerate() {
            let sum: u64 = row.iter().sum();
            if sum != self.config.test_counts[i] as u64 {
                return broken(format!(
                    "row {} sums to {sum}, expected {} test images",
                    self.camera_ids[i], self.config.test_counts[i]
                ));
            }
            let expected = if sum == 0 { 0.0 } else { 1.0 - row[i] as f64 / sum as f64 };
            if (self.per_camera_error[i] - expected).abs() > 1e-12 {
                return broken(format!("per-camera error of {} is inconsistent", self.camera_ids[i]));
            }
            total += sum;
            trace += row[i];
        }
        let error = if total == 0 { 0.0 } else { 1.0 - trace as f64 / total as f64 };
        if (self.error_rate - error).abs() > 1e-12 {
            return broken(format!("error rate {} differs from {error}", self.error_rate));
        }
        if (self.chance_error - chance_error(c)).abs() > 1e-12 {
            return broken("chance error does not match the camera count".into());
        }
        if self.successful != (self.error_rate >= self.chance_error) {
            return broken("success flag disagrees with the error rate".into());
        }
        Ok(())
    }
}

/// Accumulates one report's identification outcomes.
struct Tally {
    confusion: Vec<Vec<u64>>,
    matched_pce: f64,
    scored: usize,
}

impl Tally {
    fn new(cameras: usize) -> Self {
        Self {
            confusion: vec![vec![0; cameras]; cameras],
            matched_pce: 0.0,
            scored: 0,
        }
    }

    fn record(&mut self, truth: usize, predicted: usize, matched_pce: f64) {
        self.confusion[truth][predicted] += 1;
        self.matched_pce += matched_pce;
        self.scored += 1;
    }
}

/// Shared per-attack measurements over the test set.
struct TestStats {
    snr_sum: f64,
    snr_count: usize,
    seconds: f64,
    attacked: usize,
}

fn attack_seed(config: &BenchConfig, spec: &AttackSpec, camera: usize, image: usize, role: u64) -> u64 {
    derive_seed(config.seed, &[spec.seed, camera as u64, image as u64, role])
}

fn attacked<'a>(
    image: Cow<'a, GrayImage>,
    spec: Option<&AttackSpec>,
    seed: u64,
) -> Result<(Cow<'a, GrayImage>, f64)> {
    match spec {
        None => Ok((image, 0.0)),
        Some(spec) => {
            let start = Instant::now();
            let out = apply_attack(&image, &spec.with_seed(seed))?;
            Ok((Cow::Owned(out), start.elapsed().as_secs_f64()))
        }
    }
}

fn train<T: BenchImage>(
    plan: &SplitPlan<T>,
    attack: Option<&AttackSpec>,
    config: &BenchConfig,
    dims: (usize, usize),
) -> Result<Vec<FingerprintPattern>> {
    plan.cameras
        .iter()
        .enumerate()
        .map(|(ci, cam)| {
            let mut acc = FingerprintAccumulator::new(dims.0, dims.1);
            for (ii, item) in cam.training.iter().enumerate() {
                let image = item.load(config.crop_size)?;
                let seed = attack.map_or(0, |s| attack_seed(config, s, ci, ii, ROLE_TRAINING));
                let (image, _) = attacked(image, attack, seed)?;
                let residual = noise_residual(&image, &config.fingerprint)?;
                acc.add(&image, &residual)?;
            }
            acc.finish(&cam.camera_id, &config.fingerprint)
        })
        .collect()
}

fn image_dims<T: BenchImage>(plan: &SplitPlan<T>, config: &BenchConfig) -> Result<(usize, usize)> {
    let first = plan
        .cameras
        .iter()
        .flat_map(|c| c.training.iter())
        .next()
        .ok_or_else(|| Error::Dataset("no training images".into()))?;
    Ok(first.load(config.crop_size)?.dims())
}

/// Runs every `(attack, mode)` pair. Clean fingerprints are trained once,
/// and each test image is attacked and denoised once per attack for all
/// modes, since both protocols attack test images identically. Reports are
/// ordered attack-major, then in the order of `modes`.
pub fn run_suite<T: BenchImage>(
    plan: &SplitPlan<T>,
    attacks: &[Option<AttackSpec>],
    modes: &[TrainingMode],
    config: &BenchConfig,
) -> Result<Vec<BenchReport>> {
    if modes.is_empty() || attacks.is_empty() {
        return Ok(Vec::new());
    }
    for spec in attacks.iter().flatten() {
        spec.validate()?;
    }
    let dims = image_dims(plan, config)?;
    let detector = Detector::new(dims.0, dims.1, config.fingerprint);
    let needs_clean = attacks.iter().any(Option::is_none) || modes.contains(&TrainingMode::Clean);
    let clean = if needs_clean {
        Some(train(plan, None, config, dims)?)
    } else {
        None
    };

    let mut reports = Vec::with_capacity(attacks.len() * modes.len());
    for attack in attacks {
        let attack = attack.as_ref();
        // Without an attack both protocols train on the same images.
        let mut pattern_sets: Vec<(TrainingMode, Cow<'_, [FingerprintPattern]>)> = Vec::new();
        for &mode in modes {
            let patterns = match (mode, attack) {
                (TrainingMode::Clean, _) | (TrainingMode::Fooled, None) => {
                    Cow::Borrowed(clean.as_deref().expect("clean patterns trained"))
                }
                (TrainingMode::Fooled, Some(spec)) => Cow::Owned(train(plan, Some(spec), config, dims)?),
            };
            pattern_sets.push((mode, patterns));
        }

        let mut tallies: Vec<Tally> = modes.iter().map(|_| Tally::new(plan.num_cameras())).collect();
        let mut stats = TestStats {
            snr_sum: 0.0,
            snr_count: 0,
            seconds: 0.0,
            attacked: 0,
        };
        for (ci, cam) in plan.cameras.iter().enumerate() {
            let offset = cam.training.len();
            for (ti, item) in cam.test.iter().enumerate() {
                let original = item.load(config.crop_size)?;
                let seed = attack.map_or(0, |s| attack_seed(config, s, ci, offset + ti, ROLE_TEST));
                let (image, seconds) = attacked(original.clone(), attack, seed)?;
                if attack.is_some() {
                    stats.seconds += seconds;
                    stats.attacked += 1;
                    let snr = snr_db(&original, &image)?;
                    if snr.is_finite() {
                        stats.snr_sum += snr;
                        stats.snr_count += 1;
                    }
                }
                let query = detector.prepare(&image)?;
                for (tally, (_, patterns)) in tallies.iter_mut().zip(&pattern_sets) {
                    let (best, scores) = detector.rank(&query, patterns)?;
                    tally.record(ci, best, scores[ci].pce);
                }
            }
        }

        for (tally, (mode, _)) in tallies.into_iter().zip(&pattern_sets) {
            reports.push(finish_report(plan, attack, *mode, tally, &stats, config));
        }
    }
    Ok(reports)
}

fn finish_report<T>(
    plan: &SplitPlan<T>,
    attack: Option<&AttackSpec>,
    mode: TrainingMode,
    tally: Tally,
    stats: &TestStats,
    config: &BenchConfig,
) -> BenchReport {
    let cameras = plan.num_cameras();
    let per_camera_error: Vec<f64> = tally
        .confusion
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let n: u64 = row.iter().sum();
            if n == 0 {
                0.0
            } else {
                1.0 - row[i] as f64 / n as f64
            }
        })
        .collect();
    let total: u64 = tally.confusion.iter().flatten().sum();
    let trace: u64 = (0..cameras).map(|i| tally.confusion[i][i]).sum();
    let error_rate = if total == 0 { 0.0 } else { 1.0 - trace as f64 / total as f64 };
    let chance = chance_error(cameras);

    let mut notes = vec![
        "training images per camera: first ceil(n/4) in lexicographic order".to_string(),
    ];
    if let Some(spec) = attack {
        if spec.kind.is_geometric() {
            notes.push(
                "geometric attack: SNR compares pixels at the same position although pixels moved, so it understates visual quality"
                    .to_string(),
            );
        }
        if mode == TrainingMode::Fooled {
            notes.push("training and test attacks use independent per-image seeds".to_string());
        }
    }

    BenchReport {
        attack_name: attack.map_or_else(|| "none".to_string(), |s| s.kind.name().to_string()),
        attack: attack.cloned(),
        training_mode: mode,
        camera_ids: plan.camera_ids(),
        confusion: tally.confusion,
        error_rate,
        per_camera_error,
        chance_error: chance,
        successful: error_rate >= chance,
        mean_snr_db: (stats.snr_count > 0).then(|| stats.snr_sum / stats.snr_count as f64),
        mean_attack_seconds: (config.timing && stats.attacked > 0)
            .then(|| stats.seconds / stats.attacked as f64),
        mean_matched_pce: if tally.scored == 0 {
            0.0
        } else {
            tally.matched_pce / tally.scored as f64
        },
        notes,
        config: ConfigEcho {
            seed: config.seed,
            crop_size: config.crop_size,
            fingerprint: config.fingerprint,
            split_rule: "ceil(n/4)".to_string(),
            training_counts: plan.cameras.iter().map(|c| c.training.len()).collect(),
            test_counts: plan.test_counts(),
            test_seed_role: ROLE_TEST,
            training_seed_role: ROLE_TRAINING,
        },
    }
}

/// One attack under one training protocol.
pub fn run_experiment<T: BenchImage>(
    plan: &SplitPlan<T>,
    attack: Option<&AttackSpec>,
    mode: TrainingMode,
    config: &BenchConfig,
) -> Result<BenchReport> {
    let mut reports = run_suite(plan, &[attack.cloned()], &[mode], config)?;
    Ok(reports.remove(0))
}

/// Every report of a benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSuite {
    pub toolkit_version: String,
    pub reports: Vec<BenchReport>,
}

impl BenchSuite {
    pub fn new(reports: Vec<BenchReport>) -> Self {
        Self {
            toolkit_version: crate::fingerprint::TOOLKIT_VERSION.to_string(),
            reports,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.reports.iter().try_for_each(BenchReport::validate)
    }
}

pub const CSV_HEADER: &str = "attack,snr_db,seconds,error_clean,error_fooled";

fn fmt_opt(value: Option<f64>, digits: usize) -> String {
    value.map_or_else(String::new, |v| format!("{v:.digits$}"))
}

/// One CSV row per attack, merging its clean and fooled reports, in first
/// appearance order.
pub fn summary_csv(reports: &[BenchReport]) -> String {
    let mut order: Vec<&str> = Vec::new();
    for r in reports {
        if !order.contains(&r.attack_name.as_str()) {
            order.push(&r.attack_name);
        }
    }
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for name in order {
        let rows: Vec<&BenchReport> = reports.iter().filter(|r| r.attack_name == name).collect();
        let error = |mode| {
            rows.iter()
                .find(|r| r.training_mode == mode)
                .map(|r| r.error_rate)
        };
        let first = rows[0];
        out.push_str(&format!(
            "{name},{},{},{},{}\n",
            fmt_opt(first.mean_snr_db, 2),
            fmt_opt(first.mean_attack_seconds, 4),
            fmt_opt(error(TrainingMode::Clean), 4),
            fmt_opt(error(TrainingMode::Fooled), 4),
        ));
    }
    out
}

/// Path of the CSV table written next to a JSON report.
pub fn csv_path(json_path: &Path) -> PathBuf {
    json_path.with_extension("csv")
}

fn write_outputs(json: String, reports: &[BenchReport], path: &Path) -> Result<()> {
    fs::write(path, json + "\n").map_err(|e| Error::io(path, e))?;
    let csv = csv_path(path);
    fs::write(&csv, summary_csv(reports)).map_err(|e| Error::io(&csv, e))
}

/// Writes `path` (JSON) and the CSV table next to it, after re-checking the
/// report invariants.
pub fn write_report(report: &BenchReport, path: &Path) -> Result<()> {
    report.validate()?;
    write_outputs(serde_json::to_string_pretty(report)?, std::slice::from_ref(report), path)
}

pub fn write_suite(suite: &BenchSuite, path: &Path) -> Result<()> {
    suite.validate()?;
    write_outputs(serde_json::to_string_pretty(suite)?, &suite.reports, path)
}

pub fn read_report(path: &Path) -> Result<BenchReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_suite(path: &Path) -> Result<BenchSuite> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
