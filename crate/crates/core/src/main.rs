use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use prnu_core::attacks::{apply_attack, AttackKind, AttackSpec};
use prnu_core::bench::{make_split, run_suite, summary_csv, write_suite, BenchSuite, TrainingMode};
use prnu_core::config::ToolkitConfig;
use prnu_core::fingerprint::{
    load_patterns, noise_residual, save_pattern, Detector, FingerprintAccumulator, TOOLKIT_VERSION,
};
use prnu_core::image::{list_images, load_gray, load_luminance, snr_db, CameraDataset};
use prnu_core::rng::derive_seed;
use prnu_core::simulate::materialize;
use prnu_core::{Error, Result};

#[derive(Parser)]
#[command(name = "prnu", version, about = "PRNU fingerprinting, attacks and robustness benchmarks")]
struct Cli {
    /// Settings file (`key = value` lines or JSON); command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate one camera's fingerprint from a directory of its images.
    Fingerprint {
        dir: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Camera id stored with the pattern; defaults to the directory name.
        #[arg(long)]
        camera_id: Option<String>,
        #[arg(long)]
        crop: Option<usize>,
    },
    /// Name the camera whose pattern best matches an image.
    Identify {
        image: PathBuf,
        #[arg(long)]
        patterns: PathBuf,
        /// Also print every pattern's PCE.
        #[arg(long)]
        scores: bool,
    },
    /// Apply an attack to an image or to every image in a directory.
    Attack {
        #[arg(long)]
        kind: AttackKind,
        /// Parameter override, e.g. `alpha=12`; repeatable.
        #[arg(long = "param", value_parser = parse_pair)]
        params: Vec<(String, String)>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        /// Centered square crop applied before attacking; full frame if absent.
        #[arg(long)]
        crop: Option<usize>,
    },
    /// Write a synthetic camera dataset.
    Simulate {
        #[arg(long)]
        cameras: Option<usize>,
        #[arg(long)]
        images: Option<usize>,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        strength: Option<f64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run the identification benchmark on a dataset.
    Bench {
        #[arg(long)]
        dataset: PathBuf,
        /// Attack kind, `none` or `all`; repeatable or comma separated.
        #[arg(long, value_delimiter = ',', default_value = "all")]
        attack: Vec<String>,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        crop: Option<usize>,
        /// Record mean attack wall time.
        #[arg(long)]
        timing: bool,
        #[arg(long = "param", value_parser = parse_pair)]
        params: Vec<(String, String)>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Clean,
    Fooled,
    Both,
}

fn parse_pair(s: &str) -> std::result::Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got {s:?}"))
}

#[derive(Serialize)]
struct AttackManifest {
    toolkit_version: String,
    spec: AttackSpec,
    master_seed: u64,
    images: Vec<ManifestEntry>,
}

#[derive(Serialize)]
struct ManifestEntry {
    input: PathBuf,
    output: PathBuf,
    seed: u64,
    /// Absent when the attack left the image unchanged.
    snr_db: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => ToolkitConfig::load(path)?,
        None => ToolkitConfig::default(),
    };
    match cli.command {
        Command::Fingerprint {
            dir,
            output,
            camera_id,
            crop,
        } => {
            let crop = crop.unwrap_or(config.bench.crop_size);
            let camera_id = match camera_id {
                Some(id) => id,
                None => dir_name(&dir)?,
            };
            let fp = &config.bench.fingerprint;
            let paths = list_images(&dir)?;
            let mut acc = FingerprintAccumulator::new(crop, crop);
            for path in &paths {
                let img = load_gray(path, crop)?;
                acc.add(&img, &noise_residual(&img, fp)?)?;
            }
            let pattern = acc.finish(&camera_id, fp)?;
            save_pattern(&pattern, &output)?;
            println!("{camera_id}: {} images -> {}", paths.len(), output.display());
        }
        Command::Identify {
            image,
            patterns,
            scores,
        } => {
            let patterns = load_patterns(&patterns)?;
            let first = patterns.first().ok_or(Error::NoPatterns)?;
            let (h, w) = first.dims();
            if h != w {
                return Err(Error::Dataset(format!("pattern {} is not square", first.camera_id)));
            }
            let query = load_gray(&image, h)?;
            let detector = Detector::new(h, w, first.config);
            let (best, all) = detector.rank(&detector.prepare(&query)?, &patterns)?;
            println!("{}", patterns[best].camera_id);
            if scores {
                for (p, s) in patterns.iter().zip(&all) {
                    println!("{}\t{:.3}", p.camera_id, s.pce);
                }
            }
        }
        Command::Attack {
            kind,
            params,
            seed,
            input,
            output,
            crop,
        } => {
            let seed = seed.unwrap_or(config.bench.seed);
            let spec = config.attack_spec(kind, seed, &params)?;
            let batch = input.is_dir();
            let jobs: Vec<(PathBuf, PathBuf)> = if batch {
                fs::create_dir_all(&output).map_err(|e| Error::io(&output, e))?;
                list_images(&input)?
                    .into_iter()
                    .map(|p| {
                        let name = p.file_stem().unwrap_or_default().to_owned();
                        let out = output.join(name).with_extension("png");
                        (p, out)
                    })
                    .collect()
            } else {
                vec![(input.clone(), output.clone())]
            };
            let mut images = Vec::with_capacity(jobs.len());
            for (i, (src, dst)) in jobs.into_iter().enumerate() {
                let original = match crop {
                    Some(c) => load_gray(&src, c)?,
                    None => load_luminance(&src)?,
                };
                let image_seed = derive_seed(seed, &[i as u64]);
                let attacked = apply_attack(&original, &spec.with_seed(image_seed))?;
                attacked.save_png(&dst)?;
                let snr = snr_db(&original, &attacked)?;
                images.push(ManifestEntry {
                    input: src,
                    output: dst,
                    seed: image_seed,
                    snr_db: snr.is_finite().then_some(snr),
                });
            }
            let manifest_path = if batch {
                output.join("manifest.json")
            } else {
                output.with_extension("json")
            };
            let manifest = AttackManifest {
                toolkit_version: TOOLKIT_VERSION.to_string(),
                spec,
                master_seed: seed,
                images,
            };
            let text = serde_json::to_string_pretty(&manifest)? + "\n";
            fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;
            println!("{} image(s), manifest {}", manifest.images.len(), manifest_path.display());
        }
        Command::Simulate {
            cameras,
            images,
            size,
            seed,
            strength,
            output,
        } => {
            let sim = &mut config.simulation;
            sim.cameras = cameras.unwrap_or(sim.cameras);
            sim.images_per_camera = images.unwrap_or(sim.images_per_camera);
            sim.size = size.unwrap_or(sim.size);
            sim.seed = seed.unwrap_or(sim.seed);
            sim.strength = strength.unwrap_or(sim.strength);
            let study = materialize(sim, &output)?;
            println!(
                "{} cameras x {} images of {}x{} -> {}",
                study.images.num_cameras(),
                sim.images_per_camera,
                sim.size,
                sim.size,
                output.display()
            );
        }
        Command::Bench {
            dataset,
            attack,
            mode,
            seed,
            crop,
            timing,
            params,
            output,
        } => {
            let bench = &mut config.bench;
            bench.seed = seed.unwrap_or(bench.seed);
            bench.crop_size = crop.unwrap_or(bench.crop_size);
            bench.timing |= timing;
            let attacks = attack_list(&config, &attack, &params)?;
            let modes: &[TrainingMode] = match mode {
                ModeArg::Clean => &[TrainingMode::Clean],
                ModeArg::Fooled => &[TrainingMode::Fooled],
                ModeArg::Both => &TrainingMode::ALL,
            };
            let plan = make_split(&CameraDataset::discover(&dataset)?)?;
            let suite = BenchSuite::new(run_suite(&plan, &attacks, modes, &config.bench)?);
            write_suite(&suite, &output)?;
            print!("{}", summary_csv(&suite.reports));
        }
    }
    Ok(())
}

fn dir_name(dir: &Path) -> Result<String> {
    let canonical = dir.canonicalize().map_err(|e| Error::io(dir, e))?;
    canonical
        .file_name()
        .and_then(|n| n.to_str())
        .map(str::to_string)
        .ok_or_else(|| Error::Dataset(format!("cannot name a camera after {}", dir.display())))
}

fn attack_list(
    config: &ToolkitConfig,
    names: &[String],
    params: &[(String, String)],
) -> Result<Vec<Option<AttackSpec>>> {
    let seed = config.bench.seed;
    let mut out: Vec<Option<AttackSpec>> = Vec::new();
    let mut push = |entry: Option<AttackSpec>| {
        if !out.contains(&entry) {
            out.push(entry);
        }
    };
    for name in names {
        match name.trim() {
            "all" => {
                push(None);
                for kind in AttackKind::ALL {
                    push(Some(config.attack_spec(kind, seed, params)?));
                }
            }
            "none" => push(None),
            other => {
                let kind: AttackKind = other.parse()?;
                push(Some(config.attack_spec(kind, seed, params)?));
            }
        }
    }
    Ok(out)
}
