//! Python bindings: images, fingerprints, PCE, attacks, simulation and the
//! benchmark harness.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use prnu_core::attacks::{AttackKind, AttackSpec};
use prnu_core::bench::{make_split, run_suite, BenchConfig, BenchSuite, TrainingMode};
use prnu_core::fingerprint::{self, FingerprintConfig};
use prnu_core::image::{self, CameraDataset};
use prnu_core::simulate::{self, SceneKind, SimulationConfig};
use prnu_core::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } | Error::Decode { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Single-channel float image, row-major.
#[pyclass(module = "prnu", from_py_object)]
#[derive(Clone)]
pub struct GrayImage {
    inner: prnu_core::GrayImage,
}

#[pymethods]
impl GrayImage {
    #[new]
    fn new(height: usize, width: usize, data: Vec<f32>) -> PyResult<Self> {
        let inner = prnu_core::GrayImage::new(height, width, data).map_err(py_err)?;
        Ok(Self { inner })
    }

    /// Luminance of an image file, center-cropped to `crop` if given.
    #[staticmethod]
    #[pyo3(signature = (path, crop=None))]
    fn load(path: PathBuf, crop: Option<usize>) -> PyResult<Self> {
        let inner = match crop {
            Some(c) => image::load_gray(&path, c),
            None => image::load_luminance(&path),
        }
        .map_err(py_err)?;
        Ok(Self { inner })
    }

    fn save_png(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save_png(&path).map_err(py_err)
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.inner.dims()
    }

    fn to_list(&self) -> Vec<f32> {
        self.inner.data().to_vec()
    }

    fn get(&self, row: usize, col: usize) -> PyResult<f32> {
        let (h, w) = self.inner.dims();
        if row >= h || col >= w {
            return Err(PyValueError::new_err(format!("({row}, {col}) outside {h}x{w}")));
        }
        Ok(self.inner.get(row, col))
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn __repr__(&self) -> String {
        format!("GrayImage({}x{})", self.inner.height(), self.inner.width())
    }
}

/// Zero-mean PRNU estimate of one camera.
#[pyclass(module = "prnu", from_py_object)]
#[derive(Clone)]
pub struct FingerprintPattern {
    inner: fingerprint::FingerprintPattern,
}

#[pymethods]
impl FingerprintPattern {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let inner = fingerprint::load_pattern(&path).map_err(py_err)?;
        Ok(Self { inner })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        fingerprint::save_pattern(&self.inner, &path).map_err(py_err)
    }

    #[getter]
    fn camera_id(&self) -> String {
        self.inner.camera_id.clone()
    }

    #[getter]
    fn training_count(&self) -> usize {
        self.inner.training_count
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.inner.dims()
    }

    fn values(&self) -> GrayImage {
        GrayImage {
            inner: self.inner.values.clone(),
        }
    }

    fn __repr__(&self) -> String {
        let (h, w) = self.inner.dims();
        format!("FingerprintPattern({:?}, {h}x{w}, n={})", self.inner.camera_id, self.inner.training_count)
    }
}

#[pyfunction]
fn noise_residual(image: &GrayImage) -> PyResult<GrayImage> {
    let inner = fingerprint::noise_residual(&image.inner, &FingerprintConfig::default()).map_err(py_err)?;
    Ok(GrayImage { inner })
}

#[pyfunction]
fn estimate_fingerprint(py: Python<'_>, images: Vec<GrayImage>, camera_id: &str) -> PyResult<FingerprintPattern> {
    let images: Vec<_> = images.into_iter().map(|i| i.inner).collect();
    let inner = py
        .detach(|| fingerprint::estimate_fingerprint(&images, camera_id))
        .map_err(py_err)?;
    Ok(FingerprintPattern { inner })
}

/// Signed PCE of `image` against `pattern` and the peak shift.
#[pyfunction]
fn pce(image: &GrayImage, pattern: &FingerprintPattern) -> PyResult<(f64, (usize, usize))> {
    let score = fingerprint::pce(&image.inner, &pattern.inner).map_err(py_err)?;
    Ok((score.pce, score.peak_shift))
}

/// Camera id of the best-scoring pattern.
#[pyfunction]
fn identify(image: &GrayImage, patterns: Vec<FingerprintPattern>) -> PyResult<String> {
    let patterns: Vec<_> = patterns.into_iter().map(|p| p.inner).collect();
    fingerprint::identify(&image.inner, &patterns).map_err(py_err)
}

#[pyfunction]
fn attack_kinds() -> Vec<&'static str> {
    AttackKind::ALL.iter().map(|k| k.name()).collect()
}

/// Applies an attack; `params` overrides the kind's defaults by name.
#[pyfunction]
#[pyo3(signature = (image, kind, seed=0, params=None))]
fn apply_attack(
    image: &GrayImage,
    kind: &str,
    seed: u64,
    params: Option<Vec<(String, String)>>,
) -> PyResult<GrayImage> {
    let kind: AttackKind = kind.parse().map_err(py_err)?;
    let mut spec = AttackSpec::new(kind, seed);
    for (key, value) in params.unwrap_or_default() {
        spec.params.set(&key, &value).map_err(py_err)?;
    }
    spec.validate().map_err(py_err)?;
    let inner = prnu_core::apply_attack(&image.inner, &spec).map_err(py_err)?;
    Ok(GrayImage { inner })
}

#[pyfunction]
fn snr_db(original: &GrayImage, processed: &GrayImage) -> PyResult<f64> {
    prnu_core::snr_db(&original.inner, &processed.inner).map_err(py_err)
}

/// Textured synthetic scene with values in [16, 240].
#[pyfunction]
fn make_scene(height: usize, width: usize, seed: u64) -> GrayImage {
    GrayImage {
        inner: simulate::make_scene(height, width, SceneKind::Texture, seed),
    }
}

/// Simulated study as `[(camera_id, [GrayImage, ...]), ...]`; written to
/// `output` as PNGs when given.
#[pyfunction]
#[pyo3(signature = (cameras=4, images_per_camera=20, size=256, seed=0, strength=0.02, output=None))]
fn simulate_study(
    py: Python<'_>,
    cameras: usize,
    images_per_camera: usize,
    size: usize,
    seed: u64,
    strength: f64,
    output: Option<PathBuf>,
) -> PyResult<Vec<(String, Vec<GrayImage>)>> {
    let config = SimulationConfig {
        cameras,
        images_per_camera,
        size,
        seed,
        strength,
        ..SimulationConfig::default()
    };
    let study = py
        .detach(|| match &output {
            Some(root) => simulate::materialize(&config, root),
            None => simulate::synthesize(&config),
        })
        .map_err(py_err)?;
    Ok(study
        .images
        .cameras
        .into_iter()
        .map(|(id, images)| (id, images.into_iter().map(|inner| GrayImage { inner }).collect()))
        .collect())
}

/// Runs the benchmark over a `root/<camera>/<image>` dataset and returns the
/// suite as JSON text. `attacks` holds kind names or `none`.
#[pyfunction]
#[pyo3(name = "bench", signature = (dataset, attacks, mode="both", seed=0, crop=2048))]
fn run_bench(py: Python<'_>, dataset: PathBuf, attacks: Vec<String>, mode: &str, seed: u64, crop: usize) -> PyResult<String> {
    let specs = attacks
        .iter()
        .map(|a| match a.as_str() {
            "none" => Ok(None),
            name => name.parse::<AttackKind>().map(|k| Some(AttackSpec::new(k, seed))),
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(py_err)?;
    let modes: Vec<TrainingMode> = match mode {
        "both" => TrainingMode::ALL.to_vec(),
        m => vec![m.parse().map_err(py_err)?],
    };
    let config = BenchConfig {
        seed,
        crop_size: crop,
        ..BenchConfig::default()
    };
    let suite = py
        .detach(|| -> prnu_core::Result<BenchSuite> {
            let plan = make_split(&CameraDataset::discover(&dataset)?)?;
            Ok(BenchSuite::new(run_suite(&plan, &specs, &modes, &config)?))
        })
        .map_err(py_err)?;
    serde_json::to_string_pretty(&suite).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn prnu(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", fingerprint::TOOLKIT_VERSION)?;
    m.add_class::<GrayImage>()?;
    m.add_class::<FingerprintPattern>()?;
    m.add_function(wrap_pyfunction!(noise_residual, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_fingerprint, m)?)?;
    m.add_function(wrap_pyfunction!(pce, m)?)?;
    m.add_function(wrap_pyfunction!(identify, m)?)?;
    m.add_function(wrap_pyfunction!(attack_kinds, m)?)?;
    m.add_function(wrap_pyfunction!(apply_attack, m)?)?;
    m.add_function(wrap_pyfunction!(snr_db, m)?)?;
    m.add_function(wrap_pyfunction!(make_scene, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_study, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    Ok(())
}
