use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("image is {height}x{width}, smaller than the {crop_size}x{crop_size} crop")]
    ImageTooSmall {
        height: usize,
        width: usize,
        crop_size: usize,
    },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("{levels} wavelet levels do not fit a {height}x{width} image")]
    TooManyLevels {
        levels: usize,
        height: usize,
        width: usize,
    },
    #[error("malformed wavelet pyramid: {0}")]
    MalformedPyramid(String),
    #[error("{height}x{width} image cannot be split into 8x8 tiles")]
    NotTileable { height: usize, width: usize },
    #[error("fingerprint training set is empty")]
    EmptyTrainingSet,
    #[error("no fingerprint patterns to compare against")]
    NoPatterns,
    #[error("invalid attack spec: {0}")]
    InvalidSpec(String),
    #[error("camera {camera} has {count} images, at least 4 are required")]
    TooFewImages { camera: String, count: usize },
    #[error("dataset error: {0}")]
    Dataset(String),
    #[error("report invariant broken: {0}")]
    ReportInvariantBroken(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("failed to decode {path}: {message}")]
    Decode { path: PathBuf, message: String },
    #[error("I/O failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization failure: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for the command-line tool: 2 for invalid
    /// arguments, 3 for dataset and I/O problems, 4 for broken invariants.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidSpec(_)
            | Error::Config(_)
            | Error::TooManyLevels { .. }
            | Error::NotTileable { .. }
            | Error::InvalidImage(_) => 2,
            Error::ImageTooSmall { .. }
            | Error::DimensionMismatch { .. }
            | Error::EmptyTrainingSet
            | Error::NoPatterns
            | Error::TooFewImages { .. }
            | Error::Dataset(_)
            | Error::Decode { .. }
            | Error::Io { .. }
            | Error::Serde(_) => 3,
            Error::MalformedPyramid(_) | Error::ReportInvariantBroken(_) => 4,
        }
    }

    pub(crate) fn dims(left: (usize, usize), right: (usize, usize)) -> Self {
        Error::DimensionMismatch { left, right }
    }
}
