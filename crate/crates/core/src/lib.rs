//! PRNU camera fingerprinting toolkit.
//!
//! Estimates sensor fingerprints from images, matches images to cameras
//! with the peak-to-correlation-energy detector, implements a catalog of
//! counter-forensic attacks, and benchmarks detector robustness on real
//! or simulated camera datasets.

pub mod attacks;
pub mod bench;
pub mod config;
pub mod denoise;
pub mod error;
pub mod fingerprint;
pub mod image;
pub mod resample;
pub mod rng;
pub mod simulate;
pub mod transforms;

pub use attacks::{apply_attack, AttackKind, AttackParams, AttackSpec};
pub use error::{Error, Result};
pub use image::{preprocess, snr_db, CameraDataset, GrayImage};
