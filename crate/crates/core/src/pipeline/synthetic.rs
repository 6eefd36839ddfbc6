//! Oriented-grating stand-in corpus with one class per pose label.
//!
//! Class `c` (canonical label order) is a sinusoidal grating whose wave
//! vector points at `c·180/7` degrees from the column axis. Each image draws,
//! in this order from one `ChaCha8Rng::seed_from_u64(seed)` stream: phase
//! offset, amplitude factor, then one Gaussian noise sample per pixel in
//! row-major order. Images are 120×90 P5 files at maxval 255.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::manifest::POSE_ALPHABET;
use super::PipelineError;
use crate::image_io::{encode_pgm, GrayImage};

pub const SYNTH_ROWS: usize = 120;
pub const SYNTH_COLS: usize = 90;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticParams {
    /// Grating period in pixels.
    pub period: f64,
    pub amplitude: f64,
    /// Relative amplitude jitter, uniform in `±amplitude_jitter`.
    pub amplitude_jitter: f64,
    /// Phase jitter in radians, uniform in `±phase_jitter`.
    pub phase_jitter: f64,
    pub noise_sigma: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self { period: 90.0, amplitude: 60.0, amplitude_jitter: 0.2, phase_jitter: 0.3, noise_sigma: 5.0 }
    }
}

pub fn class_angle(class: usize) -> f64 {
    class as f64 * PI / POSE_ALPHABET.len() as f64
}

/// One grating image before quantization.
pub fn grating(class: usize, period: f64, phase: f64, amplitude: f64, noise: &mut impl FnMut() -> f64) -> GrayImage {
    let theta = class_angle(class);
    let (s, c) = theta.sin_cos();
    let k = 2.0 * PI / period;
    let (r0, c0) = (SYNTH_ROWS as f64 / 2.0, SYNTH_COLS as f64 / 2.0);
    GrayImage::from_fn(SYNTH_ROWS, SYNTH_COLS, |r, col| {
        let t = (col as f64 - c0) * c + (r as f64 - r0) * s;
        128.0 + amplitude * (k * t + phase).cos() + noise()
    })
}

pub fn draw_image(class: usize, params: &SyntheticParams, rng: &mut ChaCha8Rng) -> GrayImage {
    let phase = rng.random_range(-params.phase_jitter..=params.phase_jitter);
    let amplitude = params.amplitude * (1.0 + rng.random_range(-params.amplitude_jitter..=params.amplitude_jitter));
    let normal = Normal::new(0.0, params.noise_sigma).expect("non-negative sigma");
    grating(class, params.period, phase, amplitude, &mut || normal.sample(rng))
}

/// Manifest path relative to `out_dir` for image `i` of `label`.
fn image_name(label: &str, i: usize) -> String {
    format!("images/{label}_{i:04}.pgm")
}

/// Write the corpus and its `manifest.csv` under `out_dir`; returns the
/// manifest path.
pub fn gen_synthetic(out_dir: &Path, per_class: usize, seed: u64) -> Result<PathBuf, PipelineError> {
    gen_synthetic_with(out_dir, per_class, seed, &SyntheticParams::default())
}

pub fn gen_synthetic_with(
    out_dir: &Path,
    per_class: usize,
    seed: u64,
    params: &SyntheticParams,
) -> Result<PathBuf, PipelineError> {
    if per_class == 0 {
        return Err(PipelineError::InvalidArgument("per-class count must be at least 1".into()));
    }
    let io = |path: &Path, e: std::io::Error| PipelineError::Io { path: path.to_path_buf(), message: e.to_string() };
    let images = out_dir.join("images");
    std::fs::create_dir_all(&images).map_err(|e| io(&images, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut manifest = String::new();
    for (class, label) in POSE_ALPHABET.iter().enumerate() {
        for i in 0..per_class {
            let name = image_name(label, i);
            let path = out_dir.join(&name);
            std::fs::write(&path, encode_pgm(&draw_image(class, params, &mut rng))).map_err(|e| io(&path, e))?;
            manifest.push_str(&format!("{name},{label}\n"));
        }
    }
    let path = out_dir.join("manifest.csv");
    std::fs::write(&path, manifest).map_err(|e| io(&path, e))?;
    Ok(path)
}
