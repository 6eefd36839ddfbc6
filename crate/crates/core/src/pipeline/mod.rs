//! Orchestration: manifests, seeded splits, the per-image feature chain,
//! training/evaluation/prediction, model persistence and the synthetic
//! corpus.

mod manifest;
mod model_file;
mod run;
mod split;
mod synthetic;

pub use manifest::{canonical_label, effective_alphabet, load_manifest, parse_manifest, ManifestEntry, POSE_ALPHABET};
pub use model_file::{decode_model, encode_model, load_model, save_model, TrainedModel, MODEL_MAGIC, MODEL_VERSION};
pub use run::{
    extract_features, extract_image_features, run_eval, run_predict, run_train, write_decomposition, ImageTrace,
    TrainOutcome,
};
pub use split::{split, Split, SplitSpec};
pub use synthetic::{class_angle, draw_image, gen_synthetic, gen_synthetic_with, grating, SyntheticParams, SYNTH_COLS, SYNTH_ROWS};

use std::path::PathBuf;

use thiserror::Error;

use crate::classify::{ClassifierKind, ClassifyError};
use crate::contourlet::{PdfbConfig, TransformError};
use crate::features::FeatureError;
use crate::image_io::ImageError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("manifest line {line}: {message}")]
    Manifest { line: u64, message: String },
    #[error("manifest line {line}: unknown label {label:?}")]
    UnknownLabel { line: u64, label: String },
    #[error("manifest {0} lists no images")]
    EmptyManifest(PathBuf),
    #[error("split: {0}")]
    Split(String),
    #[error("{path}: {source}")]
    Image { path: PathBuf, source: ImageError },
    #[error("{path}: {source}")]
    Transform { path: PathBuf, source: TransformError },
    #[error("{path}: {source}")]
    Vectorize { path: PathBuf, source: FeatureError },
    #[error("feature fitting failed: {0}")]
    Feature(#[from] FeatureError),
    #[error("classifier: {0}")]
    Classify(#[from] ClassifyError),
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error("{path}: feature dimension {found} does not match the model's {expected}")]
    FeatureDimension { path: PathBuf, expected: usize, found: usize },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{0}")]
    InvalidArgument(String),
}

impl PipelineError {
    /// Process exit code: 2 for data errors, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Feature(
                FeatureError::SingularScatter(_) | FeatureError::RankExceeded { .. } | FeatureError::NoPositiveEigenvalue,
            ) => 3,
            _ => 2,
        }
    }
}

/// Every parameter that shapes the feature chain and the classifier.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub pdfb: PdfbConfig,
    /// `(rows, cols)` every image is resized to before decomposition.
    pub resize: (usize, usize),
    pub pca_energy: f64,
    pub q: usize,
    pub classifier: ClassifierKind,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            pdfb: PdfbConfig::default(),
            resize: (120, 90),
            pca_energy: 0.99,
            q: 3,
            classifier: ClassifierKind::Knn { k: 1 },
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.pca_energy > 0.0 && self.pca_energy <= 1.0) {
            return Err(PipelineError::InvalidArgument(format!("pca energy must lie in (0, 1], got {}", self.pca_energy)));
        }
        if self.q == 0 {
            return Err(PipelineError::InvalidArgument("q must be at least 1".into()));
        }
        if let ClassifierKind::Knn { k: 0 } = self.classifier {
            return Err(PipelineError::InvalidArgument("k must be at least 1".into()));
        }
        let (r, c) = self.resize;
        self.pdfb
            .subband_shapes(r, c)
            .map_err(|e| PipelineError::InvalidArgument(format!("resize target {r}x{c}: {e}")))?;
        Ok(())
    }
}
