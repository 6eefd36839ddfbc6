//! The per-image feature chain and the train / eval / predict flows.
//!
//! Per image: read → grayscale → crop → resize → PDFB → vectorize, then
//! (once a model exists) project → classify.

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::manifest::{effective_alphabet, ManifestEntry};
use super::model_file::TrainedModel;
use super::split::{split, Split, SplitSpec};
use super::{PipelineError, RunConfig};
use crate::classify::{ClassifierModel, ConfusionMatrix};
use crate::contourlet::{pdfb_decompose, Decomposition, Level};
use crate::features::{fit_projection_report, to_matrix, vectorize};
use crate::image_io::{crop, read_netpbm, resize, write_pgm, CropRect, GrayImage, Image};

/// Output shape of every stage for one image.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ImageTrace {
    pub path: PathBuf,
    pub stages: Vec<(&'static str, String)>,
}

impl ImageTrace {
    fn push(&mut self, stage: &'static str, detail: String) {
        self.stages.push((stage, detail));
    }
}

impl fmt::Display for ImageTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.path.display())?;
        for (stage, detail) in &self.stages {
            writeln!(f, "  {stage:<10} {detail}")?;
        }
        Ok(())
    }
}

fn dims(img: &GrayImage) -> String {
    format!("{}x{}", img.rows(), img.cols())
}

fn describe(d: &Decomposition) -> String {
    let mut parts = vec![format!("lowpass {}", dims(&d.lowpass))];
    for (i, l) in d.levels.iter().enumerate() {
        let kind = match l {
            Level::Wavelet(_) => "wavelet",
            Level::Directional(_) => "directional",
        };
        let shapes: Vec<String> = l.subbands().iter().map(|b| dims(b)).collect();
        parts.push(format!("level {i} {kind} [{}]", shapes.join(", ")));
    }
    parts.join("; ")
}

/// Image → raw feature vector under `cfg`.
pub fn extract_image_features(
    path: &Path,
    rect: Option<&CropRect>,
    cfg: &RunConfig,
) -> Result<(Vec<f64>, ImageTrace), PipelineError> {
    let image_err = |source| PipelineError::Image { path: path.to_path_buf(), source };
    let mut trace = ImageTrace { path: path.to_path_buf(), stages: Vec::new() };
    let img = read_netpbm(path).map_err(image_err)?;
    let (kind, (r, c)) = match &img {
        Image::Gray(g) => ("gray", g.dims()),
        Image::Rgb(x) => ("rgb", (x.rows(), x.cols())),
    };
    trace.push("read", format!("{r}x{c} {kind}"));
    let gray = img.into_gray();
    trace.push("grayscale", dims(&gray));
    let gray = match rect {
        Some(rect) => {
            let g = crop(&gray, rect).map_err(image_err)?;
            trace.push("crop", dims(&g));
            g
        }
        None => gray,
    };
    let gray = resize(&gray, cfg.resize.0, cfg.resize.1).map_err(image_err)?;
    trace.push("resize", dims(&gray));
    let d = pdfb_decompose(&gray, &cfg.pdfb)
        .map_err(|source| PipelineError::Transform { path: path.to_path_buf(), source })?;
    trace.push("contourlet", describe(&d));
    let v = vectorize(&d).map_err(|source| PipelineError::Vectorize { path: path.to_path_buf(), source })?;
    trace.push("vectorize", v.len().to_string());
    Ok((v, trace))
}

/// Features for every entry, in manifest order. Images are processed in
/// parallel; the first failing entry in manifest order is reported.
pub fn extract_features(
    entries: &[ManifestEntry],
    cfg: &RunConfig,
) -> Result<Vec<(Vec<f64>, ImageTrace)>, PipelineError> {
    let results: Vec<_> =
        entries.par_iter().map(|e| extract_image_features(&e.path, e.crop.as_ref(), cfg)).collect();
    results.into_iter().collect()
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: TrainedModel,
    pub confusion: ConfusionMatrix,
    pub split: Split,
    /// Full PCA eigenvalue sequence of the training data.
    pub pca_spectrum: Vec<f64>,
    /// Full LDA eigenvalue sequence in the retained PCA space.
    pub lda_spectrum: Vec<f64>,
    /// Stage trace of every manifest entry, in manifest order.
    pub traces: Vec<ImageTrace>,
}

fn label_index(alphabet: &[String], e: &ManifestEntry) -> Result<usize, PipelineError> {
    alphabet.iter().position(|l| l == e.label).ok_or_else(|| {
        PipelineError::InvalidArgument(format!("{}: label {} is not in the model's alphabet", e.path.display(), e.label))
    })
}

fn project_all(model: &TrainedModel, raw: &[&Vec<f64>], entries: &[&ManifestEntry]) -> Result<Vec<Vec<f64>>, PipelineError> {
    raw.iter()
        .zip(entries)
        .map(|(v, e)| {
            if v.len() != model.projection.raw_dim() {
                return Err(PipelineError::FeatureDimension {
                    path: e.path.clone(),
                    expected: model.projection.raw_dim(),
                    found: v.len(),
                });
            }
            Ok(model.projection.project(v)?)
        })
        .collect()
}

/// Fit projection and classifier on the training split and evaluate on the
/// test split.
pub fn run_train(entries: &[ManifestEntry], cfg: &RunConfig, spec: SplitSpec) -> Result<TrainOutcome, PipelineError> {
    if entries.is_empty() {
        return Err(PipelineError::InvalidArgument("manifest lists no images".into()));
    }
    cfg.validate()?;
    let parts = split(entries, spec)?;
    let alphabet = effective_alphabet(entries);
    let extracted = extract_features(entries, cfg)?;
    let labels: Vec<usize> = entries.iter().map(|e| label_index(&alphabet, e)).collect::<Result<_, _>>()?;

    let train_raw: Vec<Vec<f64>> = parts.train.iter().map(|&i| extracted[i].0.clone()).collect();
    let train_labels: Vec<usize> = parts.train.iter().map(|&i| labels[i]).collect();
    let fit = fit_projection_report(&to_matrix(&train_raw)?, &train_labels, cfg.pca_energy, cfg.q)?;
    let projection = fit.model;
    let train_z: Vec<Vec<f64>> = train_raw.iter().map(|v| projection.project(v)).collect::<Result<_, _>>()?;
    let classifier = ClassifierModel::fit(cfg.classifier, &train_z, &train_labels, &alphabet)?;
    let model = TrainedModel { config: cfg.clone(), projection, classifier };

    let test_raw: Vec<&Vec<f64>> = parts.test.iter().map(|&i| &extracted[i].0).collect();
    let test_entries: Vec<&ManifestEntry> = parts.test.iter().map(|&i| &entries[i]).collect();
    let test_z = project_all(&model, &test_raw, &test_entries)?;
    let test_labels: Vec<usize> = parts.test.iter().map(|&i| labels[i]).collect();
    let confusion = model.classifier.evaluate(&test_z, &test_labels)?;
    let traces = extracted.into_iter().map(|(_, t)| t).collect();
    Ok(TrainOutcome {
        model,
        confusion,
        split: parts,
        pca_spectrum: fit.pca_spectrum,
        lda_spectrum: fit.lda_spectrum,
        traces,
    })
}

/// Evaluate a model on every entry, or only on the test part of `restrict`.
pub fn run_eval(
    entries: &[ManifestEntry],
    model: &TrainedModel,
    restrict: Option<SplitSpec>,
) -> Result<ConfusionMatrix, PipelineError> {
    if entries.is_empty() {
        return Err(PipelineError::InvalidArgument("manifest lists no images".into()));
    }
    let chosen: Vec<&ManifestEntry> = match restrict {
        Some(spec) => split(entries, spec)?.test.iter().map(|&i| &entries[i]).collect(),
        None => entries.iter().collect(),
    };
    let labels: Vec<usize> =
        chosen.iter().map(|e| label_index(&model.classifier.alphabet, e)).collect::<Result<_, _>>()?;
    let owned: Vec<ManifestEntry> = chosen.iter().map(|&e| e.clone()).collect();
    let extracted = extract_features(&owned, &model.config)?;
    let raw: Vec<&Vec<f64>> = extracted.iter().map(|(v, _)| v).collect();
    let z = project_all(model, &raw, &chosen)?;
    Ok(model.classifier.evaluate(&z, &labels)?)
}

/// Classify one image; returns the label and the stage trace.
pub fn run_predict(
    model: &TrainedModel,
    path: &Path,
    rect: Option<&CropRect>,
) -> Result<(String, ImageTrace), PipelineError> {
    let (raw, mut trace) = extract_image_features(path, rect, &model.config)?;
    let entry = ManifestEntry { path: path.to_path_buf(), label: "fa", crop: rect.copied() };
    let z = project_all(model, &[&raw], &[&entry])?.remove(0);
    trace.push("project", z.len().to_string());
    let label = model.classifier.predict_label(&z)?.to_string();
    trace.push("classify", label.clone());
    Ok((label, trace))
}

/// Write every subband as a linearly rescaled P5 image plus `subbands.txt`
/// recording, per band, `value = offset + pixel * scale`.
pub fn write_decomposition(d: &Decomposition, out_dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let io = |path: &Path, e: String| PipelineError::Io { path: path.to_path_buf(), message: e };
    std::fs::create_dir_all(out_dir).map_err(|e| io(out_dir, e.to_string()))?;
    let mut names: Vec<(String, &GrayImage)> = vec![("lowpass".into(), &d.lowpass)];
    for (i, l) in d.levels.iter().enumerate() {
        match l {
            Level::Wavelet(t) => {
                for (tag, b) in ["lh", "hl", "hh"].iter().zip(t.bands()) {
                    names.push((format!("level{i}_{tag}"), b));
                }
            }
            Level::Directional(g) => {
                for (j, b) in g.subbands.iter().enumerate() {
                    names.push((format!("level{i}_dir{j}"), b));
                }
            }
        }
    }
    let mut text = String::from("# index name rows cols offset scale\n");
    let mut written = Vec::new();
    for (idx, (name, band)) in names.iter().enumerate() {
        let lo = band.as_slice().iter().copied().fold(f64::INFINITY, f64::min);
        let hi = band.as_slice().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scale = if hi > lo { (hi - lo) / 255.0 } else { 1.0 };
        let img = GrayImage::from_fn(band.rows(), band.cols(), |r, c| (band.get(r, c) - lo) / scale);
        let path = out_dir.join(format!("{idx:02}_{name}.pgm"));
        write_pgm(&path, &img).map_err(|e| io(&path, e.to_string()))?;
        text.push_str(&format!("{idx} {name} {} {} {lo:e} {scale:e}\n", band.rows(), band.cols()));
        written.push(path);
    }
    let path = out_dir.join("subbands.txt");
    std::fs::write(&path, text).map_err(|e| io(&path, e.to_string()))?;
    Ok(written)
}
