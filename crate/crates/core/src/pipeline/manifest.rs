//! Dataset manifests: CSV lines `path,label[,top,left,height,width]`.
//!
//! Paths are relative to the manifest's directory unless absolute. Blank
//! lines and lines starting with `#` are skipped. The crop fields are either
//! all present or all empty.

use std::path::{Path, PathBuf};

use super::PipelineError;
use crate::image_io::CropRect;

/// Pose labels in canonical order, left profile to right profile.
pub const POSE_ALPHABET: [&str; 7] = ["pl", "hl", "ql", "fa", "qr", "hr", "pr"];

/// Map a manifest label to its canonical class; the two frontal series
/// `fa` and `fb` form one class.
pub fn canonical_label(raw: &str) -> Option<&'static str> {
    let raw = raw.trim();
    let raw = if raw == "fb" { "fa" } else { raw };
    POSE_ALPHABET.iter().copied().find(|&l| l == raw)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: &'static str,
    pub crop: Option<CropRect>,
}

fn parse_record(record: &csv::StringRecord, base: &Path, line: u64) -> Result<ManifestEntry, PipelineError> {
    let err = |message: String| PipelineError::Manifest { line, message };
    let path = record.get(0).map(str::trim).unwrap_or("");
    if path.is_empty() {
        return Err(err("empty image path".into()));
    }
    let raw_label = record.get(1).map(str::trim).unwrap_or("");
    let label = canonical_label(raw_label)
        .ok_or_else(|| PipelineError::UnknownLabel { line, label: raw_label.to_string() })?;
    let extra: Vec<&str> = record.iter().skip(2).map(str::trim).collect();
    if extra.len() > 4 {
        return Err(err(format!("expected at most 6 fields, found {}", record.len())));
    }
    let crop = if extra.iter().all(|f| f.is_empty()) {
        None
    } else {
        if extra.len() != 4 || extra.iter().any(|f| f.is_empty()) {
            return Err(err("crop needs all four of top,left,height,width".into()));
        }
        let mut v = [0usize; 4];
        for (slot, field) in v.iter_mut().zip(&extra) {
            *slot = field.parse().map_err(|_| err(format!("crop field {field:?} is not a non-negative integer")))?;
        }
        if v[2] == 0 || v[3] == 0 {
            return Err(err("crop height and width must be positive".into()));
        }
        Some(CropRect::new(v[0], v[1], v[2], v[3]))
    };
    let p = Path::new(path);
    let path = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    Ok(ManifestEntry { path, label, crop })
}

/// Parse manifest text; relative paths resolve against `base`.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>, PipelineError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| PipelineError::Manifest {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        entries.push(parse_record(&record, base, line)?);
    }
    Ok(entries)
}

pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>, PipelineError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PipelineError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let entries = parse_manifest(&text, base)?;
    if entries.is_empty() {
        return Err(PipelineError::EmptyManifest(path.to_path_buf()));
    }
    Ok(entries)
}

/// Labels present in `entries`, in canonical order.
pub fn effective_alphabet(entries: &[ManifestEntry]) -> Vec<String> {
    POSE_ALPHABET.iter().filter(|l| entries.iter().any(|e| e.label == **l)).map(|l| l.to_string()).collect()
}
