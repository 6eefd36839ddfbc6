//! k-nearest-neighbour and minimum-distance classifiers, and confusion
//! matrices.
//!
//! Labels are indices into a declared alphabet; "alphabet order" in the tie
//! rules means index order. Distances are Euclidean.

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("k must be between 1 and the number of references ({n}), got {k}")]
    KOutOfRange { k: usize, n: usize },
    #[error("no training vectors")]
    Empty,
    #[error("label index {label} is outside the alphabet of {size} labels")]
    UnknownLabel { label: usize, size: usize },
    #[error("class {0:?} has no training vectors")]
    EmptyClass(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{vectors} vectors but {labels} labels")]
    LengthMismatch { vectors: usize, labels: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassifierKind {
    Knn { k: usize },
    MinDist,
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClassifierKind::Knn { k } => write!(f, "{k}-NN"),
            ClassifierKind::MinDist => f.write_str("minimum distance"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classifier {
    Knn { k: usize, references: Vec<Vec<f64>>, labels: Vec<usize> },
    MinDist { centroids: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierModel {
    pub alphabet: Vec<String>,
    pub classifier: Classifier,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn validate(x: &[Vec<f64>], labels: &[usize], alphabet: &[String]) -> Result<usize, ClassifyError> {
    if x.len() != labels.len() {
        return Err(ClassifyError::LengthMismatch { vectors: x.len(), labels: labels.len() });
    }
    let dim = x.first().ok_or(ClassifyError::Empty)?.len();
    if let Some(v) = x.iter().find(|v| v.len() != dim) {
        return Err(ClassifyError::DimensionMismatch { expected: dim, found: v.len() });
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= alphabet.len()) {
        return Err(ClassifyError::UnknownLabel { label, size: alphabet.len() });
    }
    Ok(dim)
}

pub fn knn_fit(x: &[Vec<f64>], labels: &[usize], alphabet: &[String], k: usize) -> Result<ClassifierModel, ClassifyError> {
    validate(x, labels, alphabet)?;
    if k == 0 || k > x.len() {
        return Err(ClassifyError::KOutOfRange { k, n: x.len() });
    }
    Ok(ClassifierModel {
        alphabet: alphabet.to_vec(),
        classifier: Classifier::Knn { k, references: x.to_vec(), labels: labels.to_vec() },
    })
}

pub fn mindist_fit(x: &[Vec<f64>], labels: &[usize], alphabet: &[String]) -> Result<ClassifierModel, ClassifyError> {
    let dim = validate(x, labels, alphabet)?;
    let mut sums = vec![vec![0.0; dim]; alphabet.len()];
    let mut counts = vec![0usize; alphabet.len()];
    for (v, &l) in x.iter().zip(labels) {
        for (s, a) in sums[l].iter_mut().zip(v) {
            *s += a;
        }
        counts[l] += 1;
    }
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(ClassifyError::EmptyClass(alphabet[c].clone()));
    }
    let centroids = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &n)| s.into_iter().map(|v| v / n as f64).collect())
        .collect();
    Ok(ClassifierModel { alphabet: alphabet.to_vec(), classifier: Classifier::MinDist { centroids } })
}

impl ClassifierModel {
    pub fn fit(
        kind: ClassifierKind,
        x: &[Vec<f64>],
        labels: &[usize],
        alphabet: &[String],
    ) -> Result<Self, ClassifyError> {
        match kind {
            ClassifierKind::Knn { k } => knn_fit(x, labels, alphabet, k),
            ClassifierKind::MinDist => mindist_fit(x, labels, alphabet),
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        match &self.classifier {
            Classifier::Knn { k, .. } => ClassifierKind::Knn { k: *k },
            Classifier::MinDist { .. } => ClassifierKind::MinDist,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.classifier {
            Classifier::Knn { references, .. } => references[0].len(),
            Classifier::MinDist { centroids } => centroids[0].len(),
        }
    }

    /// Predicted label index.
    pub fn predict(&self, x: &[f64]) -> Result<usize, ClassifyError> {
        if x.len() != self.dim() {
            return Err(ClassifyError::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        Ok(match &self.classifier {
            Classifier::Knn { k, references, labels } => {
                let mut order: Vec<(f64, usize)> =
                    references.iter().enumerate().map(|(i, r)| (squared_distance(r, x), i)).collect();
                order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let mut votes = vec![0usize; self.alphabet.len()];
                let mut nearest = vec![f64::INFINITY; self.alphabet.len()];
                for &(d, i) in &order[..*k] {
                    let l = labels[i];
                    votes[l] += 1;
                    nearest[l] = nearest[l].min(d);
                }
                // most votes, then closest member, then alphabet order
                (0..self.alphabet.len())
                    .filter(|&l| votes[l] > 0)
                    .min_by(|&a, &b| votes[b].cmp(&votes[a]).then(nearest[a].total_cmp(&nearest[b])).then(a.cmp(&b)))
                    .expect("k >= 1 casts at least one vote")
            }
            Classifier::MinDist { centroids } => centroids
                .iter()
                .enumerate()
                .map(|(l, c)| (squared_distance(c, x), l))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .expect("at least one centroid")
                .1,
        })
    }

    pub fn predict_label(&self, x: &[f64]) -> Result<&str, ClassifyError> {
        Ok(&self.alphabet[self.predict(x)?])
    }

    pub fn evaluate(&self, x: &[Vec<f64>], labels: &[usize]) -> Result<ConfusionMatrix, ClassifyError> {
        if x.len() != labels.len() {
            return Err(ClassifyError::LengthMismatch { vectors: x.len(), labels: labels.len() });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= self.alphabet.len()) {
            return Err(ClassifyError::UnknownLabel { label, size: self.alphabet.len() });
        }
        let predicted: Vec<usize> = x.par_iter().map(|v| self.predict(v)).collect::<Result<_, _>>()?;
        let mut cm = ConfusionMatrix::new(self.alphabet.clone());
        for (&t, &p) in labels.iter().zip(&predicted) {
            cm.record(t, p);
        }
        Ok(cm)
    }
}

/// Rows are target classes, columns predicted classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub alphabet: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(alphabet: Vec<String>) -> Self {
        let n = alphabet.len();
        Self { alphabet, counts: vec![vec![0; n]; n] }
    }

    pub fn record(&mut self, target: usize, predicted: usize) {
        self.counts[target][predicted] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.trace() as f64 / t as f64,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.trace() == self.total()
    }

    /// Aligned table with a header row of predicted labels and a trailing
    /// accuracy line.
    pub fn to_table(&self) -> String {
        let width = self
            .counts
            .iter()
            .flatten()
            .map(|c| c.to_string().len())
            .chain(self.alphabet.iter().map(String::len))
            .max()
            .unwrap_or(1)
            .max(6);
        let mut out = String::new();
        let _ = write!(out, "{:>width$}", "target");
        for l in &self.alphabet {
            let _ = write!(out, " {l:>width$}");
        }
        out.push('\n');
        for (l, row) in self.alphabet.iter().zip(&self.counts) {
            let _ = write!(out, "{l:>width$}");
            for c in row {
                let _ = write!(out, " {c:>width$}");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "accuracy {:.4}", self.accuracy());
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("target");
        for l in &self.alphabet {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (l, row) in self.alphabet.iter().zip(&self.counts) {
            out.push_str(l);
            for c in row {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }
}

impl std::fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_table())
    }
}
