//! Raw feature extraction from a decomposition and the PCA→LDA reduction.
//!
//! Data matrices hold one sample per row. PCA works on the `n × n` Gram
//! matrix of the centred data because the raw dimension dwarfs the number
//! of training images; LDA is solved in the PCA space by Cholesky reduction
//! of the within-class scatter.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::contourlet::{Decomposition, Level};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("decomposition has the wrong structure for feature extraction: {0}")]
    Structure(String),
    #[error("eigenvalue sequence has no positive entry")]
    NoPositiveEigenvalue,
    #[error("need at least {needed} samples, got {found}")]
    TooFewSamples { needed: usize, found: usize },
    #[error("requested {requested} components but only {achievable} are achievable")]
    RankExceeded { requested: usize, achievable: usize },
    #[error("within-class scatter is singular: {0}")]
    SingularScatter(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// The four equally sized bands of the coarsest wavelet level (LL, LH, HL,
/// HH), each flattened row-major.
pub fn vectorize(d: &Decomposition) -> Result<Vec<f64>, FeatureError> {
    let triple = match d.levels.first() {
        Some(Level::Wavelet(t)) => t,
        Some(Level::Directional(_)) => {
            return Err(FeatureError::Structure("coarsest level is directional, expected a wavelet level".into()))
        }
        None => return Err(FeatureError::Structure("decomposition has no levels".into())),
    };
    let bands = [&d.lowpass, &triple.lh, &triple.hl, &triple.hh];
    if bands.iter().any(|b| b.dims() != d.lowpass.dims()) {
        return Err(FeatureError::Structure("LL, LH, HL and HH bands differ in size".into()));
    }
    Ok(bands.iter().flat_map(|b| b.as_slice().iter().copied()).collect())
}

/// Normalized cumulative sum of an eigenvalue sequence.
pub fn ncsev(eigenvalues: &[f64]) -> Result<Vec<f64>, FeatureError> {
    let cum: Vec<f64> = eigenvalues
        .iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    let total = match cum.last() {
        Some(&t) if t > 0.0 && eigenvalues.iter().all(|&v| v >= 0.0) => t,
        _ => return Err(FeatureError::NoPositiveEigenvalue),
    };
    Ok(cum.into_iter().map(|c| c / total).collect())
}

/// Flip each column so its largest-magnitude entry is positive.
fn fix_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let pivot = col.iter().copied().fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if pivot < 0.0 {
            col.neg_mut();
        }
    }
}

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PcaTarget {
    Count(usize),
    /// Smallest count whose NCsEv reaches the threshold.
    Energy(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pca {
    pub mean: DVector<f64>,
    /// `d × p`, orthonormal columns.
    pub basis: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    /// Every covariance eigenvalue available from the data (length `n`),
    /// clamped at zero.
    pub spectrum: Vec<f64>,
    /// Number of eigenvalues above the numerical floor.
    pub rank: usize,
}

pub fn column_means(x: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_fn(x.ncols(), |j, _| x.column(j).mean())
}

fn centred(x: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    let mut xc = x.clone();
    for mut row in xc.row_iter_mut() {
        row -= mean.transpose();
    }
    xc
}

fn energy_count(spectrum: &[f64], energy: f64) -> Result<usize, FeatureError> {
    if !(energy > 0.0 && energy <= 1.0) {
        return Err(FeatureError::InvalidParameter(format!("PCA energy must lie in (0, 1], got {energy}")));
    }
    let curve = ncsev(spectrum)?;
    Ok(curve.iter().position(|&c| c >= energy - 1e-12).map_or(curve.len(), |i| i + 1))
}

pub fn pca_fit(x: &DMatrix<f64>, target: PcaTarget) -> Result<Pca, FeatureError> {
    let (n, d) = x.shape();
    if n < 2 {
        return Err(FeatureError::TooFewSamples { needed: 2, found: n });
    }
    let mean = column_means(x);
    let xc = centred(x, &mean);
    let gram = (&xc * xc.transpose()) / (n - 1) as f64;
    let (values, vectors) = sorted_eigen(gram);
    let spectrum: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
    let floor = spectrum[0] * 1e-12 * n.max(d) as f64;
    let rank = spectrum.iter().take_while(|&&v| v > floor).count().min(n - 1).min(d);
    let p = match target {
        PcaTarget::Count(p) => p,
        PcaTarget::Energy(e) => energy_count(&spectrum, e)?.min(rank),
    };
    if p == 0 {
        return Err(FeatureError::InvalidParameter("PCA must keep at least one component".into()));
    }
    if p > rank {
        return Err(FeatureError::RankExceeded { requested: p, achievable: rank });
    }
    let mut basis = DMatrix::zeros(d, p);
    for j in 0..p {
        let w = xc.transpose() * vectors.column(j) / ((n - 1) as f64 * spectrum[j]).sqrt();
        basis.set_column(j, &w);
    }
    fix_signs(&mut basis);
    Ok(Pca { mean, basis, eigenvalues: spectrum[..p].to_vec(), spectrum, rank })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lda {
    /// `p × q`, unit-length columns.
    pub basis: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    /// All `p` generalized eigenvalues, clamped at zero.
    pub spectrum: Vec<f64>,
}

/// Within- and between-class scatter of `z` (rows are samples).
pub fn scatter_matrices(z: &DMatrix<f64>, labels: &[usize], classes: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let p = z.ncols();
    let mean = column_means(z);
    let mut sums = vec![DVector::<f64>::zeros(p); classes];
    let mut counts = vec![0usize; classes];
    for (row, &c) in z.row_iter().zip(labels) {
        sums[c] += row.transpose();
        counts[c] += 1;
    }
    let means: Vec<DVector<f64>> =
        sums.iter().zip(&counts).map(|(s, &k)| if k > 0 { s / k as f64 } else { s.clone() }).collect();
    let mut sw = DMatrix::zeros(p, p);
    for (row, &c) in z.row_iter().zip(labels) {
        let dv = row.transpose() - &means[c];
        sw += &dv * dv.transpose();
    }
    let mut sb = DMatrix::zeros(p, p);
    for (m, &k) in means.iter().zip(&counts) {
        let dv = m - &mean;
        sb += (&dv * dv.transpose()) * k as f64;
    }
    (sw, sb)
}

fn class_count(labels: &[usize]) -> usize {
    let mut seen: Vec<usize> = labels.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

fn check_labels(labels: &[usize]) -> Result<usize, FeatureError> {
    let classes = class_count(labels);
    let top = labels.iter().copied().max().unwrap_or(0);
    if classes < 2 {
        return Err(FeatureError::InvalidParameter(format!("LDA needs at least 2 classes, got {classes}")));
    }
    if top + 1 != classes {
        return Err(FeatureError::InvalidParameter("class ids must be 0..C with every class present".into()));
    }
    Ok(classes)
}

/// Fisher discriminant directions in the space of `z`; `labels` are class
/// ids `0..C`, every class present.
pub fn lda_fit(z: &DMatrix<f64>, labels: &[usize], q: usize) -> Result<Lda, FeatureError> {
    let (n, p) = z.shape();
    if labels.len() != n {
        return Err(FeatureError::DimensionMismatch { expected: n, found: labels.len() });
    }
    let classes = check_labels(labels)?;
    if q == 0 || q > classes - 1 || q > p {
        return Err(FeatureError::InvalidParameter(format!(
            "LDA keeps 1..={} directions for {classes} classes in {p} dimensions, got {q}",
            (classes - 1).min(p)
        )));
    }
    let (sw, sb) = scatter_matrices(z, labels, classes);
    let chol = sw.clone().cholesky().ok_or_else(|| {
        FeatureError::SingularScatter(format!("{p}x{p} within-class scatter is not positive definite"))
    })?;
    let l = chol.l();
    let diag: Vec<f64> = l.diagonal().iter().copied().collect();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    if lo.is_nan() || lo <= 0.0 || (lo / hi).powi(2) < 1e-14 {
        return Err(FeatureError::SingularScatter(format!(
            "{p}x{p} within-class scatter is numerically rank deficient; keep fewer PCA components"
        )));
    }
    // M = L⁻¹ S_B L⁻ᵀ
    let linv_sb = l.solve_lower_triangular(&sb).expect("nonzero diagonal");
    let m = l.solve_lower_triangular(&linv_sb.transpose()).expect("nonzero diagonal");
    let m = (&m + m.transpose()) * 0.5;
    let (values, vectors) = sorted_eigen(m);
    let lt = l.transpose();
    let mut basis = DMatrix::zeros(p, q);
    for j in 0..q {
        let w = lt.solve_upper_triangular(&vectors.column(j).into_owned()).expect("nonzero diagonal");
        basis.set_column(j, &(&w / w.norm()));
    }
    fix_signs(&mut basis);
    let spectrum: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
    Ok(Lda { basis, eigenvalues: spectrum[..q].to_vec(), spectrum })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionModel {
    pub mean: DVector<f64>,
    pub pca_basis: DMatrix<f64>,
    pub pca_eigenvalues: Vec<f64>,
    pub lda_basis: DMatrix<f64>,
    pub lda_eigenvalues: Vec<f64>,
}

impl ProjectionModel {
    pub fn raw_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn p(&self) -> usize {
        self.pca_basis.ncols()
    }

    pub fn q(&self) -> usize {
        self.lda_basis.ncols()
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>, FeatureError> {
        if x.len() != self.raw_dim() {
            return Err(FeatureError::DimensionMismatch { expected: self.raw_dim(), found: x.len() });
        }
        let xc = DVector::from_column_slice(x) - &self.mean;
        let z = self.pca_basis.tr_mul(&xc);
        Ok(self.lda_basis.tr_mul(&z).iter().copied().collect())
    }
}

/// A fitted projection plus the full eigenvalue sequences of both stages.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionFit {
    pub model: ProjectionModel,
    /// Every PCA eigenvalue available from the training data.
    pub pca_spectrum: Vec<f64>,
    /// Every LDA eigenvalue in the retained PCA space.
    pub lda_spectrum: Vec<f64>,
}

/// PCA retaining the smallest count reaching `pca_energy` (capped at
/// `n - C`), then LDA down to `q` features.
pub fn fit_projection(
    x: &DMatrix<f64>,
    labels: &[usize],
    pca_energy: f64,
    q: usize,
) -> Result<ProjectionModel, FeatureError> {
    fit_projection_report(x, labels, pca_energy, q).map(|f| f.model)
}

pub fn fit_projection_report(
    x: &DMatrix<f64>,
    labels: &[usize],
    pca_energy: f64,
    q: usize,
) -> Result<ProjectionFit, FeatureError> {
    let n = x.nrows();
    if labels.len() != n {
        return Err(FeatureError::DimensionMismatch { expected: n, found: labels.len() });
    }
    let classes = check_labels(labels)?;
    if n <= classes {
        return Err(FeatureError::SingularScatter(format!(
            "{n} samples in {classes} classes leave no within-class degrees of freedom"
        )));
    }
    let probe = pca_fit(x, PcaTarget::Energy(pca_energy))?;
    let p = probe.eigenvalues.len().min(n - classes);
    let pca = if p == probe.eigenvalues.len() { probe } else { pca_fit(x, PcaTarget::Count(p))? };
    let z = centred(x, &pca.mean) * &pca.basis;
    let lda = lda_fit(&z, labels, q)?;
    let model = ProjectionModel {
        mean: pca.mean,
        pca_basis: pca.basis,
        pca_eigenvalues: pca.eigenvalues,
        lda_basis: lda.basis,
        lda_eigenvalues: lda.eigenvalues,
    };
    Ok(ProjectionFit { model, pca_spectrum: pca.spectrum, lda_spectrum: lda.spectrum })
}

/// Stack equal-length rows into a matrix.
pub fn to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, FeatureError> {
    let d = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != d) {
        return Err(FeatureError::DimensionMismatch { expected: d, found: bad.len() });
    }
    Ok(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
}
