//! Single-file persistence of a trained model (run configuration,
//! projection and classifier). All integers and reals are little-endian;
//! matrices are written column-major. See `docs/model-format.md`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::{PipelineError, RunConfig};
use crate::classify::{Classifier, ClassifierKind, ClassifierModel};
use crate::contourlet::PdfbConfig;
use crate::features::ProjectionModel;

pub const MODEL_MAGIC: &[u8; 8] = b"CPOSEMDL";
pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub config: RunConfig,
    pub projection: ProjectionModel,
    pub classifier: ClassifierModel,
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
    }
    fn u64(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u64).to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn reals<'a>(&mut self, vs: impl IntoIterator<Item = &'a f64>) {
        for &v in vs {
            self.f64(v);
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

fn bad(msg: impl Into<String>) -> PipelineError {
    PipelineError::ModelFormat(msg.into())
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], PipelineError> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| bad("unexpected end of data"))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, PipelineError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize, PipelineError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }
    fn u64(&mut self) -> Result<usize, PipelineError> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes"));
        usize::try_from(v).map_err(|_| bad("length does not fit in memory"))
    }
    fn f64(&mut self) -> Result<f64, PipelineError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn reals(&mut self, n: usize) -> Result<Vec<f64>, PipelineError> {
        if n.checked_mul(8).is_none_or(|b| b > self.bytes.len() - self.at) {
            return Err(bad("unexpected end of data"));
        }
        (0..n).map(|_| self.f64()).collect()
    }
}

pub fn encode_model(m: &TrainedModel) -> Vec<u8> {
    let mut w = Writer::default();
    w.0.extend_from_slice(MODEL_MAGIC);
    w.u32(MODEL_VERSION as usize);

    let c = &m.config;
    w.u32(c.pdfb.nlevs().len());
    for &d in c.pdfb.nlevs() {
        w.u32(d);
    }
    w.u32(c.resize.0);
    w.u32(c.resize.1);
    w.f64(c.pca_energy);
    w.u32(c.q);

    let p = &m.projection;
    w.u64(p.raw_dim());
    w.u64(p.p());
    w.u64(p.q());
    w.reals(p.mean.iter());
    w.reals(p.pca_basis.iter());
    w.reals(p.pca_eigenvalues.iter());
    w.reals(p.lda_basis.iter());
    w.reals(p.lda_eigenvalues.iter());

    let cl = &m.classifier;
    w.u32(cl.alphabet.len());
    for l in &cl.alphabet {
        w.u32(l.len());
        w.0.extend_from_slice(l.as_bytes());
    }
    match &cl.classifier {
        Classifier::Knn { k, references, labels } => {
            w.u8(0);
            w.u32(*k);
            w.u64(references.len());
            w.u64(cl.dim());
            for &l in labels {
                w.u32(l);
            }
            for r in references {
                w.reals(r);
            }
        }
        Classifier::MinDist { centroids } => {
            w.u8(1);
            w.u64(centroids.len());
            w.u64(cl.dim());
            for c in centroids {
                w.reals(c);
            }
        }
    }
    let sum = fnv1a64(&w.0);
    w.0.extend_from_slice(&sum.to_le_bytes());
    w.0
}

pub fn decode_model(bytes: &[u8]) -> Result<TrainedModel, PipelineError> {
    if bytes.len() < MODEL_MAGIC.len() + 12 || &bytes[..8] != MODEL_MAGIC {
        return Err(bad("not a model file (bad magic)"));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let mut r = Reader { bytes: body, at: 8 };
    let version = r.u32()?;
    if version != MODEL_VERSION as usize {
        return Err(bad(format!("unsupported format version {version}, this build reads {MODEL_VERSION}")));
    }
    if u64::from_le_bytes(tail.try_into().expect("8 bytes")) != fnv1a64(body) {
        return Err(bad("checksum mismatch (file is corrupted)"));
    }

    let nl = r.u32()?;
    let nlevs = (0..nl).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
    let pdfb = PdfbConfig::new(nlevs).map_err(|e| bad(e.to_string()))?;
    let resize = (r.u32()?, r.u32()?);
    let pca_energy = r.f64()?;
    let q_cfg = r.u32()?;

    let (d, p, q) = (r.u64()?, r.u64()?, r.u64()?);
    let mean = DVector::from_vec(r.reals(d)?);
    let pca_basis = DMatrix::from_vec(d, p, r.reals(d.saturating_mul(p))?);
    let pca_eigenvalues = r.reals(p)?;
    let lda_basis = DMatrix::from_vec(p, q, r.reals(p.saturating_mul(q))?);
    let lda_eigenvalues = r.reals(q)?;

    let na = r.u32()?;
    let mut alphabet = Vec::with_capacity(na.min(1024));
    for _ in 0..na {
        let len = r.u32()?;
        let s = std::str::from_utf8(r.take(len)?).map_err(|_| bad("label is not UTF-8"))?;
        alphabet.push(s.to_string());
    }
    let classifier = match r.u8()? {
        0 => {
            let k = r.u32()?;
            let (n, dim) = (r.u64()?, r.u64()?);
            let labels = (0..n).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
            if labels.iter().any(|&l| l >= alphabet.len()) {
                return Err(bad("reference label outside the alphabet"));
            }
            let references = (0..n).map(|_| r.reals(dim)).collect::<Result<Vec<_>, _>>()?;
            if k == 0 || k > n {
                return Err(bad(format!("k = {k} is invalid for {n} references")));
            }
            Classifier::Knn { k, references, labels }
        }
        1 => {
            let (n, dim) = (r.u64()?, r.u64()?);
            if n != alphabet.len() {
                return Err(bad("centroid count differs from the alphabet size"));
            }
            Classifier::MinDist { centroids: (0..n).map(|_| r.reals(dim)).collect::<Result<Vec<_>, _>>()? }
        }
        t => return Err(bad(format!("unknown classifier tag {t}"))),
    };
    if r.at != body.len() {
        return Err(bad("trailing bytes after classifier"));
    }
    let classifier = ClassifierModel { alphabet, classifier };
    if classifier.dim() != q {
        return Err(bad(format!("classifier dimension {} differs from projection q = {q}", classifier.dim())));
    }
    let config = RunConfig { pdfb, resize, pca_energy, q: q_cfg, classifier: classifier.kind() };
    let projection = ProjectionModel { mean, pca_basis, pca_eigenvalues, lda_basis, lda_eigenvalues };
    Ok(TrainedModel { config, projection, classifier })
}

pub fn save_model(path: &Path, m: &TrainedModel) -> Result<(), PipelineError> {
    std::fs::write(path, encode_model(m)).map_err(|e| PipelineError::Io { path: path.to_path_buf(), message: e.to_string() })
}

pub fn load_model(path: &Path) -> Result<TrainedModel, PipelineError> {
    let bytes =
        std::fs::read(path).map_err(|e| PipelineError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    decode_model(&bytes)
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        self.classifier.kind()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tiny_model(kind: ClassifierKind) -> TrainedModel {
        let projection = ProjectionModel {
            mean: DVector::from_vec(vec![0.5, -1.0, 2.0]),
            pca_basis: DMatrix::from_vec(3, 2, vec![1.0, 0.0, 0.0, 0.0, 0.6, 0.8]),
            pca_eigenvalues: vec![3.0, 1.5],
            lda_basis: DMatrix::from_vec(2, 1, vec![0.8, -0.6]),
            lda_eigenvalues: vec![7.25],
        };
        let alphabet = vec!["pl".to_string(), "fa".to_string()];
        let x = vec![vec![-1.0], vec![2.5]];
        let classifier = ClassifierModel::fit(kind, &x, &[0, 1], &alphabet).unwrap();
        let config = RunConfig { q: 1, classifier: kind, ..RunConfig::default() };
        TrainedModel { config, projection, classifier }
    }

    #[test]
    fn round_trip_both_kinds() {
        for kind in [ClassifierKind::Knn { k: 2 }, ClassifierKind::MinDist] {
            let m = tiny_model(kind);
            assert_eq!(decode_model(&encode_model(&m)).unwrap(), m);
        }
    }

    #[test]
    fn corruption_is_detected() {
        let bytes = encode_model(&tiny_model(ClassifierKind::Knn { k: 1 }));
        let mut flipped = bytes.clone();
        flipped[40] ^= 1;
        assert!(matches!(decode_model(&flipped), Err(PipelineError::ModelFormat(m)) if m.contains("checksum")));
        assert!(decode_model(&bytes[..bytes.len() - 3]).is_err());
        let mut wrong_magic = bytes.clone();
        wrong_magic[0] = b'X';
        assert!(decode_model(&wrong_magic).is_err());
        let mut future = bytes.clone();
        future[8] = 9;
        assert!(matches!(decode_model(&future), Err(PipelineError::ModelFormat(m)) if m.contains("version 9")));
        assert!(decode_model(b"").is_err());
    }

    #[test]
    fn header_layout() {
        let bytes = encode_model(&tiny_model(ClassifierKind::MinDist));
        assert_eq!(&bytes[..8], b"CPOSEMDL");
        assert_eq!(&bytes[8..12], &1u32.to_le_bytes());
        // nlevs = [0, 1]
        assert_eq!(&bytes[12..24], &[2, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0]);
    }
}
