//! Pyramidal directional filter bank.

use super::dfb::{dfb_decompose, dfb_reconstruct, dfb_subband_shape, DirectionalGroup};
use super::lp::{lp_decompose, lp_reconstruct};
use super::wavelet::{wavelet_inverse, wavelet_level, WaveletTriple};
use super::TransformError;
use crate::image_io::GrayImage;

pub const MAX_DIRECTIONAL_DEPTH: usize = 5;

/// Directional depth per pyramid level, coarsest level first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PdfbConfig {
    nlevs: Vec<usize>,
}

impl PdfbConfig {
    pub fn new(nlevs: Vec<usize>) -> Result<Self, TransformError> {
        if nlevs.is_empty() {
            return Err(TransformError::InvalidConfig("at least one pyramid level is required".into()));
        }
        if let Some(&d) = nlevs.iter().find(|&&d| d > MAX_DIRECTIONAL_DEPTH) {
            return Err(TransformError::InvalidConfig(format!(
                "directional depth {d} exceeds the cap of {MAX_DIRECTIONAL_DEPTH}"
            )));
        }
        Ok(Self { nlevs })
    }

    pub fn nlevs(&self) -> &[usize] {
        &self.nlevs
    }

    /// `1 + Σ (3 if depth 0 else 2^depth)`.
    pub fn subband_count(&self) -> usize {
        1 + self.nlevs.iter().map(|&d| if d == 0 { 3 } else { 1 << d }).sum::<usize>()
    }

    /// Subband shapes in decomposition order (lowpass, then levels coarsest
    /// to finest), or the divisibility error the input would hit.
    pub fn subband_shapes(&self, rows: usize, cols: usize) -> Result<Vec<(usize, usize)>, TransformError> {
        let mut per_level = Vec::with_capacity(self.nlevs.len());
        let (mut r, mut c) = (rows, cols);
        for (i, &depth) in self.nlevs.iter().enumerate().rev() {
            if r < 2 || c < 2 {
                return Err(TransformError::Degenerate { rows: r, cols: c });
            }
            let half = (r.div_ceil(2), c.div_ceil(2));
            if depth == 0 {
                per_level.push(vec![half; 3]);
            } else {
                per_level.push(dfb_subband_shape(r, c, depth).map_err(|e| at_level(e, i))?);
            }
            (r, c) = half;
        }
        let mut shapes = vec![(r, c)];
        shapes.extend(per_level.into_iter().rev().flatten());
        Ok(shapes)
    }
}

impl Default for PdfbConfig {
    fn default() -> Self {
        Self { nlevs: vec![0, 1] }
    }
}

impl std::str::FromStr for PdfbConfig {
    type Err = TransformError;

    /// Parses a comma-separated list such as `0,1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let nlevs = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| TransformError::InvalidConfig(format!("bad directional depth {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(nlevs)
    }
}

impl std::fmt::Display for PdfbConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.nlevs.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Level {
    Wavelet(WaveletTriple),
    Directional(DirectionalGroup),
}

impl Level {
    pub fn subbands(&self) -> Vec<&GrayImage> {
        match self {
            Level::Wavelet(t) => t.bands().to_vec(),
            Level::Directional(g) => g.subbands.iter().collect(),
        }
    }

    fn subbands_mut(&mut self) -> Vec<&mut GrayImage> {
        match self {
            Level::Wavelet(t) => vec![&mut t.lh, &mut t.hl, &mut t.hh],
            Level::Directional(g) => g.subbands.iter_mut().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub lowpass: GrayImage,
    /// Coarsest level first.
    pub levels: Vec<Level>,
}

impl Decomposition {
    /// Lowpass first, then each level's subbands, coarsest level first.
    pub fn subbands(&self) -> Vec<&GrayImage> {
        let mut out = vec![&self.lowpass];
        for l in &self.levels {
            out.extend(l.subbands());
        }
        out
    }

    pub fn subbands_mut(&mut self) -> Vec<&mut GrayImage> {
        let mut out = vec![&mut self.lowpass];
        for l in &mut self.levels {
            out.extend(l.subbands_mut());
        }
        out
    }

    pub fn energy(&self) -> f64 {
        self.subbands().iter().map(|b| b.energy()).sum()
    }

    /// `a·self + b·other`, subband-wise. Both must share one structure.
    pub fn combine(&self, a: f64, other: &Decomposition, b: f64) -> Decomposition {
        let mut out = self.clone();
        for (o, y) in out.subbands_mut().into_iter().zip(other.subbands()) {
            *o = o.combine(a, y, b);
        }
        out
    }
}

fn at_level(e: TransformError, level: usize) -> TransformError {
    match e {
        TransformError::Divisibility { context, depth, rows, cols, requirement } => TransformError::Divisibility {
            context: format!("pyramid level {level}: {context}"),
            depth,
            rows,
            cols,
            requirement,
        },
        other => other,
    }
}

pub fn pdfb_decompose(img: &GrayImage, cfg: &PdfbConfig) -> Result<Decomposition, TransformError> {
    // reject up front so no work is wasted on an inadmissible input
    cfg.subband_shapes(img.rows(), img.cols())?;
    let mut current = img.clone();
    let mut levels = Vec::with_capacity(cfg.nlevs.len());
    for (i, &depth) in cfg.nlevs.iter().enumerate().rev() {
        if depth == 0 {
            let (ll, triple) = wavelet_level(&current)?;
            levels.push(Level::Wavelet(triple));
            current = ll;
        } else {
            let (coarse, band) = lp_decompose(&current)?;
            levels.push(Level::Directional(dfb_decompose(&band, depth).map_err(|e| at_level(e, i))?));
            current = coarse;
        }
    }
    levels.reverse();
    Ok(Decomposition { lowpass: current, levels })
}

pub fn pdfb_reconstruct(d: &Decomposition, cfg: &PdfbConfig) -> Result<GrayImage, TransformError> {
    if d.levels.len() != cfg.nlevs.len() {
        return Err(TransformError::Structure(format!(
            "{} levels in decomposition, {} in configuration",
            d.levels.len(),
            cfg.nlevs.len()
        )));
    }
    let mut current = d.lowpass.clone();
    for (i, (level, &depth)) in d.levels.iter().zip(&cfg.nlevs).enumerate() {
        current = match (level, depth) {
            (Level::Wavelet(t), 0) => wavelet_inverse(&current, t)?,
            (Level::Directional(g), l) if l > 0 && g.subbands.len() == 1 << l => {
                let band = dfb_reconstruct(g, l).map_err(|e| at_level(e, i))?;
                lp_reconstruct(&current, &band)?
            }
            (Level::Wavelet(_), l) => {
                return Err(TransformError::Structure(format!("level {i} is a wavelet level, configured depth {l}")))
            }
            (Level::Directional(g), l) => {
                return Err(TransformError::Structure(format!(
                    "level {i} has {} directional subbands, configured depth {l}",
                    g.subbands.len()
                )))
            }
        };
    }
    Ok(current)
}
