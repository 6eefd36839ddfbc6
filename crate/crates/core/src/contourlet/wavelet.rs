//! Separable 2-D 9/7 wavelet step, used for pyramid levels whose directional
//! depth is zero.

use super::periodic::{analyze, map_col_pairs, map_cols, map_row_pairs, map_rows, TwoChannelInverse};
use super::TransformError;
use crate::filters::cdf97;
use crate::image_io::GrayImage;

/// Detail bands of one wavelet step. The first letter names the filter
/// applied down the columns (vertical), the second the one applied along
/// the rows (horizontal): `lh` is vertically lowpass, horizontally highpass.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveletTriple {
    pub lh: GrayImage,
    pub hl: GrayImage,
    pub hh: GrayImage,
    /// Dimensions of the image the step was applied to.
    pub input_dims: (usize, usize),
}

impl WaveletTriple {
    pub fn bands(&self) -> [&GrayImage; 3] {
        [&self.lh, &self.hl, &self.hh]
    }
}

pub fn wavelet_level(img: &GrayImage) -> Result<(GrayImage, WaveletTriple), TransformError> {
    let (rows, cols) = img.dims();
    if rows < 2 || cols < 2 {
        return Err(TransformError::Degenerate { rows, cols });
    }
    let bank = cdf97();
    let low_h = map_rows(img, |r| analyze(r, &bank.analysis_low, 0));
    let high_h = map_rows(img, |r| analyze(r, &bank.analysis_high, 1));
    let ll = map_cols(&low_h, |c| analyze(c, &bank.analysis_low, 0));
    let hl = map_cols(&low_h, |c| analyze(c, &bank.analysis_high, 1));
    let lh = map_cols(&high_h, |c| analyze(c, &bank.analysis_low, 0));
    let hh = map_cols(&high_h, |c| analyze(c, &bank.analysis_high, 1));
    Ok((ll, WaveletTriple { lh, hl, hh, input_dims: (rows, cols) }))
}

pub fn wavelet_inverse(ll: &GrayImage, triple: &WaveletTriple) -> Result<GrayImage, TransformError> {
    let (rows, cols) = triple.input_dims;
    let band = (rows.div_ceil(2), cols.div_ceil(2));
    for (name, b) in [("LL", ll), ("LH", &triple.lh), ("HL", &triple.hl), ("HH", &triple.hh)] {
        if b.dims() != band {
            return Err(TransformError::DimensionMismatch(format!(
                "{name} band is {}x{}, expected {}x{} for a {rows}x{cols} input",
                b.rows(),
                b.cols(),
                band.0,
                band.1
            )));
        }
    }
    let bank = cdf97();
    let vertical = TwoChannelInverse::new(rows, &bank);
    let horizontal = TwoChannelInverse::new(cols, &bank);
    let low_h = map_col_pairs(ll, &triple.hl, |lo, hi| vertical.apply(lo, hi));
    let high_h = map_col_pairs(&triple.lh, &triple.hh, |lo, hi| vertical.apply(lo, hi));
    Ok(map_row_pairs(&low_h, &high_h, |lo, hi| horizontal.apply(lo, hi)))
}
