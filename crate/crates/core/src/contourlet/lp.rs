//! One Laplacian pyramid step with the 9/7 lowpass pair.

use super::periodic::{analyze, map_cols, map_rows, synthesize_into};
use super::TransformError;
use crate::filters::{cdf97, Kernel1D};
use crate::image_io::GrayImage;

fn upsample(y: &[f64], n: usize, g: &Kernel1D) -> Vec<f64> {
    let mut out = vec![0.0; n];
    synthesize_into(&mut out, y, g, 0);
    out
}

fn predict(coarse: &GrayImage, rows: usize, cols: usize) -> GrayImage {
    let g = cdf97().synthesis_low;
    let wide = map_rows(coarse, |r| upsample(r, cols, &g));
    map_cols(&wide, |c| upsample(c, rows, &g))
}

/// Split `img` into a ceil-halved coarse image and a full-size bandpass
/// residual `img - predict(coarse)`.
pub fn lp_decompose(img: &GrayImage) -> Result<(GrayImage, GrayImage), TransformError> {
    let (rows, cols) = img.dims();
    if rows < 2 || cols < 2 {
        return Err(TransformError::Degenerate { rows, cols });
    }
    let h = cdf97().analysis_low;
    let narrow = map_rows(img, |r| analyze(r, &h, 0));
    let coarse = map_cols(&narrow, |c| analyze(c, &h, 0));
    let bandpass = img.combine(1.0, &predict(&coarse, rows, cols), -1.0);
    Ok((coarse, bandpass))
}

pub fn lp_reconstruct(coarse: &GrayImage, bandpass: &GrayImage) -> Result<GrayImage, TransformError> {
    let (rows, cols) = bandpass.dims();
    if coarse.dims() != (rows.div_ceil(2), cols.div_ceil(2)) {
        return Err(TransformError::DimensionMismatch(format!(
            "coarse image {}x{} does not match bandpass {}x{}",
            coarse.rows(),
            coarse.cols(),
            rows,
            cols
        )));
    }
    Ok(predict(coarse, rows, cols).combine(1.0, bandpass, 1.0))
}
