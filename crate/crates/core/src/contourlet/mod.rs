//! Contourlet transform: Laplacian pyramid, directional filter bank, a
//! separable wavelet step for levels with zero directional depth, and the
//! pyramidal directional filter bank (PDFB) combining them.
//!
//! Boundary handling is periodic everywhere. Odd dimensions ceil-halve.

mod dfb;
mod lattice;
mod lp;
mod pdfb;
mod periodic;
mod wavelet;

pub use dfb::{dfb_decompose, dfb_reconstruct, dfb_subband_shape, DirectionalGroup};
pub use lp::{lp_decompose, lp_reconstruct};
pub use pdfb::{pdfb_decompose, pdfb_reconstruct, Decomposition, Level, PdfbConfig, MAX_DIRECTIONAL_DEPTH};
pub use wavelet::{wavelet_inverse, wavelet_level, WaveletTriple};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("image {rows}x{cols} is too small to decompose (need at least 2x2)")]
    Degenerate { rows: usize, cols: usize },
    #[error("{context}directional depth {depth} needs {requirement}, got a {rows}x{cols} input")]
    Divisibility { context: String, depth: usize, rows: usize, cols: usize, requirement: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("decomposition structure does not match configuration: {0}")]
    Structure(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
