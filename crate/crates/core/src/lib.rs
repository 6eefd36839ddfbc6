//! Contourlet-domain head pose estimation.
//!
//! * [`image_io`]: PGM/PPM reading and writing, grayscale, crop, resize.
//! * [`filters`]: CDF 9/7 and PKVA ladder filter banks.
//! * [`contourlet`]: Laplacian pyramid, directional filter bank, PDFB.
//! * [`features`]: raw feature vectors and PCA→LDA reduction.
//! * [`classify`]: k-NN and minimum-distance classifiers, confusion matrices.
//! * [`pipeline`]: manifests, splits, training and prediction flows.

#![allow(clippy::needless_range_loop)]

pub mod classify;
pub mod contourlet;
pub mod features;
pub mod filters;
pub mod image_io;
pub mod pipeline;
