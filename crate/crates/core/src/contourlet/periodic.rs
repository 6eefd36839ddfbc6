//! 1-D periodic filtering primitives shared by the pyramid and wavelet steps,
//! plus helpers to run them along either image axis.

use nalgebra::DMatrix;

use crate::filters::{Cdf97, Kernel1D};
use crate::image_io::GrayImage;

#[inline]
fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

/// `out[k] = Σ_t h[t] x[2k + phase + t]` for `k < ceil(n/2)`.
pub(crate) fn analyze(x: &[f64], h: &Kernel1D, phase: isize) -> Vec<f64> {
    let n = x.len();
    (0..n.div_ceil(2))
        .map(|k| h.iter().map(|(t, c)| c * x[wrap(2 * k as isize + phase + t, n)]).sum())
        .collect()
}

/// Adds `g[t] y[k]` at `2k + phase + t` into `out` (length `n`).
pub(crate) fn synthesize_into(out: &mut [f64], y: &[f64], g: &Kernel1D, phase: isize) {
    let n = out.len();
    for (k, &v) in y.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        for (t, c) in g.iter() {
            out[wrap(2 * k as isize + phase + t, n)] += c * v;
        }
    }
}

/// Least-squares left inverse of the two-channel analysis operator on a
/// length-`n` periodic signal. For odd `n` the operator is `(n+1) × n` and
/// the synthesis filters are not an exact inverse.
pub(crate) struct LeftInverse {
    n: usize,
    // n × (2·ceil(n/2)); columns ordered [low..., high...]
    pinv: DMatrix<f64>,
}

impl LeftInverse {
    pub(crate) fn new(n: usize, bank: &Cdf97) -> Self {
        let m = n.div_ceil(2);
        let mut a = DMatrix::<f64>::zeros(2 * m, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let lo = analyze(&e, &bank.analysis_low, 0);
            let hi = analyze(&e, &bank.analysis_high, 1);
            for k in 0..m {
                a[(k, j)] = lo[k];
                a[(m + k, j)] = hi[k];
            }
            e[j] = 0.0;
        }
        let ata = a.transpose() * &a;
        let chol = ata.cholesky().expect("two-channel analysis operator has full column rank");
        let pinv = chol.solve(&a.transpose());
        Self { n, pinv }
    }

    pub(crate) fn apply(&self, low: &[f64], high: &[f64]) -> Vec<f64> {
        let m = low.len();
        (0..self.n)
            .map(|i| {
                let row = self.pinv.row(i);
                (0..m).map(|k| row[k] * low[k] + row[m + k] * high[k]).sum()
            })
            .collect()
    }
}

/// Inverse of the two-channel periodic analysis for a length-`n` signal.
pub(crate) struct TwoChannelInverse<'a> {
    bank: &'a Cdf97,
    n: usize,
    lsq: Option<LeftInverse>,
}

impl<'a> TwoChannelInverse<'a> {
    pub(crate) fn new(n: usize, bank: &'a Cdf97) -> Self {
        let lsq = (n % 2 == 1).then(|| LeftInverse::new(n, bank));
        Self { bank, n, lsq }
    }

    pub(crate) fn apply(&self, low: &[f64], high: &[f64]) -> Vec<f64> {
        match &self.lsq {
            Some(inv) => inv.apply(low, high),
            None => {
                let mut out = vec![0.0; self.n];
                synthesize_into(&mut out, low, &self.bank.synthesis_low, 0);
                synthesize_into(&mut out, high, &self.bank.synthesis_high, 1);
                out
            }
        }
    }
}

/// Apply a 1-D map to every row (filtering along the column axis).
pub(crate) fn map_rows(img: &GrayImage, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> GrayImage {
    let rows: Vec<Vec<f64>> = (0..img.rows()).map(|r| f(img.row(r))).collect();
    let cols = rows[0].len();
    GrayImage::new(img.rows(), cols, rows.concat()).expect("row map keeps a rectangular shape")
}

/// Apply a 1-D map to every column (filtering along the row axis).
pub(crate) fn map_cols(img: &GrayImage, f: impl FnMut(&[f64]) -> Vec<f64>) -> GrayImage {
    map_rows(&img.transpose(), f).transpose()
}

/// Apply a 1-D map taking two aligned rows (e.g. low and high channel).
pub(crate) fn map_row_pairs(
    a: &GrayImage,
    b: &GrayImage,
    mut f: impl FnMut(&[f64], &[f64]) -> Vec<f64>,
) -> GrayImage {
    let rows: Vec<Vec<f64>> = (0..a.rows()).map(|r| f(a.row(r), b.row(r))).collect();
    let cols = rows[0].len();
    GrayImage::new(a.rows(), cols, rows.concat()).expect("row map keeps a rectangular shape")
}

pub(crate) fn map_col_pairs(
    a: &GrayImage,
    b: &GrayImage,
    f: impl FnMut(&[f64], &[f64]) -> Vec<f64>,
) -> GrayImage {
    map_row_pairs(&a.transpose(), &b.transpose(), f).transpose()
}
