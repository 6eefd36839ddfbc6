//! Integer 2×2 lattice helpers for the directional filter bank.
//!
//! Points are `(row, col)`. A lattice is given by a basis matrix whose
//! columns are the generating vectors; a channel lives on a coset
//! `offset + basis·Z²`, taken modulo the `rows × cols` torus.

pub(crate) type Point = (i64, i64);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Mat2(pub [[i64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1, 0], [0, 1]]);

    pub fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }

    pub fn apply(self, p: Point) -> Point {
        let m = self.0;
        (m[0][0] * p.0 + m[0][1] * p.1, m[1][0] * p.0 + m[1][1] * p.1)
    }

    pub fn column(self, j: usize) -> Point {
        (self.0[0][j], self.0[1][j])
    }

    pub fn det(self) -> i64 {
        let m = self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    fn adjugate(self) -> Mat2 {
        let m = self.0;
        Mat2([[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]])
    }
}

/// Column-style Hermite normal form: the same lattice is generated by
/// `(h11, 0)` and `(h12, h22)` with `h11, h22 > 0` and `0 <= h12 < h11`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Hnf {
    pub h11: i64,
    pub h12: i64,
    pub h22: i64,
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

pub(crate) fn hnf(b: Mat2) -> Hnf {
    let (a0, b0) = b.column(0);
    let (a1, b1) = b.column(1);
    let (mut g, mut x, mut y) = ext_gcd(b0, b1);
    if g < 0 {
        (g, x, y) = (-g, -x, -y);
    }
    assert!(g != 0, "degenerate lattice basis");
    let h11 = (b.det() / g).abs();
    let h12 = (x * a0 + y * a1).rem_euclid(h11);
    Hnf { h11, h12, h22: g }
}

impl Hnf {
    /// Whether the lattice contains `rows·e1` and `cols·e2`, i.e. whether
    /// its cosets are well defined on the torus.
    pub fn tiles(&self, rows: usize, cols: usize) -> bool {
        let (r, c) = (rows as i64, cols as i64);
        r % self.h11 == 0 && c % self.h22 == 0 && ((c / self.h22) * self.h12) % self.h11 == 0
    }

    pub fn stored_shape(&self, rows: usize, cols: usize) -> (usize, usize) {
        (rows / self.h11 as usize, cols / self.h22 as usize)
    }

    /// Grid index of storage cell `(a, b)` for the coset at `offset`.
    pub fn site(&self, offset: Point, a: usize, b: usize, rows: usize, cols: usize) -> usize {
        let (a, b) = (a as i64, b as i64);
        let r = (offset.0 + a * self.h11 + b * self.h12).rem_euclid(rows as i64) as usize;
        let c = (offset.1 + b * self.h22).rem_euclid(cols as i64) as usize;
        r * cols + c
    }
}

/// Indicator of the coset `offset + basis·Z²` on the torus.
pub(crate) fn coset_mask(basis: Mat2, offset: Point, rows: usize, cols: usize) -> Vec<bool> {
    let adj = basis.adjugate();
    let det = basis.det();
    let mut mask = vec![false; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let (p, q) = adj.apply((r as i64 - offset.0, c as i64 - offset.1));
            mask[r * cols + c] = p % det == 0 && q % det == 0;
        }
    }
    mask
}
