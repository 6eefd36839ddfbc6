//! Directional filter bank: an iterated tree of two-channel quincunx ladder
//! splits with shearing resamplers below depth 2.
//!
//! Every channel is held on the full `rows × cols` grid, nonzero only on its
//! lattice coset, and every filter tap is addressed geometrically modulo the
//! grid. A split of a channel on `o + B·Z²` with resampling `R` and quincunx
//! matrix `Q` uses `B' = B·R·Q`, `u, v` the columns of `B'` and
//! `e = B·R·Q·(1, 1)/2`: channel 0 keeps `o + B'·Z²`, channel 1 takes
//! `o + e + B'·Z²`.
//!
//! Subband ordering: `0..2^(l-1)` cover the directions whose frequency
//! content lies near the horizontal-frequency axis (patterns varying mostly
//! along each row), numbered with increasing angle; the rest cover the
//! near-vertical wedges and continue the angular sweep.

use std::f64::consts::SQRT_2;

use super::lattice::{coset_mask, hnf, Hnf, Mat2, Point};
use super::TransformError;
use crate::filters::pkva_ladder;
use crate::image_io::GrayImage;

const R1: Mat2 = Mat2([[1, 1], [0, 1]]);
const R2: Mat2 = Mat2([[1, -1], [0, 1]]);
const R3: Mat2 = Mat2([[1, 0], [1, 1]]);
const R4: Mat2 = Mat2([[1, 0], [-1, 1]]);
const Q1: Mat2 = Mat2([[1, -1], [1, 1]]);
const Q2: Mat2 = Mat2([[1, 1], [-1, 1]]);

/// The `2^depth` subbands of one directional decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionalGroup {
    pub subbands: Vec<GrayImage>,
    /// Dimensions of the decomposed image.
    pub input_dims: (usize, usize),
}

impl DirectionalGroup {
    pub fn depth(&self) -> usize {
        self.subbands.len().trailing_zeros() as usize
    }
}

#[derive(Clone, Copy, Debug)]
struct Node {
    basis: Mat2,
    offset: Point,
}

#[derive(Clone, Copy)]
struct Split {
    resample: Mat2,
    quincunx: Mat2,
    // child position of (channel 0, channel 1) in the next level
    slots: (usize, usize),
}

fn split_rule(level: usize, k: usize) -> Split {
    match level {
        0 => Split { resample: Mat2::IDENTITY, quincunx: Q1, slots: (0, 1) },
        1 => Split { resample: Mat2::IDENTITY, quincunx: Q2, slots: (2 * k + 1, 2 * k) },
        _ => {
            let half = 1 << (level - 1);
            let (resample, quincunx) = match (k < half, k.is_multiple_of(2)) {
                (true, true) => (R1, Q1),
                (true, false) => (R2, Q2),
                (false, true) => (R3, Q2),
                (false, false) => (R4, Q1),
            };
            Split { resample, quincunx, slots: (2 * k + 1, 2 * k) }
        }
    }
}

struct SplitGeometry {
    child_basis: Mat2,
    e: Point,
    u: Point,
    v: Point,
}

fn geometry(node: &Node, s: &Split) -> SplitGeometry {
    let b = node.basis.mul(s.resample);
    let child_basis = b.mul(s.quincunx);
    let (qr, qc) = s.quincunx.apply((1, 1));
    let e = b.apply((qr / 2, qc / 2));
    SplitGeometry { child_basis, e, u: child_basis.column(0), v: child_basis.column(1) }
}

/// Node lattices at every level of a depth-`depth` tree, before the final
/// reordering.
fn tree(depth: usize) -> Vec<Vec<Node>> {
    let mut levels = vec![vec![Node { basis: Mat2::IDENTITY, offset: (0, 0) }]];
    for level in 0..depth {
        let parents = &levels[level];
        let mut next = vec![Node { basis: Mat2::IDENTITY, offset: (0, 0) }; 2 * parents.len()];
        for (k, p) in parents.iter().enumerate() {
            let s = split_rule(level, k);
            let g = geometry(p, &s);
            next[s.slots.0] = Node { basis: g.child_basis, offset: p.offset };
            next[s.slots.1] = Node { basis: g.child_basis, offset: (p.offset.0 + g.e.0, p.offset.1 + g.e.1) };
        }
        levels.push(next);
    }
    levels
}

/// Tree slot holding output subband `j`.
fn slot_of_subband(j: usize, depth: usize) -> usize {
    let n = 1 << depth;
    let half = n / 2;
    if depth >= 2 && j >= half {
        n - 1 - (j - half)
    } else {
        j
    }
}

struct Grid {
    rows: usize,
    cols: usize,
}

impl Grid {
    #[inline]
    fn index(&self, r: i64, c: i64) -> usize {
        r.rem_euclid(self.rows as i64) as usize * self.cols + c.rem_euclid(self.cols as i64) as usize
    }

    /// `out(s) = Σ_{n,m} f[n] f[m] x(s + shift + (n-c)u + (m-c)v)` for the
    /// sites `s` in `mask`, zero elsewhere.
    fn ladder(&self, x: &[f64], mask: &[bool], shift: Point, g: &SplitGeometry, f: &[f64], centre: i64) -> Vec<f64> {
        let mut tmp = vec![0.0; x.len()];
        for r in 0..self.rows as i64 {
            for c in 0..self.cols as i64 {
                let mut acc = 0.0;
                for (m, &fm) in f.iter().enumerate() {
                    let d = m as i64 - centre;
                    acc += fm * x[self.index(r + d * g.v.0, c + d * g.v.1)];
                }
                tmp[self.index(r, c)] = acc;
            }
        }
        let mut out = vec![0.0; x.len()];
        for r in 0..self.rows as i64 {
            for c in 0..self.cols as i64 {
                let i = self.index(r, c);
                if !mask[i] {
                    continue;
                }
                let mut acc = 0.0;
                for (n, &fn_) in f.iter().enumerate() {
                    let d = n as i64 - centre;
                    acc += fn_ * tmp[self.index(r + shift.0 + d * g.u.0, c + shift.1 + d * g.u.1)];
                }
                out[i] = acc;
            }
        }
        out
    }

    fn split(&self, x: &[f64], node: &Node, s: &Split, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let g = geometry(node, s);
        let o1 = (node.offset.0 + g.e.0, node.offset.1 + g.e.1);
        let m0 = coset_mask(g.child_basis, node.offset, self.rows, self.cols);
        let m1 = coset_mask(g.child_basis, o1, self.rows, self.cols);
        let x1: Vec<f64> = x.iter().zip(&m1).map(|(&v, &m)| if m { v } else { 0.0 }).collect();
        let p = self.ladder(&x1, &m0, g.e, &g, f, 6);
        let y0: Vec<f64> = (0..x.len()).map(|i| if m0[i] { (x[i] - p[i]) / SQRT_2 } else { 0.0 }).collect();
        let q = self.ladder(&y0, &m1, (-g.e.0, -g.e.1), &g, f, 5);
        let y1: Vec<f64> = (0..x.len()).map(|i| if m1[i] { -SQRT_2 * x[i] - q[i] } else { 0.0 }).collect();
        (y0, y1)
    }

    fn merge(&self, y0: &[f64], y1: &[f64], node: &Node, s: &Split, f: &[f64]) -> Vec<f64> {
        let g = geometry(node, s);
        let o1 = (node.offset.0 + g.e.0, node.offset.1 + g.e.1);
        let m0 = coset_mask(g.child_basis, node.offset, self.rows, self.cols);
        let m1 = coset_mask(g.child_basis, o1, self.rows, self.cols);
        let q = self.ladder(y0, &m1, (-g.e.0, -g.e.1), &g, f, 5);
        let p1: Vec<f64> = (0..y1.len()).map(|i| if m1[i] { -(y1[i] + q[i]) / SQRT_2 } else { 0.0 }).collect();
        let p = self.ladder(&p1, &m0, g.e, &g, f, 6);
        (0..y0.len()).map(|i| if m0[i] { SQRT_2 * y0[i] + p[i] } else { p1[i] }).collect()
    }
}

fn terminal_hnfs(depth: usize) -> Vec<(Hnf, Point)> {
    let leaves = tree(depth).pop().expect("tree has a root");
    (0..1 << depth)
        .map(|j| {
            let n = leaves[slot_of_subband(j, depth)];
            (hnf(n.basis), n.offset)
        })
        .collect()
}

/// Smallest `p` such that every subband lattice tiles a `2^p × 2^p` grid.
fn sufficient_power(depth: usize) -> u32 {
    let h = terminal_hnfs(depth);
    (0..).find(|&p| h.iter().all(|(x, _)| x.tiles(1 << p, 1 << p))).expect("some power of two tiles")
}

fn check(rows: usize, cols: usize, depth: usize) -> Result<Vec<(Hnf, Point)>, TransformError> {
    if depth == 0 || depth > super::MAX_DIRECTIONAL_DEPTH {
        return Err(TransformError::InvalidConfig(format!(
            "directional depth must be in 1..={}, got {depth}",
            super::MAX_DIRECTIONAL_DEPTH
        )));
    }
    if rows < 2 || cols < 2 {
        return Err(TransformError::Degenerate { rows, cols });
    }
    let h = terminal_hnfs(depth);
    if let Some((j, (bad, _))) = h.iter().enumerate().find(|(_, (x, _))| !x.tiles(rows, cols)) {
        let p = 1usize << sufficient_power(depth);
        return Err(TransformError::Divisibility {
            context: String::new(),
            depth,
            rows,
            cols,
            requirement: format!(
                "subband {j} (lattice ({},0),({},{})) to tile the grid; rows and cols divisible by {p} always suffice",
                bad.h11, bad.h12, bad.h22
            ),
        });
    }
    Ok(h)
}

/// Shapes of the `2^depth` subbands for a `rows × cols` input.
pub fn dfb_subband_shape(rows: usize, cols: usize, depth: usize) -> Result<Vec<(usize, usize)>, TransformError> {
    Ok(check(rows, cols, depth)?.iter().map(|(h, _)| h.stored_shape(rows, cols)).collect())
}

pub fn dfb_decompose(img: &GrayImage, depth: usize) -> Result<DirectionalGroup, TransformError> {
    let (rows, cols) = img.dims();
    let hnfs = check(rows, cols, depth)?;
    let f = pkva_ladder().ladder.taps().to_vec();
    let grid = Grid { rows, cols };
    let nodes = tree(depth);
    let mut channels = vec![img.as_slice().to_vec()];
    for level in 0..depth {
        let mut next = vec![Vec::new(); 2 * channels.len()];
        for (k, x) in channels.iter().enumerate() {
            let s = split_rule(level, k);
            let (y0, y1) = grid.split(x, &nodes[level][k], &s, &f);
            next[s.slots.0] = y0;
            next[s.slots.1] = y1;
        }
        channels = next;
    }
    let subbands = hnfs
        .iter()
        .enumerate()
        .map(|(j, (h, offset))| {
            let x = &channels[slot_of_subband(j, depth)];
            let (sr, sc) = h.stored_shape(rows, cols);
            GrayImage::from_fn(sr, sc, |a, b| x[h.site(*offset, a, b, rows, cols)])
        })
        .collect();
    Ok(DirectionalGroup { subbands, input_dims: (rows, cols) })
}

pub fn dfb_reconstruct(group: &DirectionalGroup, depth: usize) -> Result<GrayImage, TransformError> {
    let (rows, cols) = group.input_dims;
    if group.subbands.len() != 1 << depth {
        return Err(TransformError::DimensionMismatch(format!(
            "depth {depth} needs {} subbands, got {}",
            1usize << depth,
            group.subbands.len()
        )));
    }
    let hnfs = check(rows, cols, depth)?;
    let mut channels = vec![Vec::new(); 1 << depth];
    for (j, ((h, offset), band)) in hnfs.iter().zip(&group.subbands).enumerate() {
        let shape = h.stored_shape(rows, cols);
        if band.dims() != shape {
            return Err(TransformError::DimensionMismatch(format!(
                "subband {j} is {}x{}, expected {}x{} for a {rows}x{cols} input",
                band.rows(),
                band.cols(),
                shape.0,
                shape.1
            )));
        }
        let mut x = vec![0.0; rows * cols];
        for a in 0..shape.0 {
            for b in 0..shape.1 {
                x[h.site(*offset, a, b, rows, cols)] = band.get(a, b);
            }
        }
        channels[slot_of_subband(j, depth)] = x;
    }
    let f = pkva_ladder().ladder.taps().to_vec();
    let grid = Grid { rows, cols };
    let nodes = tree(depth);
    for level in (0..depth).rev() {
        channels = (0..channels.len() / 2)
            .map(|k| {
                let s = split_rule(level, k);
                grid.merge(&channels[s.slots.0], &channels[s.slots.1], &nodes[level][k], &s, &f)
            })
            .collect();
    }
    let x = channels.pop().expect("root channel");
    Ok(GrayImage::new(rows, cols, x).expect("grid-sized buffer"))
}
