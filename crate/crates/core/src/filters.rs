//! Fixed filter kernels used by the transform stack.
//!
//! * The CDF 9/7 biorthogonal pair, built from the Daubechies `N = 4`
//!   half-band polynomial rather than transcribed: the 9-tap analysis lowpass
//!   takes the complex-pair quadratic factor and the 7-tap synthesis lowpass
//!   takes the real-root factor. Both lowpass filters have DC gain √2.
//! * The 12-tap PKVA half-band ladder prototype, and the equivalent
//!   direct-form 2-D filters of the two-channel quincunx ladder bank it
//!   induces.
//!
//! 1-D conventions (periodic signals): the lowpass channel sits on even
//! samples and the highpass channel on odd samples,
//!
//! ```text
//! low[k]  = Σ_t h0[t] x[2k + t]          x[2k + t]     += g0[t] low[k]
//! high[k] = Σ_t h1[t] x[2k + 1 + t]      x[2k + 1 + t] += g1[t] high[k]
//! ```
//!
//! with `h1[t] = (-1)^t g0[t]` and `g1[t] = (-1)^t h0[t]`.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

/// Finite 1-D kernel; `taps[origin]` is the coefficient at offset 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel1D {
    taps: Vec<f64>,
    origin: usize,
}

impl Kernel1D {
    pub fn new(taps: Vec<f64>, origin: usize) -> Self {
        assert!(!taps.is_empty() && origin < taps.len(), "kernel needs taps and an in-range origin");
        assert!(taps.iter().all(|t| t.is_finite()));
        Self { taps, origin }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// `(offset, coefficient)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        let o = self.origin as isize;
        self.taps.iter().enumerate().map(move |(i, &c)| (i as isize - o, c))
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// Value of `Σ_t k[t] e^{-jωt}`, returned as `(re, im)`.
    pub fn response(&self, omega: f64) -> (f64, f64) {
        self.iter().fold((0.0, 0.0), |(re, im), (t, c)| {
            let phase = -omega * t as f64;
            (re + c * phase.cos(), im + c * phase.sin())
        })
    }

    fn modulated(&self) -> Kernel1D {
        let taps = self.iter().map(|(t, c)| if t.rem_euclid(2) == 0 { c } else { -c }).collect();
        Kernel1D { taps, origin: self.origin }
    }
}

/// The four CDF 9/7 kernels.
#[derive(Clone, Debug, PartialEq)]
pub struct Cdf97 {
    pub analysis_low: Kernel1D,
    pub analysis_high: Kernel1D,
    pub synthesis_low: Kernel1D,
    pub synthesis_high: Kernel1D,
}

/// Real root of `20y³ + 10y² + 4y + 1`, the `N = 4` Daubechies polynomial
/// `P(y) = 1 + 4y + 10y² + 20y³`.
fn daubechies4_real_root() -> f64 {
    let p = |y: f64| ((20.0 * y + 10.0) * y + 4.0) * y + 1.0;
    let dp = |y: f64| (60.0 * y + 20.0) * y + 4.0;
    let mut y = -0.34;
    for _ in 0..64 {
        let next = y - p(y) / dp(y);
        if next == y {
            break;
        }
        y = next;
    }
    y
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    // centred Laurent polynomials of odd length
    let n = a.len().max(b.len());
    let mut out = vec![0.0; n];
    for (src, len) in [(a, a.len()), (b, b.len())] {
        let off = (n - len) / 2;
        for (i, v) in src.iter().enumerate() {
            out[off + i] += v;
        }
    }
    out
}

fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn cdf97() -> Cdf97 {
    let r = daubechies4_real_root();
    // P(y) = (1 - y/r)(1 + a y + b y²)
    let a = 4.0 + 1.0 / r;
    let b = 10.0 + a / r;

    // cos²(ω/2) = (z + 2 + z⁻¹)/4 and sin²(ω/2) = (-z + 2 - z⁻¹)/4
    let cos2 = [0.25, 0.5, 0.25];
    let sin2 = [-0.25, 0.5, -0.25];
    let cos4 = poly_mul(&cos2, &cos2);

    let quadratic = poly_add(&poly_add(&[1.0], &scale(&sin2, a)), &scale(&poly_mul(&sin2, &sin2), b));
    let linear = poly_add(&[1.0], &scale(&sin2, -1.0 / r));

    let h0 = scale(&poly_mul(&cos4, &quadratic), SQRT_2);
    let g0 = scale(&poly_mul(&cos4, &linear), SQRT_2);

    let analysis_low = Kernel1D::new(h0, 4);
    let synthesis_low = Kernel1D::new(g0, 3);
    let analysis_high = synthesis_low.modulated();
    let synthesis_high = analysis_low.modulated();
    Cdf97 { analysis_low, analysis_high, synthesis_low, synthesis_high }
}

/// Half of the symmetric 12-tap PKVA half-band ladder prototype.
const PKVA12_HALF: [f64; 6] = [0.6300, -0.1930, 0.0972, -0.0526, 0.0272, -0.0144];

/// The symmetric 12-tap ladder prototype, scaled to unit DC gain.
///
/// The kernel interpolates half-way between samples: offsets run from −5 to
/// +6 around a centre at +½.
pub fn pkva_prototype() -> Kernel1D {
    let mut taps: Vec<f64> = PKVA12_HALF.iter().rev().chain(PKVA12_HALF.iter()).copied().collect();
    let dc: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= dc;
    }
    Kernel1D::new(taps, 5)
}

/// Dense 2-D kernel; `taps[origin.0][origin.1]` is the coefficient at offset
/// `(0, 0)`. Offsets are `(row, col)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Filter2D {
    rows: usize,
    cols: usize,
    origin: (usize, usize),
    taps: Vec<f64>,
}

impl Filter2D {
    fn from_sparse(map: &BTreeMap<(i64, i64), f64>) -> Self {
        let rmin = map.keys().map(|k| k.0).min().unwrap_or(0);
        let rmax = map.keys().map(|k| k.0).max().unwrap_or(0);
        let cmin = map.keys().map(|k| k.1).min().unwrap_or(0);
        let cmax = map.keys().map(|k| k.1).max().unwrap_or(0);
        let rows = (rmax - rmin + 1) as usize;
        let cols = (cmax - cmin + 1) as usize;
        let mut taps = vec![0.0; rows * cols];
        for (&(r, c), &v) in map {
            taps[(r - rmin) as usize * cols + (c - cmin) as usize] = v;
        }
        Filter2D { rows, cols, origin: ((-rmin) as usize, (-cmin) as usize), taps }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn origin(&self) -> (usize, usize) {
        self.origin
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Nonzero `((dr, dc), coefficient)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = ((i64, i64), f64)> + '_ {
        let (or, oc) = (self.origin.0 as i64, self.origin.1 as i64);
        self.taps.iter().enumerate().filter(|(_, v)| **v != 0.0).map(move |(i, &v)| {
            (((i / self.cols) as i64 - or, (i % self.cols) as i64 - oc), v)
        })
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// `Σ_t h[t] e^{-j ω·t}` as `(re, im)`; `omega = (row, col)` frequency.
    pub fn response(&self, omega: (f64, f64)) -> (f64, f64) {
        self.iter().fold((0.0, 0.0), |(re, im), ((r, c), v)| {
            let phase = -(omega.0 * r as f64 + omega.1 * c as f64);
            (re + v * phase.cos(), im + v * phase.sin())
        })
    }
}

/// A two-channel quincunx filter bank in ladder form together with its
/// equivalent direct-form filters.
///
/// Geometry is that of the first directional split: channel 0 lives on the
/// sites with even `row + col`, channel 1 on the odd sites. With
/// `u = (1, 1)`, `v = (-1, 1)` and `e = (0, 1)`:
///
/// ```text
/// y0(s) = [x(s) - Σ β[n]β[m] x(s + e + (n-6)u + (m-6)v)] / √2
/// y1(r) = -√2 x(r) - Σ β[n]β[m] y0(r - e + (n-5)u + (m-5)v)
/// ```
///
/// where `n, m` index the 12 ladder taps. Analysis kernels correlate
/// (`y(s) = Σ_t h[t] x(s + t)`); synthesis kernels are placed
/// (`x(p) = Σ_s y(s) g[p - s]`).
#[derive(Clone, Debug, PartialEq)]
pub struct FanFilterPair {
    /// Ladder kernel as applied inside the bank (modulated for fan filters).
    pub ladder: Kernel1D,
    pub h0: Filter2D,
    pub h1: Filter2D,
    pub g0: Filter2D,
    pub g1: Filter2D,
}

type Sparse = BTreeMap<(i64, i64), f64>;

fn add(map: &mut Sparse, at: (i64, i64), v: f64) {
    *map.entry(at).or_insert(0.0) += v;
}

fn ladder_offsets(beta: &Kernel1D, centre: i64) -> Vec<((i64, i64), f64)> {
    // Σ β[n]β[m] δ((n-c)u + (m-c)v), u = (1, 1), v = (-1, 1)
    let taps = beta.taps();
    let mut out = Vec::with_capacity(taps.len() * taps.len());
    for (n, bn) in taps.iter().enumerate() {
        for (m, bm) in taps.iter().enumerate() {
            let (a, b) = (n as i64 - centre, m as i64 - centre);
            out.push(((a - b, a + b), bn * bm));
        }
    }
    out
}

/// Build the quincunx ladder bank from a prototype; `fan` applies the
/// `(-1)^n` modulation that turns the diamond pair into fan filters.
pub fn quincunx_ladder_pair(prototype: &Kernel1D, fan: bool) -> FanFilterPair {
    assert_eq!(prototype.len(), 12, "ladder geometry assumes 12 taps");
    let ladder = if fan {
        // matches the reference toolbox: even positions negated
        let taps = prototype.taps().iter().enumerate().map(|(i, &c)| if i % 2 == 0 { -c } else { c }).collect();
        Kernel1D::new(taps, prototype.origin())
    } else {
        prototype.clone()
    };
    let e = (0i64, 1i64);
    let to_p0 = ladder_offsets(&ladder, 6);
    let to_p1 = ladder_offsets(&ladder, 5);

    let mut h0 = Sparse::new();
    add(&mut h0, (0, 0), 1.0 / SQRT_2);
    for &((dr, dc), w) in &to_p0 {
        add(&mut h0, (e.0 + dr, e.1 + dc), -w / SQRT_2);
    }

    let mut h1 = Sparse::new();
    add(&mut h1, (0, 0), -SQRT_2);
    for &((dr, dc), w) in &to_p1 {
        let shift = (dr - e.0, dc - e.1);
        for (&(r, c), &k) in &h0 {
            add(&mut h1, (shift.0 + r, shift.1 + c), -w * k);
        }
    }

    // Unit coefficient in y0 at the origin: p1 = -B₊(y0)/√2, p0 = √2 y0 + B₋(p1).
    let mut p1 = Sparse::new();
    for &((dr, dc), w) in &to_p1 {
        add(&mut p1, (e.0 - dr, e.1 - dc), -w / SQRT_2);
    }
    let mut g0 = p1.clone();
    add(&mut g0, (0, 0), SQRT_2);
    for (&(r, c), &k) in &p1 {
        for &((dr, dc), w) in &to_p0 {
            add(&mut g0, (r - e.0 - dr, c - e.1 - dc), w * k);
        }
    }

    // Unit coefficient in y1 at the origin: p1 = -δ/√2, p0 = B₋(p1).
    let mut g1 = Sparse::new();
    add(&mut g1, (0, 0), -1.0 / SQRT_2);
    for &((dr, dc), w) in &to_p0 {
        add(&mut g1, (-e.0 - dr, -e.1 - dc), -w / SQRT_2);
    }

    FanFilterPair {
        ladder,
        h0: Filter2D::from_sparse(&h0),
        h1: Filter2D::from_sparse(&h1),
        g0: Filter2D::from_sparse(&g0),
        g1: Filter2D::from_sparse(&g1),
    }
}

/// PKVA fan filter bank used by every directional split.
pub fn pkva_ladder() -> FanFilterPair {
    quincunx_ladder_pair(&pkva_prototype(), true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn periodic_analysis(x: &[f64], f: &Cdf97) -> (Vec<f64>, Vec<f64>) {
        let n = x.len() as isize;
        let half = x.len().div_ceil(2);
        let at = |i: isize| x[i.rem_euclid(n) as usize];
        let low = (0..half).map(|k| f.analysis_low.iter().map(|(t, c)| c * at(2 * k as isize + t)).sum()).collect();
        let high =
            (0..half).map(|k| f.analysis_high.iter().map(|(t, c)| c * at(2 * k as isize + 1 + t)).sum()).collect();
        (low, high)
    }

    fn periodic_synthesis(low: &[f64], high: &[f64], n: usize, f: &Cdf97) -> Vec<f64> {
        let mut out = vec![0.0; n];
        let ni = n as isize;
        for (k, &l) in low.iter().enumerate() {
            for (t, c) in f.synthesis_low.iter() {
                out[(2 * k as isize + t).rem_euclid(ni) as usize] += c * l;
            }
        }
        for (k, &h) in high.iter().enumerate() {
            for (t, c) in f.synthesis_high.iter() {
                out[(2 * k as isize + 1 + t).rem_euclid(ni) as usize] += c * h;
            }
        }
        out
    }

    #[test]
    fn cdf97_normalisation() {
        let f = cdf97();
        assert_eq!((f.analysis_low.len(), f.synthesis_low.len()), (9, 7));
        assert!((f.analysis_low.sum() - SQRT_2).abs() < 1e-12);
        assert!((f.synthesis_low.sum() - SQRT_2).abs() < 1e-12);
        assert!(f.analysis_high.sum().abs() < 1e-12);
        assert!(f.synthesis_high.sum().abs() < 1e-12);
        // linear phase
        for k in [&f.analysis_low, &f.synthesis_low] {
            let t = k.taps();
            for i in 0..t.len() {
                assert!((t[i] - t[t.len() - 1 - i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cdf97_matches_published_taps() {
        // widely tabulated values, DC gain √2
        let published = [0.852698679009, 0.377402855613, -0.110624404418, -0.023849465020, 0.037828455507];
        let h0 = cdf97().analysis_low;
        for (i, p) in published.iter().enumerate() {
            assert!((h0.taps()[4 + i] - p).abs() < 1e-11, "tap {i}");
        }
        let published_g0 = [0.788485616406, 0.418092273222, -0.040689417609, -0.064538882629];
        let g0 = cdf97().synthesis_low;
        for (i, p) in published_g0.iter().enumerate() {
            assert!((g0.taps()[3 + i] - p).abs() < 1e-11, "tap {i}");
        }
    }

    #[test]
    fn cdf97_periodic_round_trip() {
        let f = cdf97();
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (lo, hi) = periodic_analysis(&x, &f);
            let back = periodic_synthesis(&lo, &hi, 64, &f);
            let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-10, "seed {seed}: {err}");
        }
    }

    #[test]
    fn cdf97_highpass_zero_at_dc_lowpass_zero_at_nyquist() {
        let f = cdf97();
        let (re, im) = f.analysis_low.response(PI);
        assert!(re.abs() < 1e-12 && im.abs() < 1e-12);
        let (re, _) = f.analysis_high.response(0.0);
        assert!(re.abs() < 1e-12);
    }

    #[test]
    fn pkva_prototype_is_symmetric() {
        let p = pkva_prototype();
        let t = p.taps();
        assert_eq!(t.len(), 12);
        for i in 0..12 {
            assert!((t[i] - t[11 - i]).abs() < 1e-12);
        }
        assert!((p.sum() - 1.0).abs() < 1e-12);
        // half-band interpolator: nulls the alternating sequence
        assert!(p.response(PI).0.abs() < 1e-12);
    }

    #[test]
    fn diamond_prototype_highpass_blocks_dc() {
        let bank = quincunx_ladder_pair(&pkva_prototype(), false);
        let (re, im) = bank.h0.response((0.0, 0.0));
        assert!(re.abs() < 1e-10 && im.abs() < 1e-10, "{re} {im}");
    }

    #[test]
    fn fan_highpass_blocks_modulated_dc() {
        // diagonal modulation moves the diamond's DC null to (π, 0)
        let bank = pkva_ladder();
        let (re, im) = bank.h0.response((PI, 0.0));
        assert!(re.abs() < 1e-10 && im.abs() < 1e-10, "{re} {im}");
        assert!((bank.h0.sum() - 1.0 / SQRT_2).abs() < 1e-12);
    }

    fn direct_split(x: &[f64], n: usize, bank: &FanFilterPair) -> Vec<f64> {
        // full-grid array holding y0 on even sites and y1 on odd sites
        let ni = n as i64;
        let at = |r: i64, c: i64| x[(r.rem_euclid(ni) * ni + c.rem_euclid(ni)) as usize];
        let mut y = vec![0.0; n * n];
        for r in 0..ni {
            for c in 0..ni {
                let h = if (r + c) % 2 == 0 { &bank.h0 } else { &bank.h1 };
                y[(r * ni + c) as usize] = h.iter().map(|((dr, dc), w)| w * at(r + dr, c + dc)).sum();
            }
        }
        y
    }

    fn direct_merge(y: &[f64], n: usize, bank: &FanFilterPair) -> Vec<f64> {
        let ni = n as i64;
        let mut x = vec![0.0; n * n];
        for r in 0..ni {
            for c in 0..ni {
                let v = y[(r * ni + c) as usize];
                let g = if (r + c) % 2 == 0 { &bank.g0 } else { &bank.g1 };
                for ((dr, dc), w) in g.iter() {
                    x[((r + dr).rem_euclid(ni) * ni + (c + dc).rem_euclid(ni)) as usize] += w * v;
                }
            }
        }
        x
    }

    #[test]
    fn fan_direct_form_perfect_reconstruction() {
        let bank = pkva_ladder();
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let x: Vec<f64> = (0..32 * 32).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y = direct_split(&x, 32, &bank);
            let back = direct_merge(&y, 32, &bank);
            let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-10, "seed {seed}: {err}");
        }
    }

    #[test]
    fn constructors_are_deterministic() {
        assert_eq!(cdf97(), cdf97());
        assert_eq!(pkva_ladder(), pkva_ladder());
    }
}
