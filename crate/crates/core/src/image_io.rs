//! Netpbm decoding/encoding and the geometric preprocessing applied to every
//! face image before the transform: grayscale averaging, cropping and
//! bilinear resizing.
//!
//! Only the four greymap/pixmap flavours are read: `P2`/`P3` (ASCII) and
//! `P5`/`P6` (binary), with a maxval of at most 255. Samples are kept as
//! real numbers and are never rescaled by maxval.

use std::fmt;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImageError {
    #[error("malformed netpbm header: {0}")]
    MalformedHeader(String),
    #[error("unsupported netpbm magic number {0:?} (only P2, P3, P5 and P6 are read)")]
    UnsupportedMagic(String),
    #[error("maxval {0} exceeds 255")]
    MaxvalTooLarge(u32),
    #[error("truncated pixel data: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("sample value {value} exceeds maxval {maxval}")]
    SampleOutOfRange { value: u32, maxval: u32 },
    #[error("crop {rect} lies outside a {rows}x{cols} image")]
    CropOutOfBounds { rect: CropRect, rows: usize, cols: usize },
    #[error("invalid image dimensions {rows}x{cols}")]
    InvalidDimensions { rows: usize, cols: usize },
    #[error("i/o error: {0}")]
    Io(String),
}

/// Real-valued 2-D intensity lattice stored row-major.
#[derive(Clone, PartialEq)]
pub struct GrayImage {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, ImageError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(ImageError::InvalidDimensions { rows, cols });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(ImageError::MalformedHeader("non-finite pixel value".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "image dimensions must be positive");
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut img = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                img.data[r * cols + c] = f(r, c);
            }
        }
        img
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max_abs_diff(&self, other: &GrayImage) -> f64 {
        assert_eq!(self.dims(), other.dims());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `a * self + b * other`, element-wise.
    pub fn combine(&self, a: f64, other: &GrayImage, b: f64) -> GrayImage {
        assert_eq!(self.dims(), other.dims());
        let data = self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect();
        GrayImage { rows: self.rows, cols: self.cols, data }
    }

    pub fn scaled(&self, a: f64) -> GrayImage {
        GrayImage { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| a * x).collect() }
    }

    pub fn transpose(&self) -> GrayImage {
        GrayImage::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }
}

impl fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GrayImage({}x{})", self.rows, self.cols)
    }
}

/// Colour image with real channel values in `[0, 255]`.
#[derive(Clone, PartialEq, Debug)]
pub struct RgbImage {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 3]>,
}

impl RgbImage {
    pub fn new(rows: usize, cols: usize, data: Vec<[f64; 3]>) -> Result<Self, ImageError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(ImageError::InvalidDimensions { rows, cols });
        }
        if data.iter().flatten().any(|v| !(0.0..=255.0).contains(v)) {
            return Err(ImageError::MalformedHeader("channel value outside [0, 255]".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> [f64; 3] {
        self.data[r * self.cols + c]
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.data
    }
}

/// A decoded netpbm file.
#[derive(Clone, Debug, PartialEq)]
pub enum Image {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl Image {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            Image::Gray(g) => g.dims(),
            Image::Rgb(c) => (c.rows, c.cols),
        }
    }

    /// Grayscale view; colour images are channel-averaged.
    pub fn into_gray(self) -> GrayImage {
        match self {
            Image::Gray(g) => g,
            Image::Rgb(c) => to_grayscale(&c),
        }
    }
}

/// Zero-based crop rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CropRect {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl CropRect {
    pub fn new(top: usize, left: usize, height: usize, width: usize) -> Self {
        Self { top, left, height, width }
    }

    pub fn fits(&self, rows: usize, cols: usize) -> bool {
        self.height > 0
            && self.width > 0
            && self.top.checked_add(self.height).is_some_and(|b| b <= rows)
            && self.left.checked_add(self.width).is_some_and(|r| r <= cols)
    }

    /// The rectangle `inner`, expressed relative to this one, in the
    /// coordinates of the parent image.
    pub fn compose(&self, inner: &CropRect) -> CropRect {
        CropRect {
            top: self.top + inner.top,
            left: self.left + inner.left,
            height: inner.height,
            width: inner.width,
        }
    }
}

impl fmt::Display for CropRect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(top={}, left={}, height={}, width={})", self.top, self.left, self.height, self.width)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Magic {
    P2,
    P3,
    P5,
    P6,
}

impl Magic {
    fn channels(self) -> usize {
        match self {
            Magic::P2 | Magic::P5 => 1,
            Magic::P3 | Magic::P6 => 3,
        }
    }

    fn is_ascii(self) -> bool {
        matches!(self, Magic::P2 | Magic::P3)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' && self.bytes[self.pos] != b'\r' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn read_uint(&mut self, what: &str) -> Result<u32, ImageError> {
        self.skip_ws_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ImageError::MalformedHeader(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImageError::MalformedHeader(format!("{what} out of range")))
    }
}

/// Decode a `P2`, `P3`, `P5` or `P6` byte stream.
pub fn parse_netpbm(bytes: &[u8]) -> Result<Image, ImageError> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(ImageError::MalformedHeader("missing netpbm magic number".into()));
    }
    let magic = match bytes[1] {
        b'2' => Magic::P2,
        b'3' => Magic::P3,
        b'5' => Magic::P5,
        b'6' => Magic::P6,
        other => {
            return Err(ImageError::UnsupportedMagic(format!("P{}", other as char)));
        }
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if cur.pos < bytes.len() && !bytes[cur.pos].is_ascii_whitespace() && bytes[cur.pos] != b'#' {
        return Err(ImageError::MalformedHeader("magic number not followed by whitespace".into()));
    }
    let cols = cur.read_uint("width")? as usize;
    let rows = cur.read_uint("height")? as usize;
    let maxval = cur.read_uint("maxval")?;
    if rows == 0 || cols == 0 {
        return Err(ImageError::MalformedHeader(format!("zero dimension {cols}x{rows}")));
    }
    if maxval == 0 {
        return Err(ImageError::MalformedHeader("maxval must be positive".into()));
    }
    if maxval > 255 {
        return Err(ImageError::MaxvalTooLarge(maxval));
    }
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(magic.channels()))
        .ok_or_else(|| ImageError::MalformedHeader("dimensions overflow".into()))?;

    let samples: Vec<f64> = if magic.is_ascii() {
        let mut out = Vec::with_capacity(expected);
        for _ in 0..expected {
            cur.skip_ws_and_comments();
            if cur.pos >= bytes.len() {
                return Err(ImageError::Truncated { expected, found: out.len() });
            }
            let v = cur.read_uint("sample")?;
            if v > maxval {
                return Err(ImageError::SampleOutOfRange { value: v, maxval });
            }
            out.push(v as f64);
        }
        out
    } else {
        // exactly one whitespace byte separates maxval from the raster
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            Some(_) => return Err(ImageError::MalformedHeader("maxval not followed by whitespace".into())),
            None => return Err(ImageError::Truncated { expected, found: 0 }),
        }
        let raster = &bytes[cur.pos..];
        if raster.len() < expected {
            return Err(ImageError::Truncated { expected, found: raster.len() });
        }
        let mut out = Vec::with_capacity(expected);
        for &b in &raster[..expected] {
            if b as u32 > maxval {
                return Err(ImageError::SampleOutOfRange { value: b as u32, maxval });
            }
            out.push(b as f64);
        }
        out
    };

    match magic.channels() {
        1 => Ok(Image::Gray(GrayImage { rows, cols, data: samples })),
        _ => {
            let data = samples.chunks_exact(3).map(|p| [p[0], p[1], p[2]]).collect();
            Ok(Image::Rgb(RgbImage { rows, cols, data }))
        }
    }
}

pub fn read_netpbm(path: &Path) -> Result<Image, ImageError> {
    let bytes = std::fs::read(path).map_err(|e| ImageError::Io(format!("{}: {e}", path.display())))?;
    parse_netpbm(&bytes)
}

fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Binary `P5` encoding at maxval 255; values are rounded and clamped.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.cols, img.rows).into_bytes();
    out.extend(img.data.iter().map(|&v| quantize(v)));
    out
}

/// Binary `P6` encoding at maxval 255; values are rounded and clamped.
pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.cols, img.rows).into_bytes();
    out.extend(img.data.iter().flat_map(|p| p.map(quantize)));
    out
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<(), ImageError> {
    std::fs::write(path, encode_pgm(img)).map_err(|e| ImageError::Io(format!("{}: {e}", path.display())))
}

/// Channel average `(r + g + b) / 3`, kept in full precision.
pub fn to_grayscale(img: &RgbImage) -> GrayImage {
    let data = img.data.iter().map(|&[r, g, b]| (r + g + b) / 3.0).collect();
    GrayImage { rows: img.rows, cols: img.cols, data }
}

pub fn crop(img: &GrayImage, rect: &CropRect) -> Result<GrayImage, ImageError> {
    if !rect.fits(img.rows, img.cols) {
        return Err(ImageError::CropOutOfBounds { rect: *rect, rows: img.rows, cols: img.cols });
    }
    Ok(GrayImage::from_fn(rect.height, rect.width, |r, c| img.get(rect.top + r, rect.left + c)))
}

/// Corner-aligned source coordinate for output index `i` of `n_out`.
/// A single output sample maps to the centre of the source axis.
fn source_coord(i: usize, n_out: usize, n_in: usize) -> f64 {
    if n_out == 1 {
        (n_in as f64 - 1.0) / 2.0
    } else {
        i as f64 * (n_in as f64 - 1.0) / (n_out as f64 - 1.0)
    }
}

fn bracket(x: f64, n: usize) -> (usize, usize, f64) {
    let lo = (x.floor() as usize).min(n - 1);
    let hi = (lo + 1).min(n - 1);
    (lo, hi, x - lo as f64)
}

/// Bilinear resize with corner-aligned sampling: output corners land exactly
/// on input corners.
pub fn resize(img: &GrayImage, out_rows: usize, out_cols: usize) -> Result<GrayImage, ImageError> {
    if out_rows == 0 || out_cols == 0 {
        return Err(ImageError::InvalidDimensions { rows: out_rows, cols: out_cols });
    }
    if img.dims() == (out_rows, out_cols) {
        return Ok(img.clone());
    }
    let rows: Vec<_> = (0..out_rows).map(|i| bracket(source_coord(i, out_rows, img.rows), img.rows)).collect();
    let cols: Vec<_> = (0..out_cols).map(|j| bracket(source_coord(j, out_cols, img.cols), img.cols)).collect();
    Ok(GrayImage::from_fn(out_rows, out_cols, |i, j| {
        let (r0, r1, fr) = rows[i];
        let (c0, c1, fc) = cols[j];
        let top = img.get(r0, c0) * (1.0 - fc) + img.get(r0, c1) * fc;
        let bottom = img.get(r1, c0) * (1.0 - fc) + img.get(r1, c1) * fc;
        top * (1.0 - fr) + bottom * fr
    }))
}
