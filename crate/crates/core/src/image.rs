//! Grayscale and binary rasters, file I/O and pixelwise helpers.
//!
//! Pixel `(x, y)` lives at column `x`, row `y`, with the origin at the top-left
//! corner and rows stored contiguously (PGM raster order). In a
//! [`BinaryImage`] the value `0` is black and black pixels are the foreground
//! whose topology is studied.

use std::fmt;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const DEFAULT_MAX_VALUE: u32 = 255;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImageError {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("pixel value {value} at ({x}, {y}) exceeds max value {max}")]
    ValueOutOfRange { x: usize, y: usize, value: u64, max: u32 },
    #[error("image has zero rows or columns")]
    EmptyImage,
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("binary pixels must be 0 or 1, found {value} at ({x}, {y})")]
    NotBinary { x: usize, y: usize, value: u32 },
    #[error("format {0} cannot store max value {1}")]
    Unsupported(ImageFormat, u32),
}

/// On-disk encodings understood by [`load_image`] and [`serialize_image`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    PgmAscii,
    PgmBinary,
    CsvGrid,
}

impl fmt::Display for ImageFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ImageFormat::PgmAscii => "PGM (P2)",
            ImageFormat::PgmBinary => "PGM (P5)",
            ImageFormat::CsvGrid => "CSV grid",
        };
        f.write_str(name)
    }
}

/// Common view over rectangular rasters so that morphology and the partial
/// order work on grayscale and binary images alike.
pub trait Raster: Sized {
    type Pixel: Copy + Ord + fmt::Debug;

    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn pixels(&self) -> &[Self::Pixel];
    /// Same geometry (and metadata), new pixel buffer of identical length.
    fn with_pixels(&self, pixels: Vec<Self::Pixel>) -> Self;

    fn get(&self, x: usize, y: usize) -> Self::Pixel {
        self.pixels()[y * self.width() + x]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayscaleImage {
    width: usize,
    height: usize,
    max_value: u32,
    values: Vec<u32>,
}

impl GrayscaleImage {
    pub fn new(width: usize, height: usize, max_value: u32, values: Vec<u32>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyImage);
        }
        if values.len() != width * height {
            return Err(ImageError::MalformedInput(format!(
                "expected {} values for a {width}x{height} image, got {}",
                width * height,
                values.len()
            )));
        }
        if max_value == 0 {
            return Err(ImageError::MalformedInput("max value must be positive".into()));
        }
        if let Some(i) = values.iter().position(|&v| v > max_value) {
            return Err(ImageError::ValueOutOfRange {
                x: i % width,
                y: i / width,
                value: values[i] as u64,
                max: max_value,
            });
        }
        Ok(GrayscaleImage { width, height, max_value, values })
    }

    pub fn filled(width: usize, height: usize, max_value: u32, value: u32) -> Result<Self, ImageError> {
        Self::new(width, height, max_value, vec![value; width * height])
    }

    pub fn max_value(&self) -> u32 {
        self.max_value
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<u32> {
        self.values
    }

    /// Binary images become `{0, 1}`-valued grayscale images with max value 1.
    pub fn from_binary(b: &BinaryImage) -> Self {
        GrayscaleImage {
            width: b.width,
            height: b.height,
            max_value: 1,
            values: b.bits.iter().map(|&v| v as u32).collect(),
        }
    }
}

impl Raster for GrayscaleImage {
    type Pixel = u32;

    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn pixels(&self) -> &[u32] {
        &self.values
    }
    fn with_pixels(&self, pixels: Vec<u32>) -> Self {
        assert_eq!(pixels.len(), self.values.len());
        GrayscaleImage { width: self.width, height: self.height, max_value: self.max_value, values: pixels }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, bits: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyImage);
        }
        if bits.len() != width * height {
            return Err(ImageError::MalformedInput(format!(
                "expected {} bits for a {width}x{height} image, got {}",
                width * height,
                bits.len()
            )));
        }
        if let Some(i) = bits.iter().position(|&b| b > 1) {
            return Err(ImageError::NotBinary { x: i % width, y: i / width, value: bits[i] as u32 });
        }
        Ok(BinaryImage { width, height, bits })
    }

    pub fn all_black(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "empty binary image");
        BinaryImage { width, height, bits: vec![0; width * height] }
    }

    pub fn all_white(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "empty binary image");
        BinaryImage { width, height, bits: vec![1; width * height] }
    }

    /// Parses rows of `0`/`1` (black/white) characters; whitespace-only lines
    /// are skipped. Handy for small inline fixtures.
    pub fn from_ascii(rows: &str) -> Result<Self, ImageError> {
        let lines: Vec<&str> = rows.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let height = lines.len();
        let width = lines.first().map_or(0, |l| l.len());
        let mut bits = Vec::with_capacity(width * height);
        for line in &lines {
            if line.len() != width {
                return Err(ImageError::MalformedInput("ragged rows".into()));
            }
            for c in line.chars() {
                match c {
                    '0' => bits.push(0),
                    '1' => bits.push(1),
                    other => return Err(ImageError::MalformedInput(format!("unexpected character {other:?}"))),
                }
            }
        }
        Self::new(width, height, bits)
    }

    /// Accepts a grayscale image whose values are all 0 or 1.
    pub fn try_from_gray(g: &GrayscaleImage) -> Result<Self, ImageError> {
        if let Some(i) = g.values.iter().position(|&v| v > 1) {
            return Err(ImageError::NotBinary { x: i % g.width, y: i / g.width, value: g.values[i] });
        }
        Ok(BinaryImage { width: g.width, height: g.height, bits: g.values.iter().map(|&v| v as u8).collect() })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn is_black(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x] == 0
    }

    pub fn black_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 0).count()
    }
}

impl Raster for BinaryImage {
    type Pixel = u8;

    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn pixels(&self) -> &[u8] {
        &self.bits
    }
    fn with_pixels(&self, pixels: Vec<u8>) -> Self {
        assert_eq!(pixels.len(), self.bits.len());
        debug_assert!(pixels.iter().all(|&b| b <= 1));
        BinaryImage { width: self.width, height: self.height, bits: pixels }
    }
}

pub fn load_image(bytes: &[u8], format: ImageFormat) -> Result<GrayscaleImage, ImageError> {
    match format {
        ImageFormat::PgmAscii | ImageFormat::PgmBinary => load_pgm(bytes, format),
        ImageFormat::CsvGrid => load_csv(bytes),
    }
}

/// Guesses the format from the leading bytes: `P2`/`P5` magic, else CSV.
pub fn sniff_format(bytes: &[u8]) -> ImageFormat {
    match bytes.get(..2) {
        Some(b"P2") => ImageFormat::PgmAscii,
        Some(b"P5") => ImageFormat::PgmBinary,
        _ => ImageFormat::CsvGrid,
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&c) = self.bytes.get(self.pos) {
            if c.is_ascii_whitespace() {
                self.pos += 1;
            } else if c == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|c| !c.is_ascii_whitespace() && *c != b'#') {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u64, ImageError> {
        let tok = self.token().ok_or_else(|| ImageError::MalformedInput(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| ImageError::MalformedInput(format!("bad {what}: {:?}", String::from_utf8_lossy(tok))))
    }
}

fn load_pgm(bytes: &[u8], format: ImageFormat) -> Result<GrayscaleImage, ImageError> {
    let mut rd = HeaderReader { bytes, pos: 0 };
    let magic = rd.token().ok_or_else(|| ImageError::MalformedInput("empty file".into()))?;
    let expected: &[u8] = if format == ImageFormat::PgmAscii { b"P2" } else { b"P5" };
    if magic != expected {
        return Err(ImageError::MalformedInput(format!(
            "expected magic {}, found {:?}",
            String::from_utf8_lossy(expected),
            String::from_utf8_lossy(magic)
        )));
    }
    let width = rd.number("width")? as usize;
    let height = rd.number("height")? as usize;
    let max = rd.number("max value")?;
    if width == 0 || height == 0 {
        return Err(ImageError::EmptyImage);
    }
    if max == 0 || max > u32::MAX as u64 {
        return Err(ImageError::MalformedInput(format!("invalid max value {max}")));
    }
    let max = max as u32;
    let n = width * height;
    let mut values = Vec::with_capacity(n);
    match format {
        ImageFormat::PgmAscii => {
            for i in 0..n {
                let v = rd.number("pixel")?;
                if v > max as u64 {
                    return Err(ImageError::ValueOutOfRange { x: i % width, y: i / width, value: v, max });
                }
                values.push(v as u32);
            }
            if rd.token().is_some() {
                return Err(ImageError::MalformedInput("trailing data after pixels".into()));
            }
        }
        _ => {
            if max > 255 {
                return Err(ImageError::Unsupported(format, max));
            }
            // exactly one whitespace byte separates the header from the raster
            let start = rd.pos + 1;
            let raster = bytes
                .get(start..start + n)
                .ok_or_else(|| ImageError::MalformedInput("truncated raster".into()))?;
            if bytes.len() > start + n {
                return Err(ImageError::MalformedInput("trailing data after raster".into()));
            }
            for (i, &v) in raster.iter().enumerate() {
                if v as u32 > max {
                    return Err(ImageError::ValueOutOfRange { x: i % width, y: i / width, value: v as u64, max });
                }
                values.push(v as u32);
            }
        }
    }
    GrayscaleImage::new(width, height, max, values)
}

fn load_csv(bytes: &[u8]) -> Result<GrayscaleImage, ImageError> {
    let text = std::str::from_utf8(bytes).map_err(|_| ImageError::MalformedInput("CSV is not UTF-8".into()))?;
    let mut width = None;
    let mut values = Vec::new();
    let mut height = 0;
    for (y, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut row = 0;
        for (x, field) in line.split(',').enumerate() {
            let v: u64 = field
                .trim()
                .parse()
                .map_err(|_| ImageError::MalformedInput(format!("line {}: bad integer {field:?}", y + 1)))?;
            if v > DEFAULT_MAX_VALUE as u64 {
                return Err(ImageError::ValueOutOfRange { x, y: height, value: v, max: DEFAULT_MAX_VALUE });
            }
            values.push(v as u32);
            row += 1;
        }
        match width {
            None => width = Some(row),
            Some(w) if w != row => {
                return Err(ImageError::MalformedInput(format!("line {}: expected {w} columns, got {row}", y + 1)))
            }
            _ => {}
        }
        height += 1;
    }
    let width = width.ok_or(ImageError::EmptyImage)?;
    GrayscaleImage::new(width, height, DEFAULT_MAX_VALUE, values)
}

/// Canonical encodings: single-space (PGM) or comma (CSV) separators, one
/// raster row per line, trailing newline.
pub fn serialize_image(img: &GrayscaleImage, format: ImageFormat) -> Result<Vec<u8>, ImageError> {
    let mut out = String::new();
    match format {
        ImageFormat::PgmAscii => {
            out.push_str(&format!("P2\n{} {}\n{}\n", img.width, img.height, img.max_value));
            push_rows(&mut out, img, " ");
            Ok(out.into_bytes())
        }
        ImageFormat::PgmBinary => {
            if img.max_value > 255 {
                return Err(ImageError::Unsupported(format, img.max_value));
            }
            let mut bytes = format!("P5\n{} {}\n{}\n", img.width, img.height, img.max_value).into_bytes();
            bytes.extend(img.values.iter().map(|&v| v as u8));
            Ok(bytes)
        }
        ImageFormat::CsvGrid => {
            if img.max_value != DEFAULT_MAX_VALUE && img.values.iter().any(|&v| v > DEFAULT_MAX_VALUE) {
                return Err(ImageError::Unsupported(format, img.max_value));
            }
            push_rows(&mut out, img, ",");
            Ok(out.into_bytes())
        }
    }
}

fn push_rows(out: &mut String, img: &GrayscaleImage, sep: &str) {
    for row in img.values.chunks(img.width) {
        let line: Vec<String> = row.iter().map(u32::to_string).collect();
        out.push_str(&line.join(sep));
        out.push('\n');
    }
}

/// Pixel is black (0) where `f(x) <= t`, white (1) otherwise.
pub fn threshold(f: &GrayscaleImage, t: u32) -> BinaryImage {
    BinaryImage {
        width: f.width,
        height: f.height,
        bits: f.values.iter().map(|&v| u8::from(v > t)).collect(),
    }
}

/// Number of pixels [`add_salt_noise`] overwrites.
pub fn salt_count(width: usize, height: usize, fraction: f64) -> usize {
    let n = width * height;
    ((fraction.clamp(0.0, 1.0) * n as f64).floor() as usize).min(n)
}

/// Sets `floor(fraction * width * height)` distinct pixels to the maximum
/// intensity. Positions are drawn without replacement from a ChaCha8 stream
/// seeded with `seed`, so results are reproducible across platforms.
pub fn add_salt_noise(f: &GrayscaleImage, fraction: f64, seed: u64) -> GrayscaleImage {
    let n = f.values.len();
    let k = salt_count(f.width, f.height, fraction);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = f.values.clone();
    for i in index::sample(&mut rng, n, k).into_iter() {
        values[i] = f.max_value;
    }
    f.with_pixels(values)
}

pub fn complement(b: &BinaryImage) -> BinaryImage {
    b.with_pixels(b.bits.iter().map(|&v| 1 - v).collect())
}

/// Pointwise partial order: `f <= g` iff `f(x) <= g(x)` at every pixel.
pub fn image_leq<R: Raster>(f: &R, g: &R) -> Result<bool, ImageError> {
    Ok(first_violation(f, g)?.is_none())
}

/// First pixel (raster order) where `f(x) > g(x)`.
pub fn first_violation<R: Raster>(f: &R, g: &R) -> Result<Option<(usize, usize)>, ImageError> {
    check_same_dims(f, g)?;
    let w = f.width();
    Ok(f.pixels().iter().zip(g.pixels()).position(|(a, b)| a > b).map(|i| (i % w, i / w)))
}

pub fn check_same_dims<R: Raster, S: Raster>(f: &R, g: &S) -> Result<(), ImageError> {
    if f.width() != g.width() || f.height() != g.height() {
        return Err(ImageError::DimensionMismatch(f.width(), f.height(), g.width(), g.height()));
    }
    Ok(())
}
