//! Filtrations of binary and grayscale images, stored as per-pixel entry times.
//!
//! Any nested sequence of binary images whose black sets grow is equivalent to
//! assigning each pixel the first level at which it is black. Every builder in
//! this module produces an [`EntryTimeGrid`], and every morphological builder
//! routes its image sequence through [`from_nested_sequence`] so the nesting
//! is checked rather than assumed.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::image::{check_same_dims, first_violation, threshold, BinaryImage, GrayscaleImage, ImageError, Raster};
use crate::morphology::{close, dilate, erode, open, square_se, MorphologyError, StructuringElement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FiltrationError {
    #[error("sequence is not nested: image {index} loses black pixel ({x}, {y})")]
    NonMonotoneSequence { index: usize, x: usize, y: usize },
    #[error(transparent)]
    DimensionMismatch(#[from] ImageError),
    #[error("{images} images but {values} filtration values")]
    LengthMismatch { images: usize, values: usize },
    #[error("filtration values must be strictly increasing")]
    NonIncreasingValues,
    #[error("empty image sequence")]
    EmptySequence,
    #[error("structuring element {index} is not contained in element {next}", next = index + 1)]
    NonNestedSes { index: usize },
    #[error("square element indices must be positive and strictly increasing")]
    InvalidSeIndices,
    #[error("no structuring elements given")]
    NoStructuringElements,
    #[error("filtration kind {0} is not built from structuring elements")]
    UnsupportedKind(FiltrationKind),
    #[error("thresholds must satisfy t1 < t2 (got {0} and {1})")]
    InvalidThresholds(u32, u32),
    #[error(transparent)]
    Morphology(#[from] MorphologyError),
    #[error("malformed grid: {0}")]
    MalformedGrid(String),
}

/// First filtration value at which each pixel is black; `None` is "never".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryTimeGrid {
    width: usize,
    height: usize,
    times: Vec<Option<u32>>,
    max_level: u32,
    origin_offset: u32,
}

impl EntryTimeGrid {
    /// `max_level` defaults to the largest finite entry (0 if none).
    pub fn new(width: usize, height: usize, times: Vec<Option<u32>>) -> Result<Self, FiltrationError> {
        let max_level = times.iter().flatten().copied().max().unwrap_or(0);
        Self::with_levels(width, height, times, max_level, 0)
    }

    pub fn with_levels(
        width: usize,
        height: usize,
        times: Vec<Option<u32>>,
        max_level: u32,
        origin_offset: u32,
    ) -> Result<Self, FiltrationError> {
        if width == 0 || height == 0 {
            return Err(FiltrationError::MalformedGrid("empty grid".into()));
        }
        if times.len() != width * height {
            return Err(FiltrationError::MalformedGrid(format!(
                "expected {} entries, got {}",
                width * height,
                times.len()
            )));
        }
        if times.iter().flatten().any(|&t| t > max_level) {
            return Err(FiltrationError::MalformedGrid(format!("entry above max level {max_level}")));
        }
        Ok(EntryTimeGrid { width, height, times, max_level, origin_offset })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn times(&self) -> &[Option<u32>] {
        &self.times
    }

    pub fn get(&self, x: usize, y: usize) -> Option<u32> {
        self.times[y * self.width + x]
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    /// Filtration value at which the unmodified input image sits.
    pub fn origin_offset(&self) -> u32 {
        self.origin_offset
    }

    /// Sorted distinct finite entry times.
    pub fn levels(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.times.iter().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Black exactly where the entry time is at most `t`.
    pub fn level_set(&self, t: u32) -> BinaryImage {
        let bits = self.times.iter().map(|e| u8::from(!matches!(e, Some(v) if *v <= t))).collect();
        BinaryImage::new(self.width, self.height, bits).expect("grid dimensions are positive")
    }

    /// Appends an all-black stage one level above `max_level`.
    pub fn capped(mut self) -> Self {
        let cap = self.max_level + 1;
        for e in &mut self.times {
            e.get_or_insert(cap);
        }
        self.max_level = cap;
        self
    }

    /// Comma-separated rows, `inf` for pixels that never turn black.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.times.chunks(self.width) {
            let cells: Vec<String> = row
                .iter()
                .map(|e| match e {
                    Some(v) => v.to_string(),
                    None => "inf".to_string(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, FiltrationError> {
        let mut width = None;
        let mut height = 0;
        let mut times = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut n = 0;
            for field in line.split(',').map(str::trim) {
                times.push(match field {
                    "inf" => None,
                    s => Some(s.parse::<u32>().map_err(|_| {
                        FiltrationError::MalformedGrid(format!("line {}: bad entry {s:?}", lineno + 1))
                    })?),
                });
                n += 1;
            }
            match width {
                None => width = Some(n),
                Some(w) if w != n => {
                    return Err(FiltrationError::MalformedGrid(format!("line {}: ragged row", lineno + 1)))
                }
                _ => {}
            }
            height += 1;
        }
        let width = width.ok_or_else(|| FiltrationError::MalformedGrid("empty grid".into()))?;
        Self::new(width, height, times)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiltrationKind {
    Erosion,
    Dilation,
    Opening,
    Closing,
    CombinedErosionDilation,
    CombinedOpeningClosing,
    Sublevel,
    Explicit,
}

impl FiltrationKind {
    pub fn is_morphological(self) -> bool {
        !matches!(self, FiltrationKind::Sublevel | FiltrationKind::Explicit)
    }

    pub fn default_cap(self) -> bool {
        !matches!(self, FiltrationKind::Dilation | FiltrationKind::Closing)
    }

    pub fn name(self) -> &'static str {
        match self {
            FiltrationKind::Erosion => "erosion",
            FiltrationKind::Dilation => "dilation",
            FiltrationKind::Opening => "opening",
            FiltrationKind::Closing => "closing",
            FiltrationKind::CombinedErosionDilation => "combined-ed",
            FiltrationKind::CombinedOpeningClosing => "combined-oc",
            FiltrationKind::Sublevel => "sublevel",
            FiltrationKind::Explicit => "explicit",
        }
    }
}

impl fmt::Display for FiltrationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FiltrationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use FiltrationKind::*;
        [Erosion, Dilation, Opening, Closing, CombinedErosionDilation, CombinedOpeningClosing, Sublevel, Explicit]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown filtration kind {s:?}"))
    }
}

/// Structuring elements `B_1 ⊆ ... ⊆ B_n` driving a morphological filtration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeFamily {
    /// Indices into the square family, e.g. `[2, 3, ..., N]`.
    Squares(Vec<u32>),
    Explicit(Vec<StructuringElement>),
}

impl SeFamily {
    /// Squares `S_2, ..., S_max`.
    pub fn squares_up_to(max: u32) -> Self {
        SeFamily::Squares((2..=max).collect())
    }

    pub fn len(&self) -> usize {
        match self {
            SeFamily::Squares(v) => v.len(),
            SeFamily::Explicit(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn elements(&self) -> Result<Vec<StructuringElement>, FiltrationError> {
        let ses = match self {
            SeFamily::Squares(idx) => {
                if idx.first() == Some(&0) || idx.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(FiltrationError::InvalidSeIndices);
                }
                idx.iter().map(|&n| square_se(n)).collect::<Result<Vec<_>, _>>()?
            }
            SeFamily::Explicit(v) => v.clone(),
        };
        if ses.is_empty() {
            return Err(FiltrationError::NoStructuringElements);
        }
        if let Some(index) = ses.windows(2).position(|w| !w[0].is_subset_of(&w[1])) {
            return Err(FiltrationError::NonNestedSes { index });
        }
        Ok(ses)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiltrationSpec {
    pub kind: FiltrationKind,
    pub ses: SeFamily,
    pub cap_all_black: bool,
}

impl FiltrationSpec {
    /// Uses the kind's default cap: on for erosion, opening and combined
    /// filtrations, off for dilation and closing.
    pub fn new(kind: FiltrationKind, ses: SeFamily) -> Self {
        FiltrationSpec { kind, ses, cap_all_black: kind.default_cap() }
    }

    pub fn with_cap(mut self, cap: bool) -> Self {
        self.cap_all_black = cap;
        self
    }

    pub fn se_count(&self) -> usize {
        self.ses.len()
    }
}

/// Entry time of each pixel = smallest `values[i]` with the pixel black in
/// `images[i]`. The black sets must grow along the sequence.
pub fn from_nested_sequence(images: &[BinaryImage], values: &[u32]) -> Result<EntryTimeGrid, FiltrationError> {
    let first = images.first().ok_or(FiltrationError::EmptySequence)?;
    if images.len() != values.len() {
        return Err(FiltrationError::LengthMismatch { images: images.len(), values: values.len() });
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FiltrationError::NonIncreasingValues);
    }
    for img in &images[1..] {
        check_same_dims(first, img)?;
    }
    for (i, pair) in images.windows(2).enumerate() {
        if let Some((x, y)) = first_violation(&pair[1], &pair[0])? {
            return Err(FiltrationError::NonMonotoneSequence { index: i + 1, x, y });
        }
    }
    let mut times = vec![None; first.pixels().len()];
    // walk backwards so the earliest black stage wins
    for (img, &v) in images.iter().zip(values).rev() {
        for (t, &b) in times.iter_mut().zip(img.pixels()) {
            if b == 0 {
                *t = Some(v);
            }
        }
    }
    EntryTimeGrid::with_levels(first.width(), first.height(), times, *values.last().unwrap(), values[0])
}

/// Morphological filtration of a binary image.
///
/// With `n` elements the input sits at value 0 for erosion/opening, at value
/// `n` for dilation/closing (larger elements whiten more, so they come first),
/// and at `n` in the middle of the `0..=2n` range for the combined kinds. The
/// optional cap adds an all-black stage at `max_level + 1`.
pub fn mm_filtration(f: &BinaryImage, spec: &FiltrationSpec) -> Result<EntryTimeGrid, FiltrationError> {
    use FiltrationKind::*;
    if !spec.kind.is_morphological() {
        return Err(FiltrationError::UnsupportedKind(spec.kind));
    }
    let ses = spec.ses.elements()?;
    let apply = |op: fn(&BinaryImage, &StructuringElement) -> BinaryImage| -> Vec<BinaryImage> {
        ses.par_iter().map(|se| op(f, se)).collect()
    };
    let shrinking = |op| {
        let mut seq = vec![f.clone()];
        seq.extend(apply(op));
        seq
    };
    let growing = |op| {
        let mut seq = apply(op);
        seq.reverse();
        seq.push(f.clone());
        seq
    };
    let combined = |lower, upper| {
        let mut seq = growing(lower);
        seq.extend(apply(upper));
        seq
    };
    let n = ses.len() as u32;
    let (images, origin) = match spec.kind {
        Erosion => (shrinking(erode), 0),
        Opening => (shrinking(open), 0),
        Dilation => (growing(dilate), n),
        Closing => (growing(close), n),
        CombinedErosionDilation => (combined(dilate, erode), n),
        CombinedOpeningClosing => (combined(close, open), n),
        Sublevel | Explicit => unreachable!(),
    };
    let values: Vec<u32> = (0..images.len() as u32).collect();
    let grid = from_nested_sequence(&images, &values)?;
    debug_assert_eq!(grid.origin_offset(), 0);
    let grid = EntryTimeGrid { origin_offset: origin, ..grid };
    Ok(if spec.cap_all_black { grid.capped() } else { grid })
}

/// Each pixel enters at its own intensity; level `t` is `threshold(f, t)`.
pub fn sublevel_filtration(f: &GrayscaleImage) -> EntryTimeGrid {
    EntryTimeGrid {
        width: f.width(),
        height: f.height(),
        times: f.values().iter().map(|&v| Some(v)).collect(),
        max_level: f.max_value(),
        origin_offset: 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphFamily {
    Erosion,
    Dilation,
    Opening,
    Closing,
}

impl MorphFamily {
    fn apply(self, f: &BinaryImage, se: &StructuringElement) -> BinaryImage {
        match self {
            MorphFamily::Erosion => erode(f, se),
            MorphFamily::Dilation => dilate(f, se),
            MorphFamily::Opening => open(f, se),
            MorphFamily::Closing => close(f, se),
        }
    }
}

/// One `<=` relation of the threshold/element square.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrowCheck {
    pub from: String,
    pub to: String,
    pub violation: Option<(usize, usize)>,
}

impl ArrowCheck {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BifiltrationReport {
    /// Top (element `B1`) and bottom (element `B2`) horizontal arrows, then the
    /// vertical arrows at `t2` and `t1`.
    pub arrows: [ArrowCheck; 4],
}

impl BifiltrationReport {
    pub fn all_hold(&self) -> bool {
        self.arrows.iter().all(ArrowCheck::holds)
    }
}

/// Checks the four order relations among `op_Bj(threshold(f, ti))`.
///
/// Horizontal arrows go from threshold `t2` to `t1`. Vertical arrows point
/// from `B2` to `B1` for erosion and opening, and from `B1` to `B2` for
/// dilation and closing.
pub fn verify_bifiltration_square(
    f: &GrayscaleImage,
    t1: u32,
    t2: u32,
    b1: &StructuringElement,
    b2: &StructuringElement,
    family: MorphFamily,
) -> Result<BifiltrationReport, FiltrationError> {
    if t1 >= t2 {
        return Err(FiltrationError::InvalidThresholds(t1, t2));
    }
    if !b1.is_subset_of(b2) {
        return Err(FiltrationError::NonNestedSes { index: 0 });
    }
    let (lo, hi) = (threshold(f, t1), threshold(f, t2));
    let name = |b: &str, t: u32| format!("{family:?}_{b}(threshold {t})");
    let img = |b, t: &BinaryImage| family.apply(t, b);
    let (b1_hi, b1_lo, b2_hi, b2_lo) = (img(b1, &hi), img(b1, &lo), img(b2, &hi), img(b2, &lo));
    let check = |from: &BinaryImage, fname: String, to: &BinaryImage, tname: String| -> Result<ArrowCheck, FiltrationError> {
        Ok(ArrowCheck { from: fname, to: tname, violation: first_violation(from, to)? })
    };
    let upward = matches!(family, MorphFamily::Erosion | MorphFamily::Opening);
    let vertical = |small: &BinaryImage, large: &BinaryImage, t: u32| {
        if upward {
            check(large, name("B2", t), small, name("B1", t))
        } else {
            check(small, name("B1", t), large, name("B2", t))
        }
    };
    Ok(BifiltrationReport {
        arrows: [
            check(&b1_hi, name("B1", t2), &b1_lo, name("B1", t1))?,
            check(&b2_hi, name("B2", t2), &b2_lo, name("B2", t1))?,
            vertical(&b1_hi, &b2_hi, t2)?,
            vertical(&b1_lo, &b2_lo, t1)?,
        ],
    })
}
