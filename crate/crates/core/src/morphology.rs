//! Flat structuring elements and the four basic morphological operators.
//!
//! Border handling never invents padding: erosion takes the minimum over the
//! offsets that land inside the image, dilation the maximum over the reflected
//! offsets that land inside. Because every structuring element contains the
//! origin the constraint set is never empty.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::image::Raster;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorphologyError {
    #[error("structuring element must not be empty")]
    Empty,
    #[error("structuring element must contain the origin")]
    MissingOrigin,
    #[error("duplicate offset ({0}, {1}) in structuring element")]
    Duplicate(i32, i32),
    #[error("square structuring element index must be at least 1")]
    InvalidIndex,
    #[error("cannot parse structuring element {0:?}")]
    Parse(String),
}

/// A finite set of integer offsets containing `(0, 0)`, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StructuringElement {
    offsets: Vec<(i32, i32)>,
}

impl StructuringElement {
    pub fn new(mut offsets: Vec<(i32, i32)>) -> Result<Self, MorphologyError> {
        if offsets.is_empty() {
            return Err(MorphologyError::Empty);
        }
        offsets.sort_unstable();
        if let Some(w) = offsets.windows(2).find(|w| w[0] == w[1]) {
            return Err(MorphologyError::Duplicate(w[0].0, w[0].1));
        }
        if offsets.binary_search(&(0, 0)).is_err() {
            return Err(MorphologyError::MissingOrigin);
        }
        Ok(StructuringElement { offsets })
    }

    /// All offsets of the axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rectangle(x0: i32, x1: i32, y0: i32, y1: i32) -> Result<Self, MorphologyError> {
        let offsets = (y0..=y1).flat_map(|dy| (x0..=x1).map(move |dx| (dx, dy))).collect();
        Self::new(offsets)
    }

    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn contains(&self, offset: (i32, i32)) -> bool {
        self.offsets.binary_search(&offset).is_ok()
    }

    pub fn is_subset_of(&self, other: &StructuringElement) -> bool {
        self.offsets.iter().all(|&o| other.contains(o))
    }

    /// `Some((x0, x1, y0, y1))` when the offsets fill their bounding box.
    pub fn as_rectangle(&self) -> Option<(i32, i32, i32, i32)> {
        let x0 = self.offsets.iter().map(|o| o.0).min()?;
        let x1 = self.offsets.iter().map(|o| o.0).max()?;
        let y0 = self.offsets.iter().map(|o| o.1).min()?;
        let y1 = self.offsets.iter().map(|o| o.1).max()?;
        let area = (x1 - x0 + 1) as usize * (y1 - y0 + 1) as usize;
        (area == self.offsets.len()).then_some((x0, x1, y0, y1))
    }
}

impl fmt::Display for StructuringElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.offsets.iter().map(|(x, y)| format!("({x},{y})")).collect();
        f.write_str(&parts.join(";"))
    }
}

/// Accepts `square:N` or an offset list `(dx,dy);(dx,dy);...`.
impl FromStr for StructuringElement {
    type Err = MorphologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(n) = s.strip_prefix("square:") {
            let n: u32 = n.trim().parse().map_err(|_| MorphologyError::Parse(s.into()))?;
            return square_se(n);
        }
        let list = s.strip_prefix("offsets:").unwrap_or(s);
        let mut offsets = Vec::new();
        for part in list.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let inner = part
                .strip_prefix('(')
                .and_then(|p| p.strip_suffix(')'))
                .ok_or_else(|| MorphologyError::Parse(part.into()))?;
            let (a, b) = inner.split_once(',').ok_or_else(|| MorphologyError::Parse(part.into()))?;
            let dx = a.trim().parse().map_err(|_| MorphologyError::Parse(part.into()))?;
            let dy = b.trim().parse().map_err(|_| MorphologyError::Parse(part.into()))?;
            offsets.push((dx, dy));
        }
        Self::new(offsets)
    }
}

/// The square `S_n` with `n * n` offsets, built by alternately extending
/// towards `+x/+y` (even `n`) and `-x/-y` (odd `n`) from `S_1 = {0}`.
/// The resulting family is nested: `S_n` is a subset of `S_{n+1}`.
pub fn square_se(n: u32) -> Result<StructuringElement, MorphologyError> {
    if n == 0 {
        return Err(MorphologyError::InvalidIndex);
    }
    let mut offsets = vec![(0, 0)];
    for k in 2..=n {
        let s = if k % 2 == 0 { 1 } else { -1 };
        let mut next = Vec::with_capacity(offsets.len() * 4);
        for &(x, y) in &offsets {
            next.extend_from_slice(&[(x, y), (x + s, y), (x, y + s), (x + s, y + s)]);
        }
        next.sort_unstable();
        next.dedup();
        offsets = next;
    }
    StructuringElement::new(offsets)
}

#[derive(Clone, Copy)]
enum Extremum {
    Min,
    Max,
}

impl Extremum {
    fn pick<T: Ord>(self, a: T, b: T) -> T {
        match self {
            Extremum::Min => a.min(b),
            Extremum::Max => a.max(b),
        }
    }
}

/// Direct evaluation: `min { f(x + b) : b in B, x + b inside }`.
pub fn erode_naive<R: Raster>(f: &R, se: &StructuringElement) -> R {
    naive(f, se.offsets().iter().copied(), Extremum::Min)
}

/// Direct evaluation: `max { f(x - b) : b in B, x - b inside }`.
pub fn dilate_naive<R: Raster>(f: &R, se: &StructuringElement) -> R {
    naive(f, se.offsets().iter().map(|&(dx, dy)| (-dx, -dy)), Extremum::Max)
}

fn naive<R: Raster>(f: &R, offsets: impl Iterator<Item = (i32, i32)> + Clone, ext: Extremum) -> R {
    let (w, h) = (f.width() as i64, f.height() as i64);
    let src = f.pixels();
    let mut out = Vec::with_capacity(src.len());
    for y in 0..h {
        for x in 0..w {
            let mut acc: Option<R::Pixel> = None;
            for (dx, dy) in offsets.clone() {
                let (sx, sy) = (x + dx as i64, y + dy as i64);
                if sx < 0 || sy < 0 || sx >= w || sy >= h {
                    continue;
                }
                let v = src[(sy * w + sx) as usize];
                acc = Some(match acc {
                    None => v,
                    Some(a) => ext.pick(a, v),
                });
            }
            out.push(acc.expect("structuring element contains the origin"));
        }
    }
    f.with_pixels(out)
}

/// Erosion. Rectangular elements take a separable sliding-window path whose
/// output is identical to [`erode_naive`].
pub fn erode<R: Raster>(f: &R, se: &StructuringElement) -> R {
    match se.as_rectangle() {
        Some((x0, x1, y0, y1)) => separable(f, (x0, x1), (y0, y1), Extremum::Min),
        None => erode_naive(f, se),
    }
}

pub fn dilate<R: Raster>(f: &R, se: &StructuringElement) -> R {
    match se.as_rectangle() {
        Some((x0, x1, y0, y1)) => separable(f, (-x1, -x0), (-y1, -y0), Extremum::Max),
        None => dilate_naive(f, se),
    }
}

/// `dilate(erode(f, B), B)`
pub fn open<R: Raster>(f: &R, se: &StructuringElement) -> R {
    dilate(&erode(f, se), se)
}

/// `erode(dilate(f, B), B)`
pub fn close<R: Raster>(f: &R, se: &StructuringElement) -> R {
    erode(&dilate(f, se), se)
}

/// Rectangle windows clipped to a rectangular domain factor into a row pass
/// and a column pass.
fn separable<R: Raster>(f: &R, xs: (i32, i32), ys: (i32, i32), ext: Extremum) -> R {
    let (w, h) = (f.width(), f.height());
    let src = f.pixels();
    let mut rows = Vec::with_capacity(src.len());
    let mut line = Vec::with_capacity(w.max(h));
    for row in src.chunks(w) {
        sliding(row, xs, ext, &mut line);
        rows.extend_from_slice(&line);
    }
    let mut out = rows.clone();
    let mut column = Vec::with_capacity(h);
    for x in 0..w {
        column.clear();
        column.extend((0..h).map(|y| rows[y * w + x]));
        sliding(&column, ys, ext, &mut line);
        for (y, &v) in line.iter().enumerate() {
            out[y * w + x] = v;
        }
    }
    f.with_pixels(out)
}

/// `out[i] = ext { input[j] : j in [i + lo, i + hi] clipped }` via a
/// monotone deque. The window always contains `i` since `lo <= 0 <= hi`.
fn sliding<T: Copy + Ord>(input: &[T], (lo, hi): (i32, i32), ext: Extremum, out: &mut Vec<T>) {
    let n = input.len() as i64;
    let (lo, hi) = (lo as i64, hi as i64);
    out.clear();
    let mut deque: VecDeque<usize> = VecDeque::new();
    let dominates = |a: T, b: T| match ext {
        Extremum::Min => a <= b,
        Extremum::Max => a >= b,
    };
    let mut next = 0i64;
    for i in 0..n {
        let right = (i + hi).min(n - 1);
        while next <= right {
            let v = input[next as usize];
            while deque.back().is_some_and(|&j| dominates(v, input[j])) {
                deque.pop_back();
            }
            deque.push_back(next as usize);
            next += 1;
        }
        let left = (i + lo).max(0);
        while deque.front().is_some_and(|&j| (j as i64) < left) {
            deque.pop_front();
        }
        out.push(input[*deque.front().expect("window is never empty")]);
    }
}
