//! Persistence diagrams over the two-element field via boundary-matrix
//! column reduction.

use std::cmp::Ordering;

use thiserror::Error;

use crate::cubical::FilteredCubicalComplex;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PersistenceError {
    #[error("malformed complex: {0}")]
    MalformedComplex(String),
}

/// A persistence interval. Raw diagrams carry integer filtration values,
/// normalized diagrams carry values in `[0, 1]`; `death` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub dim: u8,
    pub birth: f64,
    pub death: f64,
}

impl Interval {
    pub fn new(dim: u8, birth: f64, death: f64) -> Self {
        Interval { dim, birth, death }
    }

    pub fn essential(dim: u8, birth: f64) -> Self {
        Interval { dim, birth, death: f64::INFINITY }
    }

    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    pub fn lifespan(&self) -> f64 {
        self.death - self.birth
    }

    pub fn alive_at(&self, t: f64) -> bool {
        self.birth <= t && t < self.death
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.dim
            .cmp(&other.dim)
            .then(self.birth.total_cmp(&other.birth))
            .then(self.death.total_cmp(&other.death))
    }
}

/// Multiset of intervals, always kept in canonical `(dim, birth, death)`
/// order so that equal multisets compare equal.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    intervals: Vec<Interval>,
    scale: f64,
}

impl PersistenceDiagram {
    pub fn new(intervals: Vec<Interval>) -> Self {
        Self::with_scale(intervals, 1.0)
    }

    /// `scale` is the divisor already applied to the values (1 when raw).
    pub fn with_scale(mut intervals: Vec<Interval>, scale: f64) -> Self {
        intervals.sort_by(Interval::canonical_cmp);
        PersistenceDiagram { intervals, scale }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new())
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn in_dim(&self, dim: u8) -> impl Iterator<Item = &Interval> + '_ {
        self.intervals.iter().filter(move |i| i.dim == dim)
    }

    /// `(birth, death)` pairs of one dimension, in canonical order.
    pub fn pairs(&self, dim: u8) -> Vec<(f64, f64)> {
        self.in_dim(dim).map(|i| (i.birth, i.death)).collect()
    }

    /// Keeps only the listed dimensions.
    pub fn restrict_dims(&self, dims: &[u8]) -> Self {
        let kept = self.intervals.iter().filter(|i| dims.contains(&i.dim)).copied().collect();
        PersistenceDiagram { intervals: kept, scale: self.scale }
    }
}

/// Number of `dim`-intervals with `birth <= t < death`.
pub fn betti_at(pd: &PersistenceDiagram, t: f64, dim: u8) -> usize {
    pd.in_dim(dim).filter(|i| i.alive_at(t)).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Left-to-right column reduction, every column reduced.
    Standard,
    /// Reduces higher dimensions first and skips columns already known to be
    /// paired as a pivot row.
    #[default]
    Clearing,
}

pub fn compute_persistence(complex: &FilteredCubicalComplex) -> Result<PersistenceDiagram, PersistenceError> {
    compute_persistence_with(complex, Reduction::default())
}

pub fn compute_persistence_with(
    complex: &FilteredCubicalComplex,
    reduction: Reduction,
) -> Result<PersistenceDiagram, PersistenceError> {
    validate(complex)?;
    let cells = complex.cells();
    let n = cells.len();
    const NONE: u32 = u32::MAX;
    // pivot row -> column owning it
    let mut owner = vec![NONE; n];
    let mut reduced: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut scratch = Vec::new();

    let order: Vec<usize> = match reduction {
        Reduction::Standard => (0..n).collect(),
        Reduction::Clearing => (0..=2u8).rev().flat_map(|d| (0..n).filter(move |&j| cells[j].dim == d)).collect(),
    };
    for j in order {
        if cells[j].boundary.is_empty() {
            continue;
        }
        if reduction == Reduction::Clearing && owner[j] != NONE {
            // already a pivot row: its own column reduces to zero
            continue;
        }
        let mut col: Vec<u32> = cells[j].boundary.iter().map(|&b| b as u32).collect();
        while let Some(&low) = col.last() {
            let k = owner[low as usize];
            if k == NONE {
                owner[low as usize] = j as u32;
                break;
            }
            symmetric_difference(&col, &reduced[k as usize], &mut scratch);
            std::mem::swap(&mut col, &mut scratch);
        }
        reduced[j] = col;
    }

    let mut intervals = Vec::new();
    for (j, col) in reduced.iter().enumerate() {
        if let Some(&low) = col.last() {
            let (birth, death) = (&cells[low as usize], &cells[j]);
            if birth.value != death.value {
                intervals.push(Interval::new(birth.dim, birth.value as f64, death.value as f64));
            }
        } else if owner[j] == NONE {
            let c = &cells[j];
            if c.dim == 2 {
                return Err(PersistenceError::MalformedComplex(format!(
                    "square at position {j} creates a two-dimensional class"
                )));
            }
            intervals.push(Interval::essential(c.dim, c.value as f64));
        }
    }
    Ok(PersistenceDiagram::new(intervals))
}

fn symmetric_difference(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

fn validate(complex: &FilteredCubicalComplex) -> Result<(), PersistenceError> {
    let cells = complex.cells();
    for (pos, c) in cells.iter().enumerate() {
        let expected = match c.dim {
            0 => 0,
            1 => 2,
            2 => 4,
            d => return Err(PersistenceError::MalformedComplex(format!("cell {pos} has dimension {d}"))),
        };
        if c.boundary.len() != expected {
            return Err(PersistenceError::MalformedComplex(format!(
                "cell {pos} of dimension {} has {} faces",
                c.dim,
                c.boundary.len()
            )));
        }
        if c.boundary.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PersistenceError::MalformedComplex(format!("cell {pos} has unsorted faces")));
        }
        for &f in &c.boundary {
            let face = cells.get(f).filter(|_| f < pos).ok_or_else(|| {
                PersistenceError::MalformedComplex(format!("cell {pos} lists face {f} that does not precede it"))
            })?;
            if face.dim + 1 != c.dim || face.value > c.value {
                return Err(PersistenceError::MalformedComplex(format!(
                    "face {f} of cell {pos} has the wrong dimension or enters later"
                )));
            }
        }
    }
    Ok(())
}
