//! Diagram post-processing: normalization, bottleneck distance, death-value
//! histograms and the JSON file format.

use std::fmt::Write as _;

use serde::Deserialize;
use thiserror::Error;

use crate::matching::BipartiteMatcher;
use crate::persistence::{Interval, PersistenceDiagram};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagramError {
    #[error("divisor {divisor} is smaller than the largest finite value {max}")]
    DivisorTooSmall { divisor: f64, max: f64 },
    #[error("diagrams have different scales ({0} vs {1})")]
    ScaleMismatch(f64, f64),
    #[error("malformed diagram: {0}")]
    MalformedInput(String),
}

/// Divides every value by `divisor`. Infinite deaths become `1.0`: with a
/// capped filtration the divisor is the cap level where every class dies.
/// Intervals that collapse onto the diagonal in the process are dropped.
pub fn normalize(pd: &PersistenceDiagram, divisor: f64) -> Result<PersistenceDiagram, DiagramError> {
    let max = pd
        .intervals()
        .iter()
        .flat_map(|i| [i.birth, i.death])
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    if !(divisor > 0.0) || divisor < max {
        return Err(DiagramError::DivisorTooSmall { divisor, max });
    }
    let intervals = pd
        .intervals()
        .iter()
        .map(|i| {
            let death = if i.is_essential() { 1.0 } else { i.death / divisor };
            Interval::new(i.dim, i.birth / divisor, death)
        })
        .filter(|i| i.birth < i.death)
        .collect();
    Ok(PersistenceDiagram::with_scale(intervals, pd.scale() * divisor))
}

/// Gives essential `dim`-classes a finite death at `level`; classes born at
/// or after `level` would be zero-length and are dropped.
pub fn close_essential(pd: &PersistenceDiagram, dim: u8, level: f64) -> PersistenceDiagram {
    let intervals = pd
        .intervals()
        .iter()
        .filter_map(|i| {
            if i.dim != dim || !i.is_essential() {
                Some(*i)
            } else {
                (i.birth < level).then(|| Interval::new(dim, i.birth, level))
            }
        })
        .collect();
    PersistenceDiagram::with_scale(intervals, pd.scale())
}

/// One side of a matched pair in a [`BottleneckResult`] witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MatchEnd {
    /// Index into the diagram's `intervals()`.
    Point(usize),
    Diagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BottleneckResult {
    /// `f64::INFINITY` when the diagrams have different numbers of essential
    /// classes in the dimension.
    pub distance: f64,
    /// Pairs `(end in a, end in b)`; each point of both diagrams occurs once.
    pub witness: Vec<(MatchEnd, MatchEnd)>,
}

fn linf(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn diagonal_cost(p: (f64, f64)) -> f64 {
    (p.1 - p.0) / 2.0
}

struct Split {
    finite: Vec<(usize, (f64, f64))>,
    /// `(birth, index)`, sorted
    essential: Vec<(f64, usize)>,
}

fn split(pd: &PersistenceDiagram, dim: u8) -> Split {
    let mut finite = Vec::new();
    let mut essential = Vec::new();
    for (idx, i) in pd.intervals().iter().enumerate().filter(|(_, i)| i.dim == dim) {
        if i.is_essential() {
            essential.push((i.birth, idx));
        } else {
            finite.push((idx, (i.birth, i.death)));
        }
    }
    essential.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Split { finite, essential }
}

/// Reduction of the finite part to bipartite perfect matching.
///
/// Left vertices: the points of `a`, then diagonal copies of the points of
/// `b`. Right vertices: the points of `b`, then diagonal copies of `a`. A
/// threshold `eps` is feasible iff the graph of admissible pairs has a
/// perfect matching.
struct FiniteProblem {
    a: Vec<(f64, f64)>,
    b: Vec<(f64, f64)>,
}

impl FiniteProblem {
    fn size(&self) -> usize {
        self.a.len() + self.b.len()
    }

    fn candidates(&self) -> Vec<f64> {
        let mut c = vec![0.0];
        for &p in &self.a {
            c.push(diagonal_cost(p));
            c.extend(self.b.iter().map(|&q| linf(p, q)));
        }
        c.extend(self.b.iter().map(|&q| diagonal_cost(q)));
        c.sort_by(f64::total_cmp);
        c.dedup();
        c
    }

    /// Adjacency lists with right vertices ascending.
    fn graph(&self, eps: f64) -> Vec<Vec<usize>> {
        let (m, k) = (self.a.len(), self.b.len());
        let mut adj = Vec::with_capacity(m + k);
        for (i, &p) in self.a.iter().enumerate() {
            let mut row: Vec<usize> = (0..k).filter(|&j| linf(p, self.b[j]) <= eps).collect();
            if diagonal_cost(p) <= eps {
                row.push(k + i);
            }
            adj.push(row);
        }
        for &q in &self.b {
            let mut row = Vec::with_capacity(m + 1);
            if diagonal_cost(q) <= eps {
                row.push(adj.len() - m);
            }
            row.extend(k..k + m);
            adj.push(row);
        }
        adj
    }

    fn feasible(&self, eps: f64) -> bool {
        BipartiteMatcher::new(self.size(), self.size(), self.graph(eps)).max_matching().size() == self.size()
    }

    /// Smallest candidate admitting a perfect matching.
    fn optimal(&self) -> f64 {
        if self.size() == 0 {
            return 0.0;
        }
        let c = self.candidates();
        // the largest candidate dominates every diagonal cost, so it is feasible
        let (mut lo, mut hi) = (0usize, c.len() - 1);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.feasible(c[mid]) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        debug_assert!(self.feasible(c[lo]));
        debug_assert!(lo == 0 || !self.feasible(c[lo - 1]), "feasibility must be monotone in eps");
        c[lo]
    }
}

fn check_scales(a: &PersistenceDiagram, b: &PersistenceDiagram) -> Result<(), DiagramError> {
    if a.scale() != b.scale() {
        return Err(DiagramError::ScaleMismatch(a.scale(), b.scale()));
    }
    Ok(())
}

fn essential_cost(ea: &[(f64, usize)], eb: &[(f64, usize)]) -> f64 {
    if ea.len() != eb.len() {
        return f64::INFINITY;
    }
    ea.iter().zip(eb).map(|(x, y)| (x.0 - y.0).abs()).fold(0.0, f64::max)
}

/// Bottleneck distance restricted to dimension `dim`, without the witness.
pub fn bottleneck_distance(a: &PersistenceDiagram, b: &PersistenceDiagram, dim: u8) -> Result<f64, DiagramError> {
    check_scales(a, b)?;
    let (sa, sb) = (split(a, dim), split(b, dim));
    let problem = FiniteProblem {
        a: sa.finite.iter().map(|p| p.1).collect(),
        b: sb.finite.iter().map(|p| p.1).collect(),
    };
    Ok(problem.optimal().max(essential_cost(&sa.essential, &sb.essential)))
}

/// Exact bottleneck distance in dimension `dim` with an optimal matching.
///
/// The finite part is solved by binary search over all candidate costs (pair
/// distances in the sup norm and half-lifespans) with a perfect-matching
/// feasibility test. Essential classes are matched by sorted birth. The
/// witness is the lexicographically smallest optimal matching of the
/// reduction graph described on [`FiniteProblem`], listed in that vertex
/// order; diagonal-to-diagonal pairs are omitted.
pub fn bottleneck(a: &PersistenceDiagram, b: &PersistenceDiagram, dim: u8) -> Result<BottleneckResult, DiagramError> {
    check_scales(a, b)?;
    let (sa, sb) = (split(a, dim), split(b, dim));
    let problem = FiniteProblem {
        a: sa.finite.iter().map(|p| p.1).collect(),
        b: sb.finite.iter().map(|p| p.1).collect(),
    };
    let finite = problem.optimal();
    let (m, k) = (problem.a.len(), problem.b.len());
    let mut witness = Vec::with_capacity(m + k);
    if problem.size() > 0 {
        let mut matcher = BipartiteMatcher::new(m + k, m + k, problem.graph(finite));
        let matching = matcher.lexicographically_smallest_perfect().expect("optimal threshold is feasible");
        for (left, &right) in matching.iter().enumerate() {
            let end_a = if left < m { MatchEnd::Point(sa.finite[left].0) } else { MatchEnd::Diagonal };
            let end_b = if right < k { MatchEnd::Point(sb.finite[right].0) } else { MatchEnd::Diagonal };
            if end_a != MatchEnd::Diagonal || end_b != MatchEnd::Diagonal {
                witness.push((end_a, end_b));
            }
        }
    }
    let n = sa.essential.len().max(sb.essential.len());
    for i in 0..n {
        let ea = sa.essential.get(i).map_or(MatchEnd::Diagonal, |e| MatchEnd::Point(e.1));
        let eb = sb.essential.get(i).map_or(MatchEnd::Diagonal, |e| MatchEnd::Point(e.1));
        witness.push((ea, eb));
    }
    let distance = finite.max(essential_cost(&sa.essential, &sb.essential));
    Ok(BottleneckResult { distance, witness })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeathHistogram {
    pub bin_width: f64,
    /// `(lower edge, count)` for consecutive bins from the lowest occupied
    /// bin to the highest; empty bins in between are kept.
    pub bins: Vec<(f64, usize)>,
    /// Essential classes, which have no finite death.
    pub infinite: usize,
}

/// Bins finite deaths of `dim` into `[k * w, (k + 1) * w)`.
pub fn death_histogram(pd: &PersistenceDiagram, dim: u8, bin_width: f64) -> DeathHistogram {
    assert!(bin_width > 0.0, "bin width must be positive");
    let mut infinite = 0;
    let mut keys = Vec::new();
    for i in pd.in_dim(dim) {
        if i.is_essential() {
            infinite += 1;
        } else {
            keys.push((i.death / bin_width).floor() as i64);
        }
    }
    let bins = match (keys.iter().min(), keys.iter().max()) {
        (Some(&lo), Some(&hi)) => {
            let mut counts = vec![0usize; (hi - lo + 1) as usize];
            for k in &keys {
                counts[(k - lo) as usize] += 1;
            }
            counts.into_iter().enumerate().map(|(i, c)| ((lo + i as i64) as f64 * bin_width, c)).collect()
        }
        _ => Vec::new(),
    };
    DeathHistogram { bin_width, bins, infinite }
}

fn fmt_number(v: f64) -> String {
    if v.is_infinite() {
        "\"inf\"".to_string()
    } else {
        format!("{v}")
    }
}

/// Canonical JSON: fixed field order, one interval per line, intervals in
/// `(dim, birth, death)` order, infinite deaths written as `"inf"`.
pub fn serialize_pd(pd: &PersistenceDiagram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{\n  \"scale\": {},", fmt_number(pd.scale()));
    if pd.is_empty() {
        out.push_str("  \"intervals\": []\n}\n");
        return out;
    }
    out.push_str("  \"intervals\": [\n");
    let n = pd.len();
    for (k, i) in pd.intervals().iter().enumerate() {
        let _ = write!(
            out,
            "    {{\"dim\": {}, \"birth\": {}, \"death\": {}}}",
            i.dim,
            fmt_number(i.birth),
            fmt_number(i.death)
        );
        out.push_str(if k + 1 < n { ",\n" } else { "\n" });
    }
    out.push_str("  ]\n}\n");
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PdDocument {
    scale: f64,
    intervals: Vec<IntervalRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IntervalRecord {
    dim: u8,
    birth: f64,
    death: DeathField,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DeathField {
    Finite(f64),
    Text(String),
}

pub fn parse_pd(text: &str) -> Result<PersistenceDiagram, DiagramError> {
    let doc: PdDocument = serde_json::from_str(text).map_err(|e| DiagramError::MalformedInput(e.to_string()))?;
    if !(doc.scale > 0.0) || !doc.scale.is_finite() {
        return Err(DiagramError::MalformedInput(format!("invalid scale {}", doc.scale)));
    }
    let mut intervals = Vec::with_capacity(doc.intervals.len());
    for (k, r) in doc.intervals.into_iter().enumerate() {
        let death = match r.death {
            DeathField::Finite(d) => d,
            DeathField::Text(s) if s == "inf" => f64::INFINITY,
            DeathField::Text(s) => return Err(DiagramError::MalformedInput(format!("interval {k}: bad death {s:?}"))),
        };
        if r.dim > 1 {
            return Err(DiagramError::MalformedInput(format!("interval {k}: dimension {} not in {{0, 1}}", r.dim)));
        }
        if !(r.birth < death) || !r.birth.is_finite() {
            return Err(DiagramError::MalformedInput(format!("interval {k}: birth must be finite and below death")));
        }
        intervals.push(Interval::new(r.dim, r.birth, death));
    }
    Ok(PersistenceDiagram::with_scale(intervals, doc.scale))
}
