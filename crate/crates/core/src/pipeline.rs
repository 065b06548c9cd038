//! End-to-end pipelines: threshold a grayscale image at several levels, build
//! a morphological filtration of each binary image, and collect diagrams.

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::cubical::build_complex;
use crate::diagram::{bottleneck_distance, close_essential, normalize, DiagramError};
use crate::filtration::{mm_filtration, sublevel_filtration, FiltrationError, FiltrationKind, FiltrationSpec};
use crate::image::{threshold, BinaryImage, GrayscaleImage};
use crate::persistence::{compute_persistence, PersistenceDiagram, PersistenceError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Filtration(#[from] FiltrationError),
    #[error(transparent)]
    Persistence(#[from] PersistenceError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivisorPolicy {
    /// Raw filtration values.
    None,
    /// Number of non-cap stages for morphological filtrations (`n + 1`, or
    /// `2n + 1` for combined ones); the image maximum for sublevel filtrations.
    Auto,
    Explicit(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub thresholds: Vec<u32>,
    pub spec: FiltrationSpec,
    pub divisor: DivisorPolicy,
    pub dims: Vec<u8>,
}

impl PipelineConfig {
    pub fn new(thresholds: Vec<u32>, spec: FiltrationSpec) -> Self {
        PipelineConfig { thresholds, spec, divisor: DivisorPolicy::Auto, dims: vec![0, 1] }
    }

    pub fn validate(&self, max_value: u32) -> Result<(), PipelineError> {
        if self.thresholds.is_empty() {
            return Err(PipelineError::InvalidConfig("no thresholds".into()));
        }
        if self.thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PipelineError::InvalidConfig("thresholds must be strictly increasing".into()));
        }
        if let Some(t) = self.thresholds.iter().find(|&&t| t > max_value) {
            return Err(PipelineError::InvalidConfig(format!("threshold {t} exceeds max value {max_value}")));
        }
        if !self.spec.kind.is_morphological() {
            return Err(PipelineError::InvalidConfig(format!("{} is not a morphological filtration", self.spec.kind)));
        }
        if self.dims.is_empty() || self.dims.iter().any(|&d| d > 1) {
            return Err(PipelineError::InvalidConfig("dims must be a nonempty subset of {0, 1}".into()));
        }
        Ok(())
    }
}

/// Divisor mapping a morphological diagram into `[0, 1]`: the cap level.
pub fn auto_divisor(spec: &FiltrationSpec) -> f64 {
    let n = spec.se_count() as f64;
    match spec.kind {
        FiltrationKind::CombinedErosionDilation | FiltrationKind::CombinedOpeningClosing => 2.0 * n + 1.0,
        _ => n + 1.0,
    }
}

/// Raw diagram of a morphological filtration of `f`.
///
/// Without a cap the last stage is the final space; loops still alive there
/// are reported as dying at that last level instead of as essential classes.
pub fn mm_diagram(f: &BinaryImage, spec: &FiltrationSpec) -> Result<PersistenceDiagram, PipelineError> {
    let grid = mm_filtration(f, spec)?;
    let pd = compute_persistence(&build_complex(&grid))?;
    Ok(if spec.cap_all_black { pd } else { close_essential(&pd, 1, grid.max_level() as f64) })
}

/// Raw diagram of the sublevel-set filtration.
pub fn sublevel_diagram(f: &GrayscaleImage) -> Result<PersistenceDiagram, PipelineError> {
    Ok(compute_persistence(&build_complex(&sublevel_filtration(f)))?)
}

fn apply_divisor(pd: PersistenceDiagram, policy: DivisorPolicy, auto: f64) -> Result<PersistenceDiagram, PipelineError> {
    Ok(match policy {
        DivisorPolicy::None => pd,
        DivisorPolicy::Auto => normalize(&pd, auto)?,
        DivisorPolicy::Explicit(d) => normalize(&pd, d)?,
    })
}

/// Sublevel diagram, normalized by the image maximum under `Auto`.
pub fn sublevel_normalized(f: &GrayscaleImage, policy: DivisorPolicy) -> Result<PersistenceDiagram, PipelineError> {
    apply_divisor(sublevel_diagram(f)?, policy, f.max_value() as f64)
}

/// One diagram per threshold, in threshold order. Thresholds are processed
/// in parallel; the output does not depend on scheduling.
pub fn pipeline_grayscale(
    f: &GrayscaleImage,
    cfg: &PipelineConfig,
) -> Result<Vec<(u32, PersistenceDiagram)>, PipelineError> {
    cfg.validate(f.max_value())?;
    let auto = auto_divisor(&cfg.spec);
    cfg.thresholds
        .par_iter()
        .map(|&t| {
            let pd = mm_diagram(&threshold(f, t), &cfg.spec)?;
            let pd = apply_divisor(pd, cfg.divisor, auto)?;
            Ok((t, pd.restrict_dims(&cfg.dims)))
        })
        .collect()
}

/// Per-threshold distances between two pipeline runs over the same thresholds.
pub fn pairwise_distances(
    a: &[(u32, PersistenceDiagram)],
    b: &[(u32, PersistenceDiagram)],
    dim: u8,
) -> Result<Vec<f64>, PipelineError> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.0 != y.0) {
        return Err(PipelineError::InvalidConfig("runs use different thresholds".into()));
    }
    a.par_iter().zip(b).map(|(x, y)| Ok(bottleneck_distance(&x.1, &y.1, dim)?)).collect()
}

/// CSV with columns `threshold,dim,count,max_lifespan`, plus `distance` when
/// a comparison run is supplied.
pub fn summary_csv(
    runs: &[(u32, PersistenceDiagram)],
    dims: &[u8],
    compare: Option<&[(u32, PersistenceDiagram)]>,
) -> Result<String, PipelineError> {
    let mut out = String::from("threshold,dim,count,max_lifespan");
    if compare.is_some() {
        out.push_str(",distance");
    }
    out.push('\n');
    let distances: Vec<Vec<f64>> = match compare {
        Some(other) => dims.iter().map(|&d| pairwise_distances(runs, other, d)).collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    for (k, (t, pd)) in runs.iter().enumerate() {
        for (di, &d) in dims.iter().enumerate() {
            let count = pd.in_dim(d).count();
            let max_life = pd.in_dim(d).map(|i| i.lifespan()).fold(0.0f64, f64::max);
            let _ = write!(out, "{t},{d},{count},{max_life}");
            if let Some(row) = distances.get(di) {
                let _ = write!(out, ",{}", row[k]);
            }
            out.push('\n');
        }
    }
    Ok(out)
}
