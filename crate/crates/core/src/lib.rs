//! Persistent homology of 2D digital images under morphological filtrations
//! (erosion, dilation, opening, closing and their combinations) and the
//! sublevel-set filtration.
//!
//! The flow is: [`image`] rasters → [`filtration`] entry-time grids →
//! [`cubical`] complexes → [`persistence`] diagrams → [`diagram`]
//! normalization and bottleneck comparison. [`pipeline`] wires these together
//! for multi-threshold grayscale analysis and [`svg`] renders the results.

pub mod cubical;
pub mod demo;
pub mod diagram;
pub mod filtration;
pub mod image;
pub mod matching;
pub mod morphology;
pub mod persistence;
pub mod pipeline;
pub mod svg;

pub use cubical::{betti_oracle, build_complex, FilteredCubicalComplex};
pub use diagram::{bottleneck, bottleneck_distance, death_histogram, normalize, parse_pd, serialize_pd, BottleneckResult};
pub use filtration::{from_nested_sequence, mm_filtration, sublevel_filtration, EntryTimeGrid, FiltrationKind, FiltrationSpec, SeFamily};
pub use image::{BinaryImage, GrayscaleImage, Raster};
pub use morphology::{square_se, StructuringElement};
pub use persistence::{betti_at, compute_persistence, Interval, PersistenceDiagram};
