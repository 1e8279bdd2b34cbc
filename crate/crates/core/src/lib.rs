//! Compositional data analysis: logratio transformations, variance
//! decompositions, ordinations, logratio selection, clustering of parts and
//! samples, and coherence diagnostics.

pub mod cluster;
pub mod compmat;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod ordination;
pub mod select;
pub mod svg;
pub mod transforms;
pub mod variance;

pub use compmat::{CompositionMatrix, Partition, RawCountMatrix, Weighting};
pub use error::{CodaError, Result};
pub use transforms::{ContrastTree, LogratioKind, LogratioMatrix};
pub use nalgebra;

/// Library version, as recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
