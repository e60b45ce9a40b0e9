//! Cubical chains on rectangles and doubles of rectangles, with constructive
//! filling algorithms carrying certified directional-volume bounds, an L1
//! minimal-filling oracle, transverse intersection / linking numbers, and
//! combinatorial linked-tube constructions with extremal linking invariants.

pub mod bounds;
pub mod chain;
pub mod constructions;
pub mod experiment;
pub mod filler;
pub mod generators;
pub mod oracle;

pub use chain::{Chain, DirectionSet, DoubleGeometry, GridCell, Hemisphere, Lattice, RectGeometry, Space, VolumeVector};

/// Crate-wide error type. Precondition violations are reported as errors;
/// violations of internal invariants panic (they are bugs, not inputs).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("chains live on different spaces")]
    SpaceMismatch,
    #[error("cross-lattice operation rejected")]
    LatticeMismatch,
    #[error("chain is not a cycle: boundary has {count} cells, e.g. {example}")]
    NotACycle { count: usize, example: String },
    #[error("chain is not a relative cycle: boundary leaves the wall at {count} cells, e.g. {example}")]
    NotARelativeCycle { count: usize, example: String },
    #[error("cycle is not a boundary")]
    NotABoundary,
    #[error("instance over budget: {size} {unit} exceeds limit {limit}")]
    OverBudget { size: usize, unit: &'static str, limit: usize },
    #[error("LP infeasible")]
    Infeasible,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
