use thiserror::Error;

use crate::lattice::ValidationReport;

/// Errors raised by framework construction and analysis.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid framework: {0}")]
    InvalidFramework(ValidationReport),

    #[error("vertex index {index} out of range (framework has {count} vertices)")]
    VertexIndex { index: usize, count: usize },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    Dimension {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("period vectors are linearly dependent (|det Z| = {det:e})")]
    SingularLattice { det: f64 },

    #[error("supercell multiplicities must be positive, got {0:?}")]
    Multiplicity(Vec<i64>),

    #[error("unknown built-in framework {0:?}")]
    UnknownBuiltin(String),

    #[error("matrix basis is linearly dependent")]
    DependentBasis,

    #[error("symmetry {name:?}: linear part is not orthogonal")]
    NotOrthogonal { name: String },

    #[error("symmetry {name:?}: lattice-incompatible (B Z is not Z times an integer matrix)")]
    LatticeIncompatible { name: String },

    #[error("symmetry {name:?}: not a symmetry ({detail})")]
    NotASymmetry { name: String, detail: String },

    #[error("symmetry {name:?} was resolved against a different framework")]
    Unresolved { name: String },

    #[error("matrix space is not invariant under conjugation by {name:?}")]
    NotInvariant { name: String },

    #[error("affine flow I - tA is singular at t = {t}")]
    SingularFlow { t: f64 },

    #[error("cell range is empty or has the wrong dimension")]
    EmptyRange,

    #[error("dimension ≠ 2: drawing needs a planar framework, got d = {d}")]
    NotPlanar { d: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
