//! Infinitesimal rigidity of periodic bar-joint frameworks.
//!
//! A framework is a motif of vertex and edge classes repeated by a period
//! lattice `Z`. This crate builds the periodic rigidity matrix `R` and the
//! lattice block `X`, counts flexes, self-stresses and rigid motions for any
//! admissible space `E` of lattice velocities, and repeats the count for
//! space-group elements acting on the motif.
//!
//! Everything is generic over the scalar type; [`Framework`] and friends fix
//! it to `f64`.

pub mod builtins;
pub mod cli;
pub mod error;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod rigidity;
pub mod scalar;
pub mod symmetry;

pub use builtins::{builtin_framework, BUILTIN_NAMES};
pub use error::{Error, Result};
pub use io::{
    analyze, emit_report, parse_framework, render_svg, serialize_framework, AnalysisReport,
};
pub use lattice::{
    Cell, CellRange, CrystalFramework, EdgeGeometry, Endpoint, Fragment, MotifEdge, MotifVertex,
    PeriodLattice, ValidationReport, Violation,
};
pub use linalg::{RankEvidence, SubspaceBasis};
pub use rigidity::{
    analyze_counts, edge_deviation, is_affinely_rigid, AffineRigidity, AffineVelocity, CountReport,
    MatrixSpace, RigidityMatrices, SpaceKind,
};
pub use scalar::Scalar;
pub use symmetry::{
    character_row, commutant_basis, fixed_space, flexibility_predictor, representation_matrices,
    symmetry_counts, verify_symmetry_equation, CharacterRow, RepresentationMatrices,
    SymmetryCountReport, SymmetryElement,
};

pub type Framework = CrystalFramework<f64>;
pub type Framework32 = CrystalFramework<f32>;
pub type Lattice = PeriodLattice<f64>;
pub type Symmetry = SymmetryElement<f64>;
pub type Velocity = AffineVelocity<f64>;
pub type Space = MatrixSpace<f64>;
