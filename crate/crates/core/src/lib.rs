//! Derived pure spinor superfields with exact arithmetic: supertranslation
//! algebras, Chevalley–Eilenberg cohomology, minimal resolutions, homotopy
//! transfer and the multiplet/invariants functors.

pub mod algebra;
pub mod functors;
pub mod golden;
pub mod graded;
pub mod module_io;
pub mod poly;
pub mod report;
pub mod resolution;
pub mod rmodule;
pub mod transfer;

pub use graded::{Bidegree, GradedSpace, Q};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("not lifted: {0}")]
    NotLifted(String),
    #[error("dg condition violated at generator {generator}: residual {residual}")]
    DgConditionViolated { generator: usize, residual: String },
    #[error("generator tables differ")]
    TableMismatch,
    #[error("generator `{0}` has non-positive weight")]
    NonPositiveWeightGenerator(String),
    #[error("structure constants are not symmetric: {0}")]
    AsymmetricStructureConstants(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("cutoff too small: {0}")]
    CutoffTooSmall(String),
    #[error("perturbation is not nilpotent: {0}")]
    NonNilpotentPerturbation(String),
    #[error("higher homotopy present: {0}")]
    HigherHomotopyPresent(String),
    #[error("module is not annihilated by the ideal: {0}")]
    NotAnnihilated(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("unknown preset or example `{0}`")]
    Unknown(String),
    #[error("io error: {0}")]
    Io(String),
}
