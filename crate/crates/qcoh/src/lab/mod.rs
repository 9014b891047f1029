//! Homological algebra over small finite commutative rings, computed by
//! exhaustive enumeration of module elements.

mod module;
mod predicates;
mod resolution;
mod ring;
mod tate;

use thiserror::Error;

pub use module::{length, minimal_generators, parse_module, span, Carrier, FinModule, Power, RMat, ENUM_LIMIT};
pub use predicates::{
    enumerate_universe, gorenstein_predicates, Condition, Dim, GorensteinReport, ModuleFacts, Predicates, Universe,
    UniverseSummary, Witness, RAW_LIMIT,
};
pub use resolution::{complete_resolution, presentation_resolution, proj_resolution, CompleteResolution, FreeComplex, Resolution};
pub use ring::{FiniteRing, Ideal, MAX_RING};
pub use tate::{
    am_sequence_check, ext_dim, gext_dim, tate_ext_dim, tate_ext_dim_injective, tate_table, AmReport, AmRow, TateTable,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("ring axiom violated: {0}")]
    Axiom(String),
    #[error("too large: {0}")]
    TooLarge(String),
    #[error("ring {0} is not self-injective")]
    NotSelfInjective(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("enumeration bound exceeded: {count} presentations, limit {limit}")]
    BoundExceeded { count: u128, limit: u128 },
    #[error("certificate failed: {0}")]
    Certificate(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
