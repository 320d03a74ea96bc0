//! Exact-arithmetic machinery for the boundary combinatorics of Hilbert
//! modular surfaces: totally real quadratic fields, fractional ideals,
//! rational polyhedral cones and unit-invariant cusp fans, cusp data for
//! congruence subgroups, trace-truncated q-expansions and theta series,
//! Hilbert-Jacobi coefficient lattices, Hodge-Tate weight combinatorics,
//! and Voronoi-Delaunay polarized fans over a cusp fan.
//!
//! Everything is computed over exact rationals; no floating point enters
//! any decision path. Operations are pure and all random searches take
//! explicit seeds, so every result is reproducible bit for bit.

pub mod cones;
pub mod cusps;
pub mod fans;
pub mod field;
pub mod hodge;
pub mod ideals;
pub mod jacobi;
pub mod pipeline;
pub mod qexp;
pub mod rat;
pub mod vdfan;
pub mod wire;

pub use field::{FieldElement, QuadField};
pub use ideals::FractionalIdeal;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unsupported degree {0}: full algorithms are implemented for d = 2 only")]
    UnsupportedDegree(usize),
    #[error("invalid field descriptor: {0}")]
    InvalidField(String),
    #[error("invalid ideal: {0}")]
    InvalidIdeal(String),
    #[error("invalid cone: {0}")]
    InvalidCone(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("enumeration bound exceeded: {0}")]
    BoundExceeded(String),
    #[error("point not covered by the fan")]
    NotCovered,
    #[error("vector lies outside the closed cone")]
    OutsideCone,
    #[error("support violation: {0}")]
    SupportViolation(String),
    #[error("membership violation: {0}")]
    MembershipViolation(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
