//! Smooth projective toric varieties as polynomial generators of the
//! complex cobordism ring.
//!
//! The crate builds the lattice fans involved, computes their Milnor genera
//! independently by fixed-point localization ([`chow`]), evaluates the
//! closed-form genus formulas ([`genus`]), assembles certified construction
//! plans per dimension ([`construct`]) and sweeps the coprimality conjecture
//! that covers the remaining even dimensions ([`sweep`]).

pub mod chow;
pub mod construct;
pub mod error;
pub mod fan;
pub mod genus;
mod linalg;
pub mod numtheory;
pub mod sweep;

pub use error::{Error, Result};
pub use fan::{ConeRef, FamilyParams, Fan, LatticeVector};
