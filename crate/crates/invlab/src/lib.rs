//! Inversion statistics for random labelled trees.
//!
//! A rooted labelled tree on `{1, …, n}` has an *inversion* for every pair
//! `(i, j)` with `i > j` such that `i` lies on the path from the root to `j`.
//! Tree families are weighted by a degree-weight sequence `φ_ℓ ≥ 0`: a tree in
//! which some vertex has `ℓ` children picks up a factor `φ_ℓ` for that vertex,
//! and all statistics are taken under the induced probability on trees of a
//! fixed size. The built-in weight sequences cover binary, plane (ordered),
//! Cayley (unordered) and cycle-pointed ("cyclic") trees; arbitrary finite
//! rational weight lists are accepted as custom families.
//!
//! The crate computes, for such a family:
//!
//! * exact generating series for tree counts and inversion counts
//!   ([`series`], [`invpoly`]),
//! * the exact distribution and moments of the number of inversions induced
//!   by a single label ([`localdist`]),
//! * the limiting laws those statistics converge to — an Airy-type law for the
//!   total, Rayleigh and discrete-Rayleigh laws locally ([`limitlaws`]),
//! * random samplers and Monte Carlo summaries that can be checked against
//!   the exact and asymptotic answers ([`sampler`]),
//! * a brute-force enumerator used as the ground-truth oracle in the test
//!   suite ([`enumerate`]).
//!
//! Exact computations run over arbitrary-precision rationals; every series
//! routine is generic over the coefficient field, and an `f64` backend covers
//! size ranges where exact arithmetic is too expensive.

#![forbid(unsafe_code)]

pub mod coeff;
pub mod family;
pub mod series;
pub mod biseries;
pub mod invpoly;
pub mod localdist;
pub mod enumerate;
pub mod limitlaws;
pub mod sampler;
pub mod verify;

pub use coeff::{Coeff, Rat};
pub use family::{DegreeWeightSequence, FamilyConstants};

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown family `{0}` (expected binary, ordered, unordered, cyclic, or a JSON file)")]
    UnknownFamily(String),

    #[error("family `{name}` is not admissible: {reason}")]
    NotAdmissible { name: String, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("size {requested} exceeds the enumeration cap {cap}")]
    SizeCap { requested: u64, cap: u64 },

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("rejection sampler gave up after {attempts} attempts (size {n} may be unreachable: sizes must satisfy n ≡ 1 mod {d})")]
    RejectionCap { attempts: u64, n: u64, d: u64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
