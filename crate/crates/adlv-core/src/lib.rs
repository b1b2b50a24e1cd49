//! Combinatorics and lattice models for affine Deligne-Lusztig varieties of
//! `GL_h` with superbasic Frobenius twist.
//!
//! For coprime `(m, h)` the isocrystal of slope `m/h` is simple; the variety
//! `X_μ(b)⁰` decomposes into locally closed strata indexed by *extended
//! semi-modules* `(A, φ)`, and each stratum has dimension `|𝒱(A, φ)|`. This
//! crate provides:
//!
//! * exact integer combinatorics of semi-modules, types and the dominance
//!   order ([`semimodule`], [`coweight`]),
//! * construction, validation and exhaustive enumeration of extended
//!   semi-modules together with their pair sets `𝒱` ([`extended`]),
//! * a sweep driver that computes `dim X_μ(b)⁰ = max |𝒱|`, checks it against
//!   the closed dimension formula `d(b, μ)` and reports the top-dimensional
//!   strata ([`verifier`]),
//! * an independent finite-precision lattice oracle over `F_{q^n}((t))`
//!   realizing the strata parametrization explicitly ([`lattice`], [`field`]).
//!
//! Everything is exact; no floating point is used anywhere. The crate is
//! `no_std` (with `alloc`); IO, serialization and the command line front end
//! live in the companion crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod coweight;
pub mod error;
pub mod extended;
pub mod field;
pub mod lattice;
pub mod semimodule;
pub mod verifier;

pub use coweight::{preceq, preceq_int, Coweight, Rational};
pub use error::Error;
pub use extended::{
    enumerate_all_esm, enumerate_esm, find_decomposition, propdim_bijection, AxiomReport,
    AxiomViolation, Decomposition, EsmCandidate, ExtendedSemiModule, ReductionChain,
    ReductionMove, VSet,
};
pub use field::{FiniteField, Fq};
pub use lattice::{build_lattice, recover_point, special_point, Lattice, Point, TruncVector};
pub use semimodule::{all_types, d_formula, d_lattice, enumerate_types, SemiModule, Slope};
pub use verifier::{dimension, top_strata, verify_theorems, DimensionReport, SweepReport};
