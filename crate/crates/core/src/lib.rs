//! Uncertainty regions and state-independent uncertainty relations for qubit
//! observables.
//!
//! A qubit observable is parameterized as `A = a0*I + a.sigma` by a scalar
//! offset and a real 3-vector. This crate computes, for families of such
//! observables:
//!
//! - the attainable region of uncertainty tuples `(dA_1, ..., dA_n)` over all
//!   qubit states, with membership tests, boundary sampling, areas and Monte
//!   Carlo volumes ([`regions`]);
//! - tight state-independent lower bounds for sums of variances and standard
//!   deviations, together with brute-force verification oracles ([`bounds`]);
//! - closed-form probability densities of mean values and uncertainties when
//!   the state is drawn from the partial-trace (Hilbert-Schmidt) ensemble
//!   ([`densities`]), plus the samplers themselves ([`states`]);
//! - variance-based entanglement-detection criteria for bipartite and
//!   tripartite systems built from composite observables ([`witness`]).
//!
//! The `quncert` binary exposes all of it as subcommands emitting CSV or
//! JSON; see [`cli`].

#![forbid(unsafe_code)]
// Index loops mirror the matrix formulas they implement.
#![allow(clippy::needless_range_loop)]

pub mod bounds;
pub mod cli;
pub mod densities;
pub mod numeric;
pub mod observables;
pub mod regions;
pub mod states;
pub mod stats;
pub mod witness;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An observable with a zero Bloch vector was passed to an operation
    /// that divides by its length.
    #[error("degenerate observable: zero Bloch vector")]
    DegenerateObservable,
    /// A family had lower rank than the operation requires.
    #[error("linearly dependent family: rank {rank}, need {need}")]
    LinearlyDependentFamily { rank: usize, need: usize },
    /// A region coordinate fell outside its axis box `[0, |a_k|]`.
    #[error("coordinate {index} = {value} outside [0, {limit}]")]
    OutOfBox {
        index: usize,
        value: f64,
        limit: f64,
    },
    /// The angles of a triple violate the tetrahedral constraints.
    #[error("triple angles violate the tetrahedral constraints")]
    AngleConstraintViolated,
    /// An argument fell outside the documented domain.
    #[error("domain error: {0}")]
    DomainError(String),
    /// Composite observables and states disagree on the number of sites.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A dense state file failed to parse or validate.
    #[error("state file error: {0}")]
    StateFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
