//! Decision and quantification of weighted iterated Hardy-type inequalities.
//!
//! Given piecewise-power weights `u`, `v`, `w` on `(0, inf)` and exponents
//! `q`, `r`, this crate evaluates the criterion functionals whose finiteness
//! decides the inequality, aggregates them into a best-constant estimate, and
//! cross-validates the two-sided equivalences against an independent
//! brute-force extremal-function oracle built from atomic test functions.
//!
//! Modules:
//! - [`weightfn`]: exact algebra for piecewise power functions (evaluation,
//!   integration, essential extrema, monotone envelopes, cumulative inversion).
//! - [`quad`]: adaptive outer quadrature on `(0, inf)` and the sup-engine for
//!   non-monotone products.
//! - [`criteria`]: the criterion functionals and their aggregation.
//! - [`discretization`]: dyadic covering sequences, block decompositions and
//!   discrete sequence-space machinery.
//! - [`oracle`]: exact evaluation of the inequality on atomic test functions
//!   and optimization over atom positions and masses.
//! - [`spec_io`]: JSON problem descriptions and reports for the CLI.
//! - [`gen`]: seeded random instance generation for verification sweeps.

pub mod criteria;
pub mod discretization;
pub mod ext;
pub mod gen;
pub mod oracle;
pub mod quad;
pub mod spec_io;
pub mod weightfn;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument outside the operation's domain (`x <= 0`, `a > b`, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A function that does not satisfy the weight conditions where one is
    /// required.
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    /// An operation invoked in the wrong `q`/`r` regime.
    #[error("regime error: {0}")]
    Regime(String),
    /// A structural precondition violation (non-monotone minorant argument,
    /// non-geometric sequence, non-integrable kernel head, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
