use thiserror::Error;

/// Errors raised by constructors and operations.
///
/// Law violations are never errors: they are reported through
/// [`LawReport`](crate::report::LawReport). An `Error` means the input does
/// not describe the object it claims to (dangling ids, wrong shapes,
/// marginals that do not match), so no law can be evaluated.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed structure: dangling ids, partial tables, shape mismatches.
    #[error("structural error: {0}")]
    Structural(String),

    /// A value breaks a type invariant (negative mass, rows not summing to one, ...).
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// Couplings whose middle marginals differ.
    #[error("composition error: {0}")]
    Composition(String),

    /// The first marginal of a coupling is not the pushforward of the anchor.
    #[error("marginal precondition: {0}")]
    LiftingPrecondition(String),

    /// Source and target measures carry different total mass.
    #[error("infeasible transport problem: {0}")]
    Infeasible(String),

    /// Argument outside its documented domain (e.g. `k < 1`).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The brute-force oracle refuses instances that are too large.
    #[error("instance too large for brute force: {0}")]
    TooLarge(String),

    /// Malformed input file.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
