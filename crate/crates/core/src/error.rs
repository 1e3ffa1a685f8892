//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while constructing or evaluating a model.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Polynomial degree beyond the configured cap.
    #[error("polynomial degree {requested} exceeds the maximum {max}")]
    DegreeTooLarge { requested: usize, max: usize },

    /// Evaluation left the range where f64 arithmetic stays finite.
    #[error("evaluation overflowed at x = {x}; safe range is |x| < {threshold:.3e}")]
    Range { x: f64, threshold: f64 },

    /// Generator function violates the monotonicity / single-node conditions.
    #[error("generator function inadmissible: {reason}")]
    Inadmissible { reason: String },

    /// The level gap of the construction must be strictly positive.
    #[error("epsilon must be > 0, got {0}")]
    NonPositiveEpsilon(f64),

    /// An integrand produced a non-finite sample.
    #[error("non-finite integrand sample at x = {x}")]
    NonFiniteIntegrand { x: f64 },

    /// Adaptive quadrature exhausted its subdivision depth.
    #[error(
        "quadrature did not converge: error estimate {achieved:.3e}, requested {requested:.3e}"
    )]
    QuadratureNoConvergence { achieved: f64, requested: f64 },

    /// Grid has too few points for the requested stencil.
    #[error("grid too coarse: {0} points (need at least 5)")]
    GridTooCoarse(usize),

    /// Potential sample is NaN or infinite at a given grid node.
    #[error("non-finite potential value at grid node {index} (x = {x})")]
    NonFinitePotential { index: usize, x: f64 },

    /// Inverse iteration failed to settle on an eigenvector.
    #[error("inverse iteration stagnated for eigenvalue index {index}")]
    InverseIterationStagnation { index: usize },

    /// An inner product was requested against a zero-norm function.
    #[error("zero-norm input")]
    ZeroNorm,

    /// Dual superpotential evaluated at one of its poles.
    #[error("dual superpotential singular at xi = {xi}")]
    DualSingularity { xi: f64 },

    /// Solution index not available for the chosen solvable base.
    #[error("unsupported solution index {k} for base {base}")]
    UnsupportedIndex { k: usize, base: String },

    /// Catch-all for violated preconditions on parameters.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
