//! Polynomial dimensional decomposition (PDD) surrogates of square-integrable
//! functions of independent random inputs, with concurrent computation of
//! statistical moments, probability distributions, failure probabilities, and
//! analytical design sensitivities via score functions, saddlepoint
//! approximation, and embedded Monte Carlo simulation.
//!
//! The crate is organized around the analysis pipeline:
//!
//! * [`distributions`] — input marginals, sampling, raw moments, and
//!   log-density derivative (score) kernels, plus design-variable bindings.
//! * [`orthopoly`] — measure-consistent orthonormal polynomial bases, Gauss
//!   quadrature rules, and triple-product expectations.
//! * [`pdd`] — term enumeration, coefficient estimation by dimension-reduction
//!   integration, surrogate evaluation, and exact first/second moments.
//! * [`moments`] — score-function Fourier expansions, analytical moment
//!   sensitivities, and higher-order moments (Options I and II).
//! * [`reliability`] — saddlepoint (CGF/Lugannani-Rice) and embedded Monte
//!   Carlo estimates of failure probabilities and their sensitivities.
//! * [`models`] — benchmark performance functions, including a small
//!   pin-jointed truss finite-element solver.

pub mod distributions;
pub mod exec;
pub mod models;
pub mod moments;
pub mod orthopoly;
pub mod pdd;
pub mod reliability;
pub mod special;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter for {kind}: {message}")]
    InvalidParameter { kind: &'static str, message: String },

    #[error("point {x} is outside the support of the {kind} marginal")]
    OutsideSupport { kind: &'static str, x: f64 },

    #[error("parameter role {role} is not defined for the {kind} marginal")]
    UnsupportedRole { kind: &'static str, role: &'static str },

    #[error("moment of order {order} is undefined for the {kind} marginal")]
    MomentUndefined { kind: &'static str, order: u32 },

    #[error("measure not positive-definite at requested degree {degree} (beta = {beta})")]
    MeasureNotPositiveDefinite { degree: usize, beta: f64 },

    #[error("tridiagonal eigen-iteration failed to converge within {sweeps} sweeps")]
    EigenNonConvergence { sweeps: usize },

    #[error("polynomial degree {degree} exceeds the recurrence table bound {m_max}")]
    DegreeExceedsTable { degree: usize, m_max: usize },

    #[error("quadrature order {n} exceeds the recurrence table bound {m_max}")]
    OrderExceedsTable { n: usize, m_max: usize },

    #[error("model evaluation failed at {point:?}: {message}")]
    ModelEvaluation { point: Vec<f64>, message: String },

    #[error("score expansion and surrogate were built on different bases (variable {variable})")]
    BasisMismatch { variable: usize },

    #[error(
        "saddlepoint infeasible: threshold {xi} outside attainable range ({lo}, {hi})"
    )]
    SaddlepointInfeasible { xi: f64, lo: f64, hi: f64 },

    #[error("degenerate response variance: kappa_2 = {kappa2}")]
    DegenerateVariance { kappa2: f64 },

    #[error("cumulant order {q} is not supported; saddlepoint brackets exist for Q <= 4 only")]
    CumulantOrderUnsupported { q: usize },

    #[error(
        "moment option I infeasible for r = {r}: {reason}; use option II instead"
    )]
    OptionIGuard { r: u32, reason: String },

    #[error("higher-moment order {r} exceeds the symbolic expansion cap 4; use option II")]
    HigherOrderCap { r: u32 },

    #[error("saddlepoint approximation does not support system events; use Monte Carlo")]
    SpaSystemEvent,

    #[error("unknown builtin model `{0}`")]
    UnknownModel(String),

    #[error("truss solve failed: {0}")]
    Truss(String),

    #[error("invalid configuration at {field}: {message}")]
    Config { field: String, message: String },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
