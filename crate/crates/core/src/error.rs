use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Standing hypotheses on the boundary data of the perturbed equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// `f(t,u) >= 0`.
    C4,
    /// Nonnegativity of the kernel functionals `K_A`, `K_B`.
    C5,
    /// `0 <= alpha[gamma] < 1`, `beta[gamma] >= 0`, `gamma >= c2 ||gamma||` on `[a,b]`.
    C6,
    /// `0 <= beta[delta] < 1`, `alpha[delta] >= 0`, `delta >= c3 ||delta||` on `[a,b]`.
    C7,
    /// `D > 0`.
    C8,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::C4 => "C4",
            Condition::C5 => "C5",
            Condition::C6 => "C6",
            Condition::C7 => "C7",
            Condition::C8 => "C8",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("interval [{a}, {b}] is not inside the positivity strip ({lo}, {hi})")]
    StripViolation { a: f64, b: f64, lo: f64, hi: f64 },

    #[error("adaptive quadrature on [{lo}, {hi}] did not reach tolerance (estimated error {error:e})")]
    QuadratureFailure { lo: f64, hi: f64, error: f64 },

    #[error("root finding failed: {0}")]
    RootFindFailure(String),

    #[error("condition {condition} violated: {detail}")]
    ConditionViolation { condition: Condition, detail: String },

    #[error("singular 2x2 matrix (determinant {det:e})")]
    SingularMatrix { det: f64 },

    #[error("integral of k_S g over [a,b] is not positive at t = {t} (value {value:e})")]
    NonpositiveInfimum { t: f64, value: f64 },

    #[error("denominator of the negative/positive part ratio vanishes at t = {t}")]
    DivisionByZeroRegion { t: f64 },

    #[error("power iteration did not converge after {iterations} iterations")]
    ConvergenceFailure { iterations: usize },

    #[error("envelope unavailable: {0}")]
    EnvelopeUnavailable(String),

    #[error("ordering violation: {0}")]
    OrderingViolation(String),

    #[error("the eigenvalue criteria require positive measures: {0}")]
    PositivityRequired(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
