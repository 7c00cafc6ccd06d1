use std::fmt;

use thiserror::Error;

/// One violated field invariant found while validating an instance.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonFinite { field: &'static str },
    InterceptNotAboveCost { alpha: f64, c_bar: f64 },
    NonPositivePhi { phi: f64 },
    EmptyProfile,
    ThetaOutOfRange { firm: usize, theta: f64 },
    LengthMismatch { expected: usize, found: usize },
    RhoOutOfRange { rho: f64 },
    FractionalHighCount { n: usize, rho: f64 },
    ThetaLowOutOfRange { theta_low: f64 },
    TooFewFirms { n: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite { field } => write!(f, "{field} is not finite"),
            Violation::InterceptNotAboveCost { alpha, c_bar } => {
                write!(f, "alpha ({alpha}) must exceed c_bar ({c_bar})")
            }
            Violation::NonPositivePhi { phi } => write!(f, "phi ({phi}) must be positive"),
            Violation::EmptyProfile => write!(f, "productivity profile is empty"),
            Violation::ThetaOutOfRange { firm, theta } => {
                write!(f, "theta[{firm}] = {theta} outside [1e-6, 1]")
            }
            Violation::LengthMismatch { expected, found } => {
                write!(f, "expected {expected} firms, found {found}")
            }
            Violation::RhoOutOfRange { rho } => write!(f, "rho ({rho}) outside [0, 1]"),
            Violation::FractionalHighCount { n, rho } => {
                write!(f, "rho * n = {rho} * {n} is not an integer")
            }
            Violation::ThetaLowOutOfRange { theta_low } => {
                write!(f, "theta_low ({theta_low}) outside [1e-6, 1]")
            }
            Violation::TooFewFirms { n } => write!(f, "need at least 2 firms, got {n}"),
        }
    }
}

/// Every invariant violated by an input, reported together.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid instance: ")?;
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for DomainError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Domain(#[from] DomainError),

    #[error("singular system: pivot {pivot:e} below threshold {threshold:e}")]
    SingularSystem { pivot: f64, threshold: f64 },

    #[error("non-positive effort {value:e} for firm {firm} (phi below the safe regime?)")]
    NonPositiveEffort { firm: usize, value: f64 },

    #[error("best-response iteration did not converge after {iterations} iterations (last step {last_step:e})")]
    NoConvergence { iterations: usize, last_step: f64 },

    #[error("profit cross-check failed for firm {firm}: {direct} vs {from_efforts}")]
    ProfitCrossCheckFailed {
        firm: usize,
        direct: f64,
        from_efforts: f64,
    },

    #[error("firms {i} and {j} do not hold symmetric positions")]
    NotSymmetric { i: usize, j: usize },

    #[error("{what} out of range: {value} (max {max})")]
    OutOfRange {
        what: &'static str,
        value: usize,
        max: usize,
    },

    #[error("enumeration over {pairs} firm pairs exceeds the guard of {limit}")]
    TooLarge { pairs: usize, limit: usize },

    #[error("deviation ratio does not change sign on ({lo}, {hi}): R(lo) = {r_lo}, R(hi) = {r_hi}")]
    BracketFailure {
        lo: f64,
        hi: f64,
        r_lo: f64,
        r_hi: f64,
    },

    #[error("network has {network} firms but the profile has {profile}")]
    SizeMismatch { network: usize, profile: usize },

    #[error("firm pair ({i}, {j}) must be two distinct firms")]
    SamePair { i: usize, j: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
