use std::fmt;

use thiserror::Error;

/// One violated density-matrix invariant, with the residual that was measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    WrongDimension { dim: usize },
    NonFinite,
    NotHermitian { residual: f64 },
    TraceNotOne { residual: f64 },
    NotPositiveSemidefinite { residual: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WrongDimension { dim } => write!(f, "matrix is {dim}x{dim}, expected 8x8"),
            Violation::NonFinite => write!(f, "matrix has non-finite entries"),
            Violation::NotHermitian { residual } => {
                write!(f, "not Hermitian (max |rho - rho^dag| = {residual:e})")
            }
            Violation::TraceNotOne { residual } => {
                write!(f, "trace is not one (|tr rho - 1| = {residual:e})")
            }
            Violation::NotPositiveSemidefinite { residual } => {
                write!(f, "not positive semidefinite (min eigenvalue = -{residual:e})")
            }
        }
    }
}

/// Every invariant a candidate density matrix failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationFailure {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid density matrix: ")?;
        for (n, v) in self.violations.iter().enumerate() {
            if n > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationFailure {}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Pauli index {0} outside 1..=3")]
    PauliIndex(usize),
    #[error("vector is not unit (norm {norm})")]
    NotUnit { norm: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("operator is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("pure state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error(transparent)]
    Validation(#[from] ValidationFailure),
    #[error("{name} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("matrix is not a proper rotation (residual {0:e})")]
    NotRotation(f64),
    #[error("grid is empty")]
    EmptyGrid,
    #[error("invalid optimizer configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
