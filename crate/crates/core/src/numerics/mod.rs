//! Shared numerical kernels.
//!
//! Everything in here is a pure function of its inputs. Tolerances are always
//! passed explicitly by the caller; the `Default` impls of the option structs
//! only exist so call sites that do not care can stay short.

mod eigen;
mod fit;
mod krylov;
mod roots;
mod sparse;

pub use eigen::{eig_sym, eigvals_hermitian, von_neumann_entropy, SpectralDecomposition};
pub use fit::{fit_polynomial, PolyFit};
pub use krylov::{
    krylov_propagate, lanczos_ground, lanczos_ground_from, GroundState, KrylovOptions,
    LanczosOptions,
};
pub use roots::{find_root_1d, find_root_1d_bracketed, find_root_2d, RootBracket, Root2dOptions};
pub use sparse::CsrMatrix;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("matrix is not symmetric (max |a_ij - a_ji| = {max_asymmetry:e}, allowed {allowed:e})")]
    NotSymmetric { max_asymmetry: f64, allowed: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("Krylov breakdown: {0}")]
    KrylovBreakdown(&'static str),

    #[error("time step underflow: step {step:e} below minimum while tolerance {tol:e} unreachable")]
    StepUnderflow { step: f64, tol: f64 },

    #[error("invalid bracket [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    InvalidBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("degenerate design matrix (condition estimate {0:e})")]
    DegenerateDesign(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("negative eigenvalue {0:e} beyond tolerance")]
    NegativeEigenvalue(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Euclidean norm of a complex vector.
pub fn norm_c(v: &[num_complex::Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Euclidean norm of a real vector.
pub fn norm_r(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
