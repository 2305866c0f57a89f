//! Many-site chains with free (Neumann) ends: a Gaussian covariance engine for
//! the harmonic chain and exact diagonalization for short rotor chains.
//!
//! Both report the entanglement across the cut after site `floor(N/2)`.

mod harmonic;
mod rotor;

pub use harmonic::{
    coupling_matrix, gaussian_entropy, ground_covariance, half_chain_entropy, neumann_modes,
    ChainParams, ChainQuench, CovarianceState, NeumannModes,
};
pub use rotor::{
    chain_index, chain_momenta, chain_total_momentum, rotor_chain_dynamics, rotor_chain_ground,
    rotor_chain_hamiltonian, RotorChainOptions, RotorChainParams, RotorChainRun, RotorChainState,
    MAX_CHAIN_DIM,
};

use thiserror::Error;

use crate::numerics::NumericsError;
use crate::rotor2::Rotor2Error;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Hilbert space dimension {dim} exceeds the budget of {max}")]
    DimensionBudget { dim: usize, max: usize },
    #[error("unphysical covariance matrix: symplectic eigenvalue {0} < 1/2")]
    Unphysical(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Rotor2(#[from] Rotor2Error),
}

pub type Result<T> = std::result::Result<T, ChainError>;
