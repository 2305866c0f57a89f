use nalgebra::DMatrix;

use super::{ChainError, Result};
use crate::numerics::{
    eig_sym, krylov_propagate, lanczos_ground_from, norm_c, CsrMatrix, KrylovOptions,
};
use crate::rotor2::{GroundStateOptions, C64};

/// Largest Hilbert space the exact rotor-chain engine will build.
pub const MAX_CHAIN_DIM: usize = 200_000;

/// Rotor chain `½Σpₙ² + ω²Σ(1 − cos xₙ) + κΣ(1 − cos(xₙ − xₙ₊₁))`, free ends,
/// momenta truncated to `|pₙ| ≤ M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorChainParams {
    pub n: usize,
    pub omega_sq: f64,
    pub kappa: f64,
    pub m: usize,
}

impl RotorChainParams {
    pub fn new(n: usize, omega_sq: f64, kappa: f64, m: usize) -> Result<Self> {
        if !(2..=4).contains(&n) {
            return Err(ChainError::InvalidParameter(format!(
                "exact rotor chains support 2 <= N <= 4, got {n}"
            )));
        }
        if !(omega_sq >= 0.0) || !omega_sq.is_finite() || !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(ChainError::InvalidParameter(format!(
                "need finite omega_sq, kappa >= 0, got ({omega_sq}, {kappa})"
            )));
        }
        if m < 1 {
            return Err(ChainError::InvalidParameter("cutoff M must be >= 1".into()));
        }
        let p = Self { n, omega_sq, kappa, m };
        let dim = (2 * m + 1).checked_pow(n as u32).unwrap_or(usize::MAX);
        if dim > MAX_CHAIN_DIM {
            return Err(ChainError::DimensionBudget {
                dim,
                max: MAX_CHAIN_DIM,
            });
        }
        Ok(p)
    }

    /// Default cutoff by length: 8, 6 and 4 for `N` = 2, 3 and 4.
    pub fn default_cutoff(n: usize) -> usize {
        match n {
            0..=2 => 8,
            3 => 6,
            _ => 4,
        }
    }

    pub fn side(&self) -> usize {
        2 * self.m + 1
    }

    pub fn dim(&self) -> usize {
        self.side().pow(self.n as u32)
    }

    pub fn cut(&self) -> usize {
        self.n / 2
    }
}

/// Mixed-radix index with site 1 slowest; agrees with the two-rotor basis at `N = 2`.
pub fn chain_index(m: usize, momenta: &[i64]) -> Option<usize> {
    let mi = m as i64;
    let side = 2 * m + 1;
    momenta.iter().try_fold(0usize, |acc, &p| {
        (p.abs() <= mi).then(|| acc * side + (p + mi) as usize)
    })
}

pub fn chain_momenta(m: usize, n: usize, mut index: usize) -> Vec<i64> {
    let side = 2 * m + 1;
    let mut out = vec![0i64; n];
    for slot in out.iter_mut().rev() {
        *slot = (index % side) as i64 - m as i64;
        index /= side;
    }
    out
}

/// Sparse Hamiltonian with on-site strength `on_site_sq` and coupling `params.kappa`.
pub fn rotor_chain_hamiltonian(params: &RotorChainParams, on_site_sq: f64) -> CsrMatrix {
    let (n, m) = (params.n, params.m);
    let mi = m as i64;
    let k = params.kappa;
    let w2 = on_site_sq;
    let dim = params.dim();
    let mut trip = Vec::with_capacity(dim * (1 + 2 * n + 2 * (n - 1)));
    let mut q = vec![0i64; n];
    for i in 0..dim {
        let p = chain_momenta(m, n, i);
        let kin: i64 = p.iter().map(|x| x * x).sum();
        trip.push((i, i, 0.5 * kin as f64 + n as f64 * w2 + (n - 1) as f64 * k));
        if w2 != 0.0 {
            for site in 0..n {
                for d in [-1, 1] {
                    if (p[site] + d).abs() <= mi {
                        q.copy_from_slice(&p);
                        q[site] += d;
                        trip.push((i, chain_index(m, &q).unwrap(), -0.5 * w2));
                    }
                }
            }
        }
        if k != 0.0 {
            for bond in 0..n - 1 {
                for d in [-1, 1] {
                    if (p[bond] + d).abs() <= mi && (p[bond + 1] - d).abs() <= mi {
                        q.copy_from_slice(&p);
                        q[bond] += d;
                        q[bond + 1] -= d;
                        trip.push((i, chain_index(m, &q).unwrap(), -0.5 * k));
                    }
                }
            }
        }
    }
    CsrMatrix::from_triplets(dim, trip)
}

/// Diagonal `Σₙ pₙ`.
pub fn chain_total_momentum(params: &RotorChainParams) -> CsrMatrix {
    let trip = (0..params.dim())
        .map(|i| {
            let s: i64 = chain_momenta(params.m, params.n, i).iter().sum();
            (i, i, s as f64)
        })
        .collect();
    CsrMatrix::from_triplets(params.dim(), trip)
}

/// Normalized chain wave function over `{−M..M}^N`.
#[derive(Debug, Clone)]
pub struct RotorChainState {
    pub n: usize,
    pub m: usize,
    pub amps: Vec<C64>,
}

impl RotorChainState {
    pub fn norm(&self) -> f64 {
        norm_c(&self.amps)
    }

    /// Weight on configurations where any site sits at `|p| = M`.
    pub fn boundary_weight(&self) -> f64 {
        let mi = self.m as i64;
        self.amps
            .iter()
            .enumerate()
            .filter(|&(i, _)| chain_momenta(self.m, self.n, i).iter().any(|p| p.abs() == mi))
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }

    /// Entropy of sites `1..=n_a` from the singular values of the amplitude
    /// tensor reshaped to `(2M+1)^{n_a} × (2M+1)^{N−n_a}`.
    pub fn schmidt_entropy(&self, n_a: usize) -> Result<f64> {
        if n_a < 1 || n_a >= self.n {
            return Err(ChainError::InvalidParameter(format!(
                "need 1 <= N_A < N = {}, got {n_a}",
                self.n
            )));
        }
        let side = 2 * self.m + 1;
        let rows = side.pow(n_a as u32);
        let cols = side.pow((self.n - n_a) as u32);
        let c = DMatrix::from_row_slice(rows, cols, &self.amps);
        let sv = c.singular_values();
        Ok(sv
            .iter()
            .map(|s| s * s)
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.ln())
            .sum::<f64>()
            .max(0.0))
    }
}

/// Pre-quench ground state: dense below `opts.dense_max_dim`, Lanczos above.
pub fn rotor_chain_ground(
    params: &RotorChainParams,
    opts: &GroundStateOptions,
) -> Result<(f64, RotorChainState)> {
    let h = rotor_chain_hamiltonian(params, params.omega_sq);
    let dim = params.dim();
    let (energy, mut vec) = if dim <= opts.dense_max_dim {
        let d = eig_sym(&h.to_dense(), opts.sym_tol)?;
        (d.eigenvalues[0], d.eigenvectors.column(0).iter().copied().collect::<Vec<_>>())
    } else {
        let width = 1.0 + params.m as f64;
        let start: Vec<f64> = (0..dim)
            .map(|i| {
                let p2: i64 = chain_momenta(params.m, params.n, i).iter().map(|p| p * p).sum();
                (-(p2 as f64) / width).exp() + 1e-3
            })
            .collect();
        let gs = lanczos_ground_from(|x, y| h.apply(x, y), &start, &opts.lanczos)?;
        (gs.energy, gs.state)
    };
    let nrm = vec.iter().map(|v| v * v).sum::<f64>().sqrt();
    let pivot = vec.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
    let scale = pivot.signum() / nrm;
    vec.iter_mut().for_each(|v| *v *= scale);
    Ok((
        energy,
        RotorChainState {
            n: params.n,
            m: params.m,
            amps: vec.into_iter().map(|v| C64::new(v, 0.0)).collect(),
        },
    ))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RotorChainOptions {
    pub ground: GroundStateOptions,
    pub krylov: KrylovOptions,
}

#[derive(Debug, Clone)]
pub struct RotorChainRun {
    pub params: RotorChainParams,
    pub ground_energy: f64,
    pub boundary_weight: f64,
    pub ts: Vec<f64>,
    pub entropies: Vec<f64>,
}

/// Ground state of the pre-quench chain, evolved with `ω² = 0`; the half-chain
/// entropy at each of the ascending times `ts`.
pub fn rotor_chain_dynamics(
    params: &RotorChainParams,
    ts: &[f64],
    opts: &RotorChainOptions,
) -> Result<RotorChainRun> {
    if ts.iter().any(|t| !(*t >= 0.0)) || ts.windows(2).any(|w| w[1] < w[0]) {
        return Err(ChainError::InvalidParameter(
            "times must be non-negative and ascending".into(),
        ));
    }
    let (ground_energy, mut state) = rotor_chain_ground(params, &opts.ground)?;
    let boundary_weight = state.boundary_weight();
    let h = rotor_chain_hamiltonian(params, 0.0);
    let mut now = 0.0;
    let mut entropies = Vec::with_capacity(ts.len());
    for &t in ts {
        state.amps = krylov_propagate(|x, y| h.apply_complex(x, y), &state.amps, t - now, &opts.krylov)?;
        now = t;
        entropies.push(state.schmidt_entropy(params.cut())?);
    }
    Ok(RotorChainRun {
        params: *params,
        ground_energy,
        boundary_weight,
        ts: ts.to_vec(),
        entropies,
    })
}
