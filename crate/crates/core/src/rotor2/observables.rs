use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{basis_momenta, Parity, Result, Rotor2Error, WaveFunction, C64};
use crate::numerics::{eigvals_hermitian, von_neumann_entropy};

/// `ρ₁` in the momentum basis `p₁ ∈ {−M..M}`.
#[derive(Debug, Clone)]
pub struct ReducedDensityMatrix {
    pub m: usize,
    pub entries: DMatrix<C64>,
}

impl ReducedDensityMatrix {
    pub fn side(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(eigvals_hermitian(&self.entries)?)
    }

    pub fn max_hermiticity_error(&self) -> f64 {
        (&self.entries - self.entries.adjoint()).camax()
    }

    /// Largest off-diagonal modulus relative to the largest diagonal entry.
    pub fn off_diagonal_ratio(&self) -> f64 {
        let n = self.side();
        let mut off = 0.0f64;
        let mut diag = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let v = self.entries[(i, j)].norm();
                if i == j {
                    diag = diag.max(v);
                } else {
                    off = off.max(v);
                }
            }
        }
        off / diag
    }
}

/// Trace out rotor 2: `ρ₁(p₁, p₁') = Σ_{p₂} c(p₁, p₂) c*(p₁', p₂)`.
pub fn reduce_site(psi: &WaveFunction) -> ReducedDensityMatrix {
    let c = psi.as_matrix();
    ReducedDensityMatrix {
        m: psi.cutoff(),
        entries: &c * c.adjoint(),
    }
}

/// Von Neumann entropy in nats; eigenvalues down to `−1e-10` count as zero.
pub fn entanglement_entropy(rho: &ReducedDensityMatrix) -> Result<f64> {
    let eig = rho.spectrum()?;
    von_neumann_entropy(&eig, 1e-10).map_err(|_| {
        Rotor2Error::NegativeEigenvalue(eig.iter().copied().fold(f64::INFINITY, f64::min))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CosOperator {
    /// `cos(x₁ + x₂)`, shifts `(±1, ±1)`.
    Sum,
    /// `cos(x₁ − x₂)`, shifts `(±1, ∓1)`.
    Diff,
    /// `cos x₁`, shifts `(±1, 0)`.
    Site1,
}

impl CosOperator {
    fn shift(self) -> (i64, i64) {
        match self {
            CosOperator::Sum => (1, 1),
            CosOperator::Diff => (1, -1),
            CosOperator::Site1 => (1, 0),
        }
    }
}

/// `⟨ψ| ½(S + S†) |ψ⟩` for the momentum shift `S` of the chosen cosine.
pub fn expectation_cos(psi: &WaveFunction, which: CosOperator) -> f64 {
    let (d1, d2) = which.shift();
    let amps = psi.amplitudes();
    let m = psi.cutoff();
    let mut acc = C64::new(0.0, 0.0);
    for (i, &c) in amps.iter().enumerate() {
        let (p1, p2) = basis_momenta(m, i);
        acc += psi.amplitude(p1 + d1, p2 + d2).conj() * c;
    }
    // ⟨S⟩ + ⟨S†⟩ = 2 Re⟨S⟩
    acc.re
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    One,
    Two,
}

/// `f(p) = Σ_{other} |c|²`, indexed by `p + M`.
pub fn momentum_marginal(psi: &WaveFunction, site: Site) -> Vec<f64> {
    let side = psi.side();
    let mut f = vec![0.0; side];
    for (i, c) in psi.amplitudes().iter().enumerate() {
        let k = match site {
            Site::One => i / side,
            Site::Two => i % side,
        };
        f[k] += c.norm_sqr();
    }
    f
}

/// Distribution of `P = p₁ + p₂`, indexed by `P + 2M`.
pub fn total_momentum_distribution(psi: &WaveFunction) -> Vec<f64> {
    let m = psi.cutoff();
    let mut f = vec![0.0; 4 * m + 1];
    for (i, c) in psi.amplitudes().iter().enumerate() {
        let (p1, p2) = basis_momenta(m, i);
        f[(p1 + p2 + 2 * m as i64) as usize] += c.norm_sqr();
    }
    f
}

/// Weights of the even and odd total-momentum sectors.
pub fn parity_weights(psi: &WaveFunction) -> (f64, f64) {
    let m = psi.cutoff();
    let (mut even, mut odd) = (0.0, 0.0);
    for (i, c) in psi.amplitudes().iter().enumerate() {
        let (p1, p2) = basis_momenta(m, i);
        match Parity::of(p1 + p2) {
            Parity::Even => even += c.norm_sqr(),
            Parity::Odd => odd += c.norm_sqr(),
        }
    }
    (even, odd)
}

/// `ρ₁(x, x')` sampled on a uniform grid of `[−π, π)`.
#[derive(Debug, Clone)]
pub struct PositionKernel {
    pub xs: Vec<f64>,
    pub values: DMatrix<C64>,
}

impl PositionKernel {
    /// `Σ_j ρ(x_j, x_j) Δx`, equal to the trace once the grid resolves every
    /// momentum difference.
    pub fn grid_trace(&self) -> f64 {
        let dx = 2.0 * PI / self.xs.len() as f64;
        self.values.diagonal().iter().map(|z| z.re).sum::<f64>() * dx
    }
}

/// `ρ₁(x, x') = (1/2π) Σ_{p,p'} ρ_{pp'} e^{i(px − p'x')}` on `n_x` points.
pub fn position_kernel(rho: &ReducedDensityMatrix, n_x: usize) -> Result<PositionKernel> {
    let side = rho.side();
    if n_x < side {
        return Err(Rotor2Error::GridTooCoarse { n_x, min: side });
    }
    let m = rho.m as i64;
    let xs: Vec<f64> = (0..n_x).map(|j| -PI + 2.0 * PI * j as f64 / n_x as f64).collect();
    let norm = (2.0 * PI).sqrt().recip();
    let f = DMatrix::from_fn(n_x, side, |j, k| {
        C64::from_polar(norm, (k as i64 - m) as f64 * xs[j])
    });
    let values = &f * &rho.entries * f.adjoint();
    Ok(PositionKernel { xs, values })
}
