use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{basis_index, build_hamiltonian, Result, Rotor2Error, RotorParams, WaveFunction, C64};
use crate::numerics::{eig_sym, krylov_propagate, CsrMatrix, KrylovOptions, SpectralDecomposition};

/// `exp(−iHt)ψ₀` through a full eigendecomposition of `H`.
pub fn evolve(spec: &SpectralDecomposition, psi0: &WaveFunction, t: f64) -> Result<WaveFunction> {
    let out = spec.evolve(psi0.amplitudes(), t)?;
    Ok(WaveFunction::from_normalized(psi0.cutoff(), out))
}

/// `exp(−iHt)ψ₀` by adaptive Krylov steps on the sparse operator.
pub fn evolve_krylov(
    h: &CsrMatrix,
    psi0: &WaveFunction,
    t: f64,
    opts: &KrylovOptions,
) -> Result<WaveFunction> {
    if h.dim() != psi0.amplitudes().len() {
        return Err(Rotor2Error::DimensionMismatch {
            expected: h.dim(),
            got: psi0.amplitudes().len(),
        });
    }
    let out = krylov_propagate(|x, y| h.apply_complex(x, y), psi0.amplitudes(), t, opts)?;
    Ok(WaveFunction::from_normalized(psi0.cutoff(), out))
}

/// One fixed-`P = p₁ + p₂` block of the post-quench Hamiltonian.
#[derive(Debug, Clone)]
pub struct MomentumBlock {
    pub total: i64,
    /// Flat basis indices of the block members, ordered by `p₁`.
    pub indices: Vec<usize>,
    pub p1_values: Vec<i64>,
    pub decomposition: SpectralDecomposition,
}

/// Exact eigensystem of the post-quench (`ω² = 0`) Hamiltonian, block by block.
///
/// Without the on-site term the coupling only moves momentum between the two
/// rotors, so `P` is conserved and each block is a tridiagonal matrix with
/// diagonal `½(p₁² + p₂²) + κ` and hopping `−κ/2`.
#[derive(Debug, Clone)]
pub struct BlockSpectrum {
    m: usize,
    kappa: f64,
    blocks: Vec<MomentumBlock>,
}

impl BlockSpectrum {
    pub fn new(kappa: f64, m: usize) -> Result<Self> {
        if !(kappa >= 0.0) || !kappa.is_finite() || m < 1 {
            return Err(Rotor2Error::InvalidParameter(format!(
                "need kappa >= 0 and M >= 1, got kappa = {kappa}, M = {m}"
            )));
        }
        let mi = m as i64;
        let blocks = (-2 * mi..=2 * mi)
            .map(|total| {
                let p1_values: Vec<i64> = ((total - mi).max(-mi)..=(total + mi).min(mi)).collect();
                let n = p1_values.len();
                let mut h = DMatrix::zeros(n, n);
                for (a, &p1) in p1_values.iter().enumerate() {
                    let p2 = total - p1;
                    h[(a, a)] = 0.5 * ((p1 * p1 + p2 * p2) as f64) + kappa;
                    if a + 1 < n {
                        h[(a, a + 1)] = -0.5 * kappa;
                        h[(a + 1, a)] = -0.5 * kappa;
                    }
                }
                let decomposition = eig_sym(&h, 0.0)?;
                let indices = p1_values
                    .iter()
                    .map(|&p1| basis_index(m, p1, total - p1).unwrap())
                    .collect();
                Ok(MomentumBlock {
                    total,
                    indices,
                    p1_values,
                    decomposition,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { m, kappa, blocks })
    }

    pub fn cutoff(&self) -> usize {
        self.m
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        (2 * self.m + 1).pow(2)
    }

    pub fn blocks(&self) -> &[MomentumBlock] {
        &self.blocks
    }

    /// All eigenpairs as `(energy, total momentum, sparse eigenvector)`.
    pub fn eigenpairs(&self) -> Vec<(f64, i64, Vec<(usize, f64)>)> {
        let mut out = Vec::with_capacity(self.dim());
        for b in &self.blocks {
            let v = &b.decomposition.eigenvectors;
            for (n, &e) in b.decomposition.eigenvalues.iter().enumerate() {
                let vec = b.indices.iter().zip(v.column(n).iter()).map(|(&i, &a)| (i, a)).collect();
                out.push((e, b.total, vec));
            }
        }
        out
    }

    /// Assemble the dense full-basis decomposition, eigenvalues ascending.
    pub fn to_decomposition(&self) -> SpectralDecomposition {
        let mut pairs = self.eigenpairs();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let dim = self.dim();
        let mut vecs = DMatrix::zeros(dim, dim);
        for (col, (_, _, v)) in pairs.iter().enumerate() {
            for &(i, a) in v {
                vecs[(i, col)] = a;
            }
        }
        SpectralDecomposition {
            eigenvalues: pairs.into_iter().map(|p| p.0).collect(),
            eigenvectors: vecs,
        }
    }

    /// Per-block overlaps with the eigenvectors.
    pub fn project(&self, psi: &WaveFunction) -> Result<Vec<Vec<C64>>> {
        if psi.cutoff() != self.m {
            return Err(Rotor2Error::DimensionMismatch {
                expected: self.dim(),
                got: psi.amplitudes().len(),
            });
        }
        let amps = psi.amplitudes();
        Ok(self
            .blocks
            .iter()
            .map(|b| {
                let v = &b.decomposition.eigenvectors;
                (0..v.ncols())
                    .map(|n| {
                        b.indices
                            .iter()
                            .zip(v.column(n).iter())
                            .map(|(&i, &a)| amps[i] * a)
                            .sum()
                    })
                    .collect()
            })
            .collect())
    }

    /// Rebuild the state at time `t` from overlaps returned by [`Self::project`].
    pub fn evolve_projected(&self, coeffs: &[Vec<C64>], t: f64) -> WaveFunction {
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for (b, c) in self.blocks.iter().zip(coeffs) {
            let v = &b.decomposition.eigenvectors;
            for (n, (&e, &cn)) in b.decomposition.eigenvalues.iter().zip(c).enumerate() {
                let z = cn * C64::from_polar(1.0, -e * t);
                for (&i, &a) in b.indices.iter().zip(v.column(n).iter()) {
                    out[i] += z * a;
                }
            }
        }
        WaveFunction::from_normalized(self.m, out)
    }

    pub fn evolve(&self, psi: &WaveFunction, t: f64) -> Result<WaveFunction> {
        Ok(self.evolve_projected(&self.project(psi)?, t))
    }
}

/// Time evolution strategy for one post-quench Hamiltonian.
#[derive(Debug, Clone)]
pub enum Propagator {
    /// Exact, using the conserved total momentum (`ω²_post = 0`).
    Blocks(BlockSpectrum),
    /// Exact, through a dense eigendecomposition.
    Spectral(SpectralDecomposition),
    /// Sequential Krylov steps on the sparse operator.
    Krylov { h: CsrMatrix, opts: KrylovOptions },
}

impl Propagator {
    /// Pick the cheapest exact route: blocks when `on_site_post = 0`, a dense
    /// decomposition up to `dense_max_dim`, Krylov otherwise.
    pub fn post_quench(params: &RotorParams, on_site_post: f64, dense_max_dim: usize) -> Result<Self> {
        if on_site_post == 0.0 {
            return Ok(Self::Blocks(BlockSpectrum::new(params.kappa, params.m)?));
        }
        let h = build_hamiltonian(params, on_site_post);
        if params.dim() <= dense_max_dim {
            Ok(Self::Spectral(eig_sym(&h.to_dense(), 1e-12)?))
        } else {
            Ok(Self::Krylov {
                h,
                opts: KrylovOptions::default(),
            })
        }
    }

    /// Evaluate `f(t, ψ(t))` on every time in `ts` (non-negative; ascending
    /// for the Krylov route). Spectral routes run in parallel.
    pub fn map_series<T, F>(&self, psi0: &WaveFunction, ts: &[f64], f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(f64, &WaveFunction) -> T + Sync,
    {
        if let Some(&bad) = ts.iter().find(|t| !(**t >= 0.0)) {
            return Err(Rotor2Error::InvalidParameter(format!("negative time {bad}")));
        }
        match self {
            Self::Blocks(b) => {
                let coeffs = b.project(psi0)?;
                Ok(ts
                    .par_iter()
                    .map(|&t| f(t, &b.evolve_projected(&coeffs, t)))
                    .collect())
            }
            Self::Spectral(s) => ts
                .par_iter()
                .map(|&t| evolve(s, psi0, t).map(|psi| f(t, &psi)))
                .collect(),
            Self::Krylov { h, opts } => {
                if ts.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Rotor2Error::InvalidParameter(
                        "Krylov propagation needs ascending times".into(),
                    ));
                }
                let mut out = Vec::with_capacity(ts.len());
                let mut psi = psi0.clone();
                let mut now = 0.0;
                for &t in ts {
                    psi = evolve_krylov(h, &psi, t - now, opts)?;
                    now = t;
                    out.push(f(t, &psi));
                }
                Ok(out)
            }
        }
    }
}
