use nalgebra::DMatrix;

use super::{Parity, Result, Rotor2Error};
use crate::numerics::{eig_sym, SpectralDecomposition};

/// Relative-coordinate Hamiltonian `d²/4 + κ − (κ/2)(|d⟩⟨d+2| + h.c.)` on the
/// given (same-parity, ascending, step 2) relative momenta.
pub fn relative_hamiltonian(kappa: f64, d_values: &[i64]) -> DMatrix<f64> {
    let n = d_values.len();
    let mut h = DMatrix::zeros(n, n);
    for (a, &d) in d_values.iter().enumerate() {
        h[(a, a)] = (d * d) as f64 / 4.0 + kappa;
        if a + 1 < n {
            h[(a, a + 1)] = -0.5 * kappa;
            h[(a + 1, a)] = -0.5 * kappa;
        }
    }
    h
}

/// One parity sector of the relative motion, diagonalized on `|d| ≤ 2M`.
#[derive(Debug, Clone)]
pub struct RelativeSector {
    pub parity: Parity,
    pub d_values: Vec<i64>,
    pub decomposition: SpectralDecomposition,
}

impl RelativeSector {
    fn build(kappa: f64, m: usize, parity: Parity) -> Result<Self> {
        let dmax = 2 * m as i64;
        let d_values: Vec<i64> = (-dmax..=dmax).filter(|&d| Parity::of(d) == parity).collect();
        let decomposition = eig_sym(&relative_hamiltonian(kappa, &d_values), 0.0)?;
        Ok(Self {
            parity,
            d_values,
            decomposition,
        })
    }

    pub fn levels(&self) -> &[f64] {
        &self.decomposition.eigenvalues
    }

    /// Weight of eigenvector `n` on the two outermost relative momenta.
    pub fn edge_weight(&self, n: usize) -> f64 {
        let v = self.decomposition.eigenvectors.column(n);
        v[0] * v[0] + v[v.len() - 1] * v[v.len() - 1]
    }

    /// Amplitude of eigenvector `n` at relative momentum `d` (zero outside).
    pub fn amplitude(&self, n: usize, d: i64) -> f64 {
        let d0 = self.d_values[0];
        if Parity::of(d) != self.parity || d < d0 || d > *self.d_values.last().unwrap() {
            return 0.0;
        }
        self.decomposition.eigenvectors[(((d - d0) / 2) as usize, n)]
    }

    /// Gap between the two lowest levels of this sector.
    pub fn lowest_gap(&self) -> f64 {
        self.levels()[1] - self.levels()[0]
    }
}

/// Post-quench two-rotor spectrum resolved into its decoupled parts.
#[derive(Debug, Clone)]
pub struct PostQuenchSpectrum {
    pub kappa: f64,
    pub m: usize,
    /// `(p, p²/4)` for `|p| ≤ 2M`, ordered by energy then `p`.
    pub zero_mode: Vec<(i64, f64)>,
    pub even: RelativeSector,
    pub odd: RelativeSector,
}

impl PostQuenchSpectrum {
    pub fn sector(&self, parity: Parity) -> &RelativeSector {
        match parity {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        }
    }

    /// Confirm that the lowest `n_levels` of both sectors have edge weight
    /// below `tol`, i.e. are unaffected by the relative-momentum cutoff.
    pub fn check_converged(&self, n_levels: usize, tol: f64) -> Result<()> {
        for s in [&self.even, &self.odd] {
            let n = n_levels.min(s.levels().len());
            for k in 0..n {
                let w = s.edge_weight(k);
                if w > tol {
                    return Err(Rotor2Error::Truncation(format!(
                        "{:?} relative level {k} has edge weight {w:.3e} > {tol:.1e} at M = {}",
                        s.parity, self.m
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn post_quench_spectra(kappa: f64, m: usize) -> Result<PostQuenchSpectrum> {
    if !(kappa >= 0.0) || m < 1 {
        return Err(Rotor2Error::InvalidParameter(format!(
            "need kappa >= 0 and M >= 1, got kappa = {kappa}, M = {m}"
        )));
    }
    let pmax = 2 * m as i64;
    let mut zero_mode: Vec<(i64, f64)> = (-pmax..=pmax).map(|p| (p, (p * p) as f64 / 4.0)).collect();
    zero_mode.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    Ok(PostQuenchSpectrum {
        kappa,
        m,
        zero_mode,
        even: RelativeSector::build(kappa, m, Parity::Even)?,
        odd: RelativeSector::build(kappa, m, Parity::Odd)?,
    })
}
