use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{NumericsError, Result};

/// Eigenpairs of a real symmetric operator, eigenvalues ascending.
///
/// Column `n` of `eigenvectors` belongs to `eigenvalues[n]`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvectors.nrows()
    }

    /// Overlaps `<n|psi>` for every eigenvector.
    pub fn project(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        if psi.len() != self.dim() {
            return Err(NumericsError::DimensionMismatch {
                expected: self.dim(),
                got: psi.len(),
            });
        }
        let v = &self.eigenvectors;
        Ok((0..v.ncols())
            .map(|n| {
                v.column(n)
                    .iter()
                    .zip(psi)
                    .map(|(&a, &c)| c * a)
                    .sum::<Complex64>()
            })
            .collect())
    }

    /// Recombine overlaps into a state: `sum_n coeffs[n] |n>`.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let v = &self.eigenvectors;
        let mut out = vec![Complex64::new(0.0, 0.0); v.nrows()];
        for (n, &c) in coeffs.iter().enumerate() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(v.column(n).iter()) {
                *o += c * a;
            }
        }
        out
    }

    /// `exp(-iHt)|psi>` applied through the eigenbasis.
    pub fn evolve(&self, psi: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
        let mut coeffs = self.project(psi)?;
        for (c, &e) in coeffs.iter_mut().zip(&self.eigenvalues) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        Ok(self.synthesize(&coeffs))
    }

    /// Largest `|H v - E v|` over the stored pairs, for a supplied `H`.
    pub fn max_residual(&self, h: &DMatrix<f64>) -> f64 {
        let hv = h * &self.eigenvectors;
        (0..self.eigenvalues.len())
            .map(|n| (hv.column(n) - self.eigenvectors.column(n) * self.eigenvalues[n]).norm())
            .fold(0.0, f64::max)
    }
}

/// Full eigendecomposition of a real symmetric matrix.
///
/// `sym_tol` is relative to the largest entry: input with
/// `max |a_ij - a_ji| > sym_tol * max |a_ij|` is rejected.
pub fn eig_sym(matrix: &DMatrix<f64>, sym_tol: f64) -> Result<SpectralDecomposition> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(NumericsError::DimensionMismatch {
            expected: n,
            got: matrix.ncols(),
        });
    }
    if n == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    let scale = matrix.amax().max(f64::MIN_POSITIVE);
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((matrix[(i, j)] - matrix[(j, i)]).abs());
        }
    }
    if asym > sym_tol * scale {
        return Err(NumericsError::NotSymmetric {
            max_asymmetry: asym,
            allowed: sym_tol * scale,
        });
    }
    // symmetrize so the solver sees exactly symmetric data
    let sym = (matrix + matrix.transpose()) * 0.5;
    let max_iter = 60 * n.max(8);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, max_iter).ok_or(
        NumericsError::NoConvergence {
            what: "symmetric eigensolver",
            iterations: max_iter,
        },
    )?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues (ascending) of a complex Hermitian matrix.
pub fn eigvals_hermitian(matrix: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(NumericsError::DimensionMismatch {
            expected: n,
            got: matrix.ncols(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let herm = (matrix + matrix.adjoint()).map(|z| z * 0.5);
    let max_iter = 60 * n.max(8);
    let eig = SymmetricEigen::try_new(herm, f64::EPSILON, max_iter).ok_or(
        NumericsError::NoConvergence {
            what: "Hermitian eigensolver",
            iterations: max_iter,
        },
    )?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// `-sum p ln p` over a density-matrix spectrum, with `0 ln 0 = 0`.
///
/// Eigenvalues in `[-neg_tol, 0)` are treated as zero; anything more negative
/// is an error.
pub fn von_neumann_entropy(eigenvalues: &[f64], neg_tol: f64) -> Result<f64> {
    let mut s = 0.0;
    for &p in eigenvalues {
        if p < -neg_tol {
            return Err(NumericsError::NegativeEigenvalue(p));
        }
        if p > 0.0 {
            s -= p * p.ln();
        }
    }
    Ok(s.max(0.0))
}
