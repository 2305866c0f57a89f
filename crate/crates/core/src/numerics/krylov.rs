//! Lanczos-based ground-state search and Krylov time propagation.
//!
//! Both routines only need the action `y = H x` of a real symmetric operator.
//! Each Krylov basis is kept in memory and fully reorthogonalized (twice), which
//! is affordable at the subspace sizes used here and keeps the tridiagonal
//! projection honest.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{eig_sym, norm_c, norm_r, NumericsError, Result};

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Convergence target on the residual `|H y - E y|` of the Ritz pair.
    pub tol: f64,
    pub krylov_dim: usize,
    pub max_restarts: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            krylov_dim: 80,
            max_restarts: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: Vec<f64>,
    pub residual: f64,
    pub matvecs: usize,
}

/// Lowest eigenpair of a symmetric operator from a deterministic pseudo-random
/// start vector.
pub fn lanczos_ground<F>(apply: F, dim: usize, tol: f64) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2c);
    let start: Vec<f64> = (0..dim).map(|_| rng.random_range(0.5..1.5)).collect();
    let opts = LanczosOptions {
        tol,
        ..LanczosOptions::default()
    };
    let gs = lanczos_ground_from(apply, &start, &opts)?;
    Ok((gs.energy, gs.state))
}

/// Restarted Lanczos from a caller-provided start vector.
///
/// The start vector fixes which symmetry sector is explored: components
/// orthogonal to it in exact arithmetic stay absent.
pub fn lanczos_ground_from<F>(apply: F, start: &[f64], opts: &LanczosOptions) -> Result<GroundState>
where
    F: Fn(&[f64], &mut [f64]),
{
    let dim = start.len();
    let n0 = norm_r(start);
    if dim == 0 || n0 == 0.0 || !n0.is_finite() {
        return Err(NumericsError::KrylovBreakdown("zero or non-finite start vector"));
    }
    let mut v0: Vec<f64> = start.iter().map(|x| x / n0).collect();
    let m = opts.krylov_dim.clamp(2, dim.max(2));
    let mut matvecs = 0usize;
    let mut w = vec![0.0; dim];

    for _restart in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        basis.push(v0.clone());
        let mut invariant = false;
        let mut hnorm = 0.0f64;
        for j in 0..m.min(dim) {
            apply(&basis[j], &mut w);
            matvecs += 1;
            let a = dot(&basis[j], &w);
            alpha.push(a);
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &w);
                    axpy(-c, b, &mut w);
                }
            }
            let bnext = norm_r(&w);
            hnorm = hnorm.max(a.abs() + bnext + beta.last().copied().unwrap_or(0.0));
            if j + 1 == m.min(dim) {
                break;
            }
            if bnext <= 1e-13 * hnorm.max(1.0) {
                invariant = true;
                break;
            }
            beta.push(bnext);
            basis.push(w.iter().map(|x| x / bnext).collect());
        }

        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let tri = eig_sym(&t, 1e-12)?;
        let s = tri.eigenvectors.column(0);
        let mut y = vec![0.0; dim];
        for (i, b) in basis.iter().enumerate().take(k) {
            axpy(s[i], b, &mut y);
        }
        let ny = norm_r(&y);
        y.iter_mut().for_each(|x| *x /= ny);

        apply(&y, &mut w);
        matvecs += 1;
        let energy = dot(&y, &w);
        let residual = w
            .iter()
            .zip(&y)
            .map(|(hw, yy)| (hw - energy * yy).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= opts.tol || invariant {
            return Ok(GroundState {
                energy,
                state: y,
                residual,
                matvecs,
            });
        }
        v0 = y;
    }
    Err(NumericsError::NoConvergence {
        what: "restarted Lanczos",
        iterations: opts.max_restarts,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    pub krylov_dim: usize,
    /// Error budget of the whole step `dt`, split across substeps.
    pub tol: f64,
    /// Substeps below this are reported as [`NumericsError::StepUnderflow`].
    pub min_step: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            krylov_dim: 30,
            tol: 1e-12,
            min_step: 1e-10,
        }
    }
}

/// `exp(-i H dt) |state>` by a Lanczos projection with adaptive substeps.
pub fn krylov_propagate<F>(
    apply: F,
    state: &[Complex64],
    dt: f64,
    opts: &KrylovOptions,
) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let dim = state.len();
    let n0 = norm_c(state);
    if (n0 - 1.0).abs() > 1e-8 {
        return Err(NumericsError::InvalidInput(format!(
            "Krylov propagation expects a unit-norm state, got norm {n0}"
        )));
    }
    if dt == 0.0 || dim == 0 {
        return Ok(state.to_vec());
    }
    let total = dt.abs();
    let sign = dt.signum();
    let mut psi = state.to_vec();
    let mut done = 0.0;
    let mut h = total;
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    let m_max = opts.krylov_dim.clamp(2, dim.max(2));

    while done < total {
        h = h.min(total - done);
        let nrm = norm_c(&psi);
        let mut basis: Vec<Vec<Complex64>> = vec![psi.iter().map(|z| z / nrm).collect()];
        let mut alpha = Vec::with_capacity(m_max);
        let mut beta = Vec::with_capacity(m_max);
        let mut trailing = 0.0;
        let mut exact = false;
        for j in 0..m_max.min(dim) {
            apply(&basis[j], &mut w);
            let a = dotc(&basis[j], &w).re;
            alpha.push(a);
            for _ in 0..2 {
                for b in &basis {
                    let c = dotc(b, &w);
                    axpyc(-c, b, &mut w);
                }
            }
            let bnext = norm_c(&w);
            let scale = alpha.iter().fold(1.0f64, |s, x| s.max(x.abs()));
            if bnext <= 1e-14 * scale {
                exact = true;
                break;
            }
            if j + 1 == m_max.min(dim) {
                trailing = bnext;
                if basis.len() == dim {
                    exact = true;
                }
                break;
            }
            beta.push(bnext);
            basis.push(w.iter().map(|z| z / bnext).collect());
        }
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let tri = eig_sym(&t, 1e-12)?;

        // shrink the substep until the a-posteriori error fits its share
        let coeffs = loop {
            let c = exp_tridiag_e1(&tri.eigenvalues, &tri.eigenvectors, sign * h);
            let err = if exact { 0.0 } else { trailing * c[k - 1].norm() };
            if err <= opts.tol * h / total {
                break c;
            }
            h *= 0.5;
            if h < opts.min_step {
                return Err(NumericsError::StepUnderflow { step: h, tol: opts.tol });
            }
        };

        let mut next = vec![Complex64::new(0.0, 0.0); dim];
        for (c, b) in coeffs.iter().zip(&basis) {
            axpyc(*c * nrm, b, &mut next);
        }
        psi = next;
        done += h;
        if exact {
            h = total - done;
        } else {
            h *= 1.5;
        }
    }
    Ok(psi)
}

fn exp_tridiag_e1(evals: &[f64], evecs: &DMatrix<f64>, t: f64) -> Vec<Complex64> {
    let k = evals.len();
    let mut out = vec![Complex64::new(0.0, 0.0); k];
    for (n, &e) in evals.iter().enumerate() {
        let ph = Complex64::from_polar(evecs[(0, n)], -e * t);
        for (i, o) in out.iter_mut().enumerate() {
            *o += ph * evecs[(i, n)];
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpyc(a: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SpectralDecomposition;

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        (&a + a.transpose()) * 0.5
    }

    fn dense_apply(m: &DMatrix<f64>) -> impl Fn(&[f64], &mut [f64]) + '_ {
        move |x, y| {
            for i in 0..m.nrows() {
                y[i] = (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum();
            }
        }
    }

    fn dense_apply_c(m: &DMatrix<f64>) -> impl Fn(&[Complex64], &mut [Complex64]) + '_ {
        move |x, y| {
            for i in 0..m.nrows() {
                y[i] = (0..m.ncols()).map(|j| x[j] * m[(i, j)]).sum();
            }
        }
    }

    fn random_state(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let n = norm_c(&v);
        v.into_iter().map(|z| z / n).collect()
    }

    #[test]
    fn ground_of_small_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 1.0, 2.0]));
        let (e, v) = lanczos_ground(dense_apply(&m), 3, 1e-12).unwrap();
        assert!(e.abs() < 1e-12);
        assert!((v[0].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ground_matches_dense_and_shifts() {
        let h = random_symmetric(50, 7);
        let exact = eig_sym(&h, 1e-12).unwrap().eigenvalues[0];
        let (e, _) = lanczos_ground(dense_apply(&h), 50, 1e-11).unwrap();
        assert!((e - exact).abs() < 1e-10, "{e} vs {exact}");

        let c = 3.25;
        let shifted = &h + DMatrix::identity(50, 50) * c;
        let (es, _) = lanczos_ground(dense_apply(&shifted), 50, 1e-11).unwrap();
        assert!((es - e - c).abs() < 1e-10);
    }

    #[test]
    fn zero_start_is_breakdown() {
        let m = DMatrix::<f64>::identity(3, 3);
        let r = lanczos_ground_from(dense_apply(&m), &[0.0; 3], &LanczosOptions::default());
        assert!(matches!(r, Err(NumericsError::KrylovBreakdown(_))));
    }

    #[test]
    fn propagate_zero_step_and_phases() {
        let e = [0.3, -1.2, 2.5];
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(e.to_vec()));
        let psi = random_state(3, 4);
        let same = krylov_propagate(dense_apply_c(&m), &psi, 0.0, &KrylovOptions::default()).unwrap();
        assert_eq!(same, psi);
        let t = 7.3;
        let out = krylov_propagate(dense_apply_c(&m), &psi, t, &KrylovOptions::default()).unwrap();
        for i in 0..3 {
            let expect = psi[i] * Complex64::from_polar(1.0, -e[i] * t);
            assert!((out[i] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn propagate_matches_spectral_oracle() {
        let h = random_symmetric(100, 9);
        let spec: SpectralDecomposition = eig_sym(&h, 1e-12).unwrap();
        let psi = random_state(100, 10);
        let opts = KrylovOptions {
            tol: 1e-11,
            ..KrylovOptions::default()
        };
        let k = krylov_propagate(dense_apply_c(&h), &psi, 0.1, &opts).unwrap();
        let s = spec.evolve(&psi, 0.1).unwrap();
        let err = k.iter().zip(&s).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-9, "err {err}");
        assert!((norm_c(&k) - 1.0).abs() < 1e-10);

        // long step forces substeps; still unitary and on the oracle
        let k = krylov_propagate(dense_apply_c(&h), &psi, 5.0, &opts).unwrap();
        let s = spec.evolve(&psi, 5.0).unwrap();
        let err = k.iter().zip(&s).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-9, "err {err}");
        assert!((norm_c(&k) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn split_steps_compose() {
        let h = random_symmetric(60, 12);
        let psi = random_state(60, 13);
        let opts = KrylovOptions {
            tol: 1e-12,
            ..KrylovOptions::default()
        };
        let one = krylov_propagate(dense_apply_c(&h), &psi, 0.8, &opts).unwrap();
        let half = krylov_propagate(dense_apply_c(&h), &psi, 0.3, &opts).unwrap();
        let two = krylov_propagate(dense_apply_c(&h), &half, 0.5, &opts).unwrap();
        let err = one.iter().zip(&two).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-10);
    }

    #[test]
    fn rejects_unnormalized() {
        let m = DMatrix::<f64>::identity(2, 2);
        let psi = vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)];
        assert!(krylov_propagate(dense_apply_c(&m), &psi, 1.0, &KrylovOptions::default()).is_err());
    }

    #[test]
    fn unreachable_tolerance_underflows() {
        let h = random_symmetric(80, 21) * 1e6;
        let psi = random_state(80, 22);
        let opts = KrylovOptions {
            krylov_dim: 3,
            tol: 1e-15,
            min_step: 1e-3,
        };
        let r = krylov_propagate(dense_apply_c(&h), &psi, 1.0, &opts);
        assert!(matches!(r, Err(NumericsError::StepUnderflow { .. })));
    }
}
