use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{ChainError, Result};
use crate::numerics::eig_sym;

/// Harmonic chain `½[Σ(pₙ² + ω²xₙ²) + κΣ(xₙ − xₙ₊₁)²]` with free ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    pub n: usize,
    pub omega_sq: f64,
    pub kappa: f64,
}

impl ChainParams {
    pub fn new(n: usize, omega_sq: f64, kappa: f64) -> Result<Self> {
        if n < 2 {
            return Err(ChainError::InvalidParameter(format!("need N >= 2, got {n}")));
        }
        if !(omega_sq >= 0.0) || !omega_sq.is_finite() || !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(ChainError::InvalidParameter(format!(
                "need finite omega_sq, kappa >= 0, got ({omega_sq}, {kappa})"
            )));
        }
        Ok(Self { n, omega_sq, kappa })
    }

    /// Sites on the left of the half-chain cut.
    pub fn cut(&self) -> usize {
        self.n / 2
    }
}

/// `K = ω² 𝟙 + κ L` with `L` the path-graph Laplacian (free ends).
pub fn coupling_matrix(n: usize, omega_sq: f64, kappa: f64) -> DMatrix<f64> {
    let mut k = DMatrix::from_diagonal_element(n, n, omega_sq);
    for j in 0..n - 1 {
        k[(j, j)] += kappa;
        k[(j + 1, j + 1)] += kappa;
        k[(j, j + 1)] -= kappa;
        k[(j + 1, j)] -= kappa;
    }
    k
}

/// Normal modes of the chain, `ω_k = √(ω² + 4κ sin²(kπ/2N))`.
#[derive(Debug, Clone)]
pub struct NeumannModes {
    pub frequencies: Vec<f64>,
    /// Column `k` is `f_k(n) ∝ cos((n − ½)kπ/N)`, orthonormal; `k = 0` is uniform.
    pub basis: DMatrix<f64>,
}

/// `ω_k²` for every mode; independent of `ω²` apart from the shift.
fn mode_frequencies_sq(n: usize, omega_sq: f64, kappa: f64) -> Vec<f64> {
    (0..n)
        .map(|k| omega_sq + 4.0 * kappa * (k as f64 * PI / (2.0 * n as f64)).sin().powi(2))
        .collect()
}

fn cosine_basis(n: usize) -> DMatrix<f64> {
    let nf = n as f64;
    DMatrix::from_fn(n, n, |site, k| {
        if k == 0 {
            nf.sqrt().recip()
        } else {
            (2.0 / nf).sqrt() * ((site as f64 + 0.5) * k as f64 * PI / nf).cos()
        }
    })
}

pub fn neumann_modes(params: &ChainParams) -> NeumannModes {
    NeumannModes {
        frequencies: mode_frequencies_sq(params.n, params.omega_sq, params.kappa)
            .into_iter()
            .map(f64::sqrt)
            .collect(),
        basis: cosine_basis(params.n),
    }
}

/// Second moments `γ` in `(x₁..x_N, p₁..p_N)` order, with the symmetrized
/// `⟨{x, p}⟩/2` in the off-diagonal blocks.
#[derive(Debug, Clone)]
pub struct CovarianceState {
    pub gamma: DMatrix<f64>,
}

impl CovarianceState {
    pub fn sites(&self) -> usize {
        self.gamma.nrows() / 2
    }

    /// Covariance of the listed sites only.
    pub fn reduced(&self, sites: &[usize]) -> CovarianceState {
        let n = self.sites();
        let k = sites.len();
        let idx: Vec<usize> = sites.iter().copied().chain(sites.iter().map(|s| s + n)).collect();
        CovarianceState {
            gamma: DMatrix::from_fn(2 * k, 2 * k, |a, b| self.gamma[(idx[a], idx[b])]),
        }
    }

    /// Symplectic eigenvalues `ν_j`, ascending, from the spectrum of
    /// `−(γ^{1/2} Ω γ^{1/2})²`.
    pub fn symplectic_spectrum(&self) -> Result<Vec<f64>> {
        let n = self.sites();
        let g = eig_sym(&self.gamma, 1e-12)?;
        if let Some(&lo) = g.eigenvalues.first().filter(|&&l| !(l > 0.0)) {
            return Err(ChainError::Unphysical(lo));
        }
        let root = &g.eigenvectors
            * DMatrix::from_diagonal(&g.eigenvalues.iter().map(|l| l.sqrt()).collect::<Vec<_>>().into())
            * g.eigenvectors.transpose();
        let mut omega = DMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            omega[(j, j + n)] = 1.0;
            omega[(j + n, j)] = -1.0;
        }
        let b = &root * omega * &root;
        let c = b.transpose() * &b;
        let c = (&c + c.transpose()) * 0.5;
        let ev = eig_sym(&c, 1e-12)?.eigenvalues;
        // eigenvalues come in equal pairs
        Ok(ev.chunks(2).map(|p| (0.5 * (p[0] + p[1])).max(0.0).sqrt()).collect())
    }
}

/// `Σ_j [(ν+½) ln(ν+½) − (ν−½) ln(ν−½)]`; values down to `½ − 1e-10` count as `½`.
pub fn gaussian_entropy(nus: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &nu in nus {
        if nu < 0.5 - 1e-10 {
            return Err(ChainError::Unphysical(nu));
        }
        let a = nu + 0.5;
        let b = nu - 0.5;
        s += a * a.ln();
        if b > 0.0 {
            s -= b * b.ln();
        }
    }
    Ok(s.max(0.0))
}

/// Entanglement entropy of the first `n_a` sites.
pub fn half_chain_entropy(gamma: &CovarianceState, n_a: usize) -> Result<f64> {
    let n = gamma.sites();
    if n_a < 1 || n_a >= n {
        return Err(ChainError::InvalidParameter(format!(
            "need 1 <= N_A < N = {n}, got {n_a}"
        )));
    }
    let sites: Vec<usize> = (0..n_a).collect();
    gaussian_entropy(&gamma.reduced(&sites).symplectic_spectrum()?)
}

/// Per-mode moments rotated to the site basis.
fn assemble(basis: &DMatrix<f64>, xx: &[f64], pp: &[f64], xp: &[f64]) -> CovarianceState {
    let n = basis.nrows();
    let rot = |d: &[f64]| basis * DMatrix::from_diagonal(&d.to_vec().into()) * basis.transpose();
    let (gx, gp, gxp) = (rot(xx), rot(pp), rot(xp));
    let mut gamma = DMatrix::zeros(2 * n, 2 * n);
    gamma.view_mut((0, 0), (n, n)).copy_from(&gx);
    gamma.view_mut((n, n), (n, n)).copy_from(&gp);
    gamma.view_mut((0, n), (n, n)).copy_from(&gxp);
    gamma.view_mut((n, 0), (n, n)).copy_from(&gxp.transpose());
    CovarianceState { gamma }
}

/// Ground state of the gapped chain: `⟨X_k²⟩ = 1/(2ω_k)`, `⟨P_k²⟩ = ω_k/2`.
pub fn ground_covariance(params: &ChainParams) -> Result<CovarianceState> {
    if !(params.omega_sq > 0.0) {
        return Err(ChainError::InvalidParameter(
            "ground state needs omega_sq > 0 (the pre-quench chain must be gapped)".into(),
        ));
    }
    let m = neumann_modes(params);
    let xx: Vec<f64> = m.frequencies.iter().map(|w| 0.5 / w).collect();
    let pp: Vec<f64> = m.frequencies.iter().map(|w| 0.5 * w).collect();
    Ok(assemble(&m.basis, &xx, &pp, &vec![0.0; params.n]))
}

/// Pre-quench ground state evolved with on-site strength `ω_f²` (same `κ`).
///
/// The Laplacian eigenbasis does not depend on `ω²`, so each mode evolves
/// independently with `X(t) = cX + sP`, `P(t) = −Ω²sX + cP`, where
/// `c = cos Ωt`, `s = sin(Ωt)/Ω` (`s = t` at `Ω = 0`).
#[derive(Debug, Clone)]
pub struct ChainQuench {
    pub params: ChainParams,
    pub omega_f_sq: f64,
    pub omega_i: Vec<f64>,
    pub omega_f: Vec<f64>,
    basis: DMatrix<f64>,
}

impl ChainQuench {
    pub fn new(params: ChainParams, omega_f_sq: f64) -> Result<Self> {
        if !(params.omega_sq > 0.0) {
            return Err(ChainError::InvalidParameter(
                "quench needs a gapped pre-quench chain (omega_sq > 0)".into(),
            ));
        }
        if !(omega_f_sq >= 0.0) || !omega_f_sq.is_finite() {
            return Err(ChainError::InvalidParameter(format!(
                "post-quench omega_f^2 must be finite and >= 0, got {omega_f_sq}"
            )));
        }
        let sq = |w2| mode_frequencies_sq(params.n, w2, params.kappa);
        Ok(Self {
            params,
            omega_f_sq,
            omega_i: sq(params.omega_sq).into_iter().map(f64::sqrt).collect(),
            omega_f: sq(omega_f_sq).into_iter().map(f64::sqrt).collect(),
            basis: cosine_basis(params.n),
        })
    }

    /// The usual quench to `ω_f = 0`.
    pub fn to_zero(params: ChainParams) -> Result<Self> {
        Self::new(params, 0.0)
    }

    /// `(⟨X_k²⟩, ⟨P_k²⟩, ⟨{X_k, P_k}⟩/2)` at time `t`.
    pub fn mode_moments(&self, k: usize, t: f64) -> (f64, f64, f64) {
        let wi = self.omega_i[k];
        let wf = self.omega_f[k];
        let (sn, c) = (wf * t).sin_cos();
        let s = if wf == 0.0 { t } else { sn / wf };
        let wf2 = wf * wf;
        let (x0, p0) = (0.5 / wi, 0.5 * wi);
        (
            c * c * x0 + s * s * p0,
            wf2 * wf2 * s * s * x0 + c * c * p0,
            -wf2 * s * c * x0 + s * c * p0,
        )
    }

    pub fn covariance(&self, t: f64) -> CovarianceState {
        let n = self.params.n;
        let (mut xx, mut pp, mut xp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for k in 0..n {
            (xx[k], pp[k], xp[k]) = self.mode_moments(k, t);
        }
        assemble(&self.basis, &xx, &pp, &xp)
    }

    /// `S_{N_A}(t)` on every time, evaluated in parallel.
    pub fn entropy_series(&self, ts: &[f64], n_a: usize) -> Result<Vec<f64>> {
        ts.par_iter()
            .map(|&t| half_chain_entropy(&self.covariance(t), n_a))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cho2::{entanglement_point, mode_variances, ChoQuench};
    use proptest::prelude::*;

    #[test]
    fn two_site_frequencies() {
        let m = neumann_modes(&ChainParams::new(2, 3.0, 4.0).unwrap());
        assert!((m.frequencies[0] - 3f64.sqrt()).abs() < 1e-14);
        assert!((m.frequencies[1] - 11f64.sqrt()).abs() < 1e-14);
        let m = neumann_modes(&ChainParams::new(7, 2.0, 0.0).unwrap());
        assert!(m.frequencies.iter().all(|w| (w - 2f64.sqrt()).abs() < 1e-15));
    }

    #[test]
    fn cosine_basis_diagonalizes_coupling() {
        for (n, w2, k) in [(8, 0.7, 1.9), (8, 3.1, 0.2), (5, 1.0, 2.5)] {
            let p = ChainParams::new(n, w2, k).unwrap();
            let m = neumann_modes(&p);
            let f = &m.basis;
            assert!((f.transpose() * f - DMatrix::identity(n, n)).amax() < 1e-13);
            let d = f.transpose() * coupling_matrix(n, w2, k) * f;
            for a in 0..n {
                for b in 0..n {
                    let want = if a == b { m.frequencies[a].powi(2) } else { 0.0 };
                    assert!((d[(a, b)] - want).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn ground_state_moments() {
        let p = ChainParams::new(2, 10.0, 100.0).unwrap();
        let g = ground_covariance(&p).unwrap();
        let v = mode_variances(&ChoQuench::frequency_quench(10.0, 100.0).unwrap(), 0.0).unwrap();
        // x₁ = (x₊ + x₋)/√2
        let x1 = 0.5 * (v.sigma_x_plus.powi(2) + v.sigma_x_minus.powi(2));
        let p1 = 0.5 * (v.sigma_p_plus.powi(2) + v.sigma_p_minus.powi(2));
        assert!((g.gamma[(0, 0)] - x1).abs() < 1e-14);
        assert!((g.gamma[(2, 2)] - p1).abs() < 1e-13);

        let g = ground_covariance(&ChainParams::new(4, 4.0, 0.0).unwrap()).unwrap();
        for a in 0..8 {
            for b in 0..8 {
                let want = match (a == b, a < 4) {
                    (false, _) => 0.0,
                    (true, true) => 0.25,
                    (true, false) => 1.0,
                };
                assert!((g.gamma[(a, b)] - want).abs() < 1e-14);
            }
        }
        assert!(ground_covariance(&ChainParams::new(4, 0.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn ground_state_is_pure() {
        let g = ground_covariance(&ChainParams::new(12, 1.5, 0.5).unwrap()).unwrap();
        for nu in g.symplectic_spectrum().unwrap() {
            assert!((nu - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_function_values() {
        assert_eq!(gaussian_entropy(&[0.5]).unwrap(), 0.0);
        let want = 1.5 * 1.5f64.ln() - 0.5 * 0.5f64.ln();
        assert!((gaussian_entropy(&[1.0]).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.9548).abs() < 1e-4);
        assert!(gaussian_entropy(&[0.49]).is_err());
    }

    #[test]
    fn uncoupled_chain_has_no_entanglement() {
        let q = ChainQuench::to_zero(ChainParams::new(6, 2.0, 0.0).unwrap()).unwrap();
        for t in [0.0, 1.0, 30.0] {
            // ν − ½ carries a rounding error of order ε·cond(γ), which grows like t²
            assert!(half_chain_entropy(&q.covariance(t), 3).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn initial_covariance_is_ground_state() {
        let p = ChainParams::new(6, 1.5, 0.5).unwrap();
        let q = ChainQuench::to_zero(p).unwrap();
        assert!((q.covariance(0.0).gamma - ground_covariance(&p).unwrap().gamma).amax() < 1e-15);
    }

    #[test]
    fn zero_mode_spreads_ballistically() {
        let (w2, t) = (1.5, 7.0);
        let q = ChainQuench::to_zero(ChainParams::new(10, w2, 0.5).unwrap()).unwrap();
        let (xx, pp, _) = q.mode_moments(0, t);
        let w = w2.sqrt();
        assert!((xx - (1.0 + w2 * t * t) / (2.0 * w)).abs() < 1e-13);
        assert!((pp - w / 2.0).abs() < 1e-15);
    }

    /// `dγ/dt = Aγ + γAᵀ` with `A = [[0, 𝟙], [−K_f, 0]]`, integrated by RK4.
    fn rk4_covariance(p: &ChainParams, wf2: f64, t: f64, steps: usize) -> DMatrix<f64> {
        let n = p.n;
        let mut a = DMatrix::zeros(2 * n, 2 * n);
        a.view_mut((0, n), (n, n)).copy_from(&DMatrix::identity(n, n));
        a.view_mut((n, 0), (n, n)).copy_from(&(-coupling_matrix(n, wf2, p.kappa)));
        let rhs = |g: &DMatrix<f64>| &a * g + g * a.transpose();
        let mut g = ground_covariance(p).unwrap().gamma;
        let h = t / steps as f64;
        for _ in 0..steps {
            let k1 = rhs(&g);
            let k2 = rhs(&(&g + &k1 * (h / 2.0)));
            let k3 = rhs(&(&g + &k2 * (h / 2.0)));
            let k4 = rhs(&(&g + &k3 * h));
            g += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        g
    }

    #[test]
    fn closed_form_matches_heisenberg_ode() {
        let p = ChainParams::new(5, 1.5, 0.5).unwrap();
        for wf2 in [0.0, 0.4] {
            let q = ChainQuench::new(p, wf2).unwrap();
            let t = 6.0;
            let ode = rk4_covariance(&p, wf2, t, 6000);
            let exact = q.covariance(t).gamma;
            assert!((ode - &exact).amax() < 1e-9 * exact.amax());
        }
    }

    #[test]
    fn two_site_chain_matches_mehler_formula() {
        let p = ChainParams::new(2, 10.0, 100.0).unwrap();
        let q = ChainQuench::to_zero(p).unwrap();
        let cho = ChoQuench::frequency_quench(10.0, 100.0).unwrap();
        let mut worst = 0.0f64;
        for k in 0..=400 {
            let t = 0.25 * k as f64;
            let s = half_chain_entropy(&q.covariance(t), 1).unwrap();
            worst = worst.max((s - entanglement_point(&cho, t).unwrap().entropy).abs());
        }
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn stable_quench_stays_bounded() {
        let q = ChainQuench::new(ChainParams::new(8, 2.0, 1.0).unwrap(), 0.5).unwrap();
        let early: Vec<f64> = (0..200).map(|k| 0.1 * k as f64).collect();
        let late: Vec<f64> = (0..200).map(|k| 200.0 + 0.1 * k as f64).collect();
        let max = |v: Vec<f64>| v.into_iter().fold(0.0f64, f64::max);
        let a = max(q.entropy_series(&early, 4).unwrap());
        let b = max(q.entropy_series(&late, 4).unwrap());
        assert!(a > 0.0 && b < 1.5 * a);
    }

    #[test]
    fn invalid_cuts() {
        let g = ground_covariance(&ChainParams::new(4, 1.0, 1.0).unwrap()).unwrap();
        assert!(half_chain_entropy(&g, 0).is_err());
        assert!(half_chain_entropy(&g, 4).is_err());
        assert!(ChainParams::new(1, 1.0, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn purity_and_complementarity(
            n in 2usize..9,
            w2 in 0.2f64..5.0,
            k in 0.0f64..3.0,
            wf2 in prop_oneof![Just(0.0), 0.0f64..2.0],
            t in 0.0f64..40.0,
        ) {
            let q = ChainQuench::new(ChainParams::new(n, w2, k).unwrap(), wf2).unwrap();
            let g = q.covariance(t);
            let nus = g.symplectic_spectrum().unwrap();
            prop_assert!(nus.iter().all(|nu| (nu - 0.5).abs() < 1e-9));
            let n_a = n / 2;
            let left = half_chain_entropy(&g, n_a).unwrap();
            let right_sites: Vec<usize> = (n_a..n).collect();
            let right = gaussian_entropy(&g.reduced(&right_sites).symplectic_spectrum().unwrap()).unwrap();
            prop_assert!((left - right).abs() < 1e-9 * (1.0 + left));
        }
    }
}
