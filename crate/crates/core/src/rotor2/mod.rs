//! Two coupled quantum rotors in a truncated angular-momentum basis.
//!
//! States live on `(p₁, p₂) ∈ {−M..M}²`, flattened row-major with `p₁` as the
//! slow index. The Hamiltonian is
//! `½(p₁² + p₂²) + ω²(2 − cos x₁ − cos x₂) + κ(1 − cos(x₁ − x₂))`, where every
//! cosine acts as a pair of unit momentum shifts.

mod dynamics;
mod observables;
mod spectra;

pub use dynamics::{evolve, evolve_krylov, BlockSpectrum, MomentumBlock, Propagator};
pub use observables::{
    entanglement_entropy, expectation_cos, momentum_marginal, parity_weights, position_kernel,
    reduce_site, total_momentum_distribution, CosOperator, PositionKernel, ReducedDensityMatrix,
    Site,
};
pub use spectra::{post_quench_spectra, relative_hamiltonian, PostQuenchSpectrum, RelativeSector};

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{
    eig_sym, lanczos_ground_from, norm_c, CsrMatrix, LanczosOptions, NumericsError,
};

#[derive(Debug, Error)]
pub enum Rotor2Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("position grid of {n_x} points is too coarse, need at least {min}")]
    GridTooCoarse { n_x: usize, min: usize },
    #[error("truncation not converged: {0}")]
    Truncation(String),
    #[error("reduced density matrix has eigenvalue {0} below tolerance")]
    NegativeEigenvalue(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, Rotor2Error>;

pub type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: i64) -> Self {
        if n.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Centre-of-mass and relative quantum numbers of a product momentum state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorLabel {
    pub p: i64,
    pub d: i64,
    pub parity: Parity,
}

impl SectorLabel {
    pub fn from_momenta(p1: i64, p2: i64) -> Self {
        let p = p1 + p2;
        Self {
            p,
            d: p1 - p2,
            parity: Parity::of(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorParams {
    pub omega_sq: f64,
    pub kappa: f64,
    pub m: usize,
}

impl RotorParams {
    pub fn new(omega_sq: f64, kappa: f64, m: usize) -> Result<Self> {
        if !(omega_sq >= 0.0) || !omega_sq.is_finite() {
            return Err(Rotor2Error::InvalidParameter(format!(
                "omega_sq must be finite and >= 0, got {omega_sq}"
            )));
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Rotor2Error::InvalidParameter(format!(
                "kappa must be finite and >= 0, got {kappa}"
            )));
        }
        if m < 1 {
            return Err(Rotor2Error::InvalidParameter("cutoff M must be >= 1".into()));
        }
        Ok(Self { omega_sq, kappa, m })
    }

    pub fn with_cutoff(&self, m: usize) -> Self {
        Self { m, ..*self }
    }

    pub fn side(&self) -> usize {
        2 * self.m + 1
    }

    pub fn dim(&self) -> usize {
        self.side() * self.side()
    }
}

/// Flat index of `(p₁, p₂)` for cutoff `m`, or `None` outside the window.
pub fn basis_index(m: usize, p1: i64, p2: i64) -> Option<usize> {
    let mi = m as i64;
    if p1.abs() > mi || p2.abs() > mi {
        return None;
    }
    let side = 2 * m + 1;
    Some((p1 + mi) as usize * side + (p2 + mi) as usize)
}

pub fn basis_momenta(m: usize, index: usize) -> (i64, i64) {
    let side = 2 * m + 1;
    let mi = m as i64;
    ((index / side) as i64 - mi, (index % side) as i64 - mi)
}

/// Normalized amplitudes `c(p₁, p₂)` on the truncated grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    m: usize,
    amps: Vec<C64>,
}

impl WaveFunction {
    /// Wrap amplitudes, normalizing them. Fails on length mismatch or zero norm.
    pub fn new(m: usize, amps: Vec<C64>) -> Result<Self> {
        let side = 2 * m + 1;
        if amps.len() != side * side {
            return Err(Rotor2Error::DimensionMismatch {
                expected: side * side,
                got: amps.len(),
            });
        }
        let n = norm_c(&amps);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Rotor2Error::InvalidParameter("state has zero or non-finite norm".into()));
        }
        Ok(Self {
            m,
            amps: amps.into_iter().map(|c| c / n).collect(),
        })
    }

    pub fn basis_state(m: usize, p1: i64, p2: i64) -> Result<Self> {
        let side = 2 * m + 1;
        let i = basis_index(m, p1, p2).ok_or_else(|| {
            Rotor2Error::InvalidParameter(format!("({p1}, {p2}) outside cutoff {m}"))
        })?;
        let mut amps = vec![C64::new(0.0, 0.0); side * side];
        amps[i] = C64::new(1.0, 0.0);
        Ok(Self { m, amps })
    }

    /// Product state `a(p₁) b(p₂)`.
    pub fn product(m: usize, a: &[C64], b: &[C64]) -> Result<Self> {
        let side = 2 * m + 1;
        if a.len() != side || b.len() != side {
            return Err(Rotor2Error::DimensionMismatch {
                expected: side,
                got: a.len().min(b.len()),
            });
        }
        let amps = a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect();
        Self::new(m, amps)
    }

    pub(crate) fn from_normalized(m: usize, amps: Vec<C64>) -> Self {
        Self { m, amps }
    }

    pub fn cutoff(&self) -> usize {
        self.m
    }

    pub fn side(&self) -> usize {
        2 * self.m + 1
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, p1: i64, p2: i64) -> C64 {
        basis_index(self.m, p1, p2).map_or(C64::new(0.0, 0.0), |i| self.amps[i])
    }

    pub fn norm(&self) -> f64 {
        norm_c(&self.amps)
    }

    /// Weight on the outermost momentum shell `|p₁| = M` or `|p₂| = M`.
    pub fn boundary_weight(&self) -> f64 {
        let mi = self.m as i64;
        self.amps
            .iter()
            .enumerate()
            .filter(|&(i, _)| {
                let (p1, p2) = basis_momenta(self.m, i);
                p1.abs() == mi || p2.abs() == mi
            })
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }

    /// Amplitude matrix with rows indexed by `p₁` and columns by `p₂`.
    pub fn as_matrix(&self) -> DMatrix<C64> {
        let s = self.side();
        DMatrix::from_row_slice(s, s, &self.amps)
    }

    /// Embed into a larger cutoff, padding with zeros.
    pub fn embed(&self, m_new: usize) -> Result<Self> {
        if m_new < self.m {
            return Err(Rotor2Error::InvalidParameter(format!(
                "cannot embed cutoff {} into smaller cutoff {m_new}",
                self.m
            )));
        }
        let side = 2 * m_new + 1;
        let mut amps = vec![C64::new(0.0, 0.0); side * side];
        for (i, &c) in self.amps.iter().enumerate() {
            let (p1, p2) = basis_momenta(self.m, i);
            amps[basis_index(m_new, p1, p2).unwrap()] = c;
        }
        Ok(Self { m: m_new, amps })
    }

    pub fn overlap(&self, other: &WaveFunction) -> Result<C64> {
        if self.amps.len() != other.amps.len() {
            return Err(Rotor2Error::DimensionMismatch {
                expected: self.amps.len(),
                got: other.amps.len(),
            });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }
}

/// Sparse Hamiltonian with on-site strength `on_site_sq` (use `params.omega_sq`
/// before the quench and `0` after it) and coupling `params.kappa`.
pub fn build_hamiltonian(params: &RotorParams, on_site_sq: f64) -> CsrMatrix {
    let m = params.m;
    let mi = m as i64;
    let side = params.side();
    let k = params.kappa;
    let w2 = on_site_sq;
    let mut trip = Vec::with_capacity(side * side * 7);
    for i in 0..side * side {
        let (p1, p2) = basis_momenta(m, i);
        let kin = 0.5 * ((p1 * p1 + p2 * p2) as f64);
        trip.push((i, i, kin + 2.0 * w2 + k));
        for (d1, d2, v) in [
            (1, 0, -0.5 * w2),
            (-1, 0, -0.5 * w2),
            (0, 1, -0.5 * w2),
            (0, -1, -0.5 * w2),
            (1, -1, -0.5 * k),
            (-1, 1, -0.5 * k),
        ] {
            let (q1, q2) = (p1 + d1, p2 + d2);
            if q1.abs() <= mi && q2.abs() <= mi && v != 0.0 {
                trip.push((i, basis_index(m, q1, q2).unwrap(), v));
            }
        }
    }
    CsrMatrix::from_triplets(side * side, trip)
}

/// Diagonal total-momentum operator `p₁ + p₂` on the truncated grid.
pub fn total_momentum_operator(m: usize) -> CsrMatrix {
    let side = 2 * m + 1;
    let trip = (0..side * side)
        .map(|i| {
            let (p1, p2) = basis_momenta(m, i);
            (i, i, (p1 + p2) as f64)
        })
        .collect();
    CsrMatrix::from_triplets(side * side, trip)
}

#[derive(Debug, Clone, Copy)]
pub struct GroundStateOptions {
    /// Dense diagonalization up to this dimension, restarted Lanczos above.
    pub dense_max_dim: usize,
    pub lanczos: LanczosOptions,
    /// Boundary weight above which a truncation warning is attached.
    pub truncation_tol: f64,
    /// Relative symmetry tolerance for the dense path.
    pub sym_tol: f64,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        Self {
            dense_max_dim: 625,
            lanczos: LanczosOptions {
                tol: 1e-11,
                ..LanczosOptions::default()
            },
            truncation_tol: 1e-10,
            sym_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationWarning {
    pub boundary_weight: f64,
    pub tol: f64,
    pub suggested_m: usize,
}

impl std::fmt::Display for TruncationWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "boundary weight {:.3e} exceeds {:.1e}; try M >= {}",
            self.boundary_weight, self.tol, self.suggested_m
        )
    }
}

#[derive(Debug, Clone)]
pub struct RotorGround {
    pub energy: f64,
    pub psi: WaveFunction,
    pub boundary_weight: f64,
    pub warning: Option<TruncationWarning>,
}

/// Lowest eigenpair of `h`, a Hamiltonian on cutoff `m`. The global phase is
/// fixed so the largest amplitude is real and positive.
pub fn ground_state(h: &CsrMatrix, m: usize, opts: &GroundStateOptions) -> Result<RotorGround> {
    let side = 2 * m + 1;
    let dim = side * side;
    if h.dim() != dim {
        return Err(Rotor2Error::DimensionMismatch {
            expected: dim,
            got: h.dim(),
        });
    }
    let (energy, mut vec) = if dim <= opts.dense_max_dim {
        let d = eig_sym(&h.to_dense(), opts.sym_tol)?;
        (d.eigenvalues[0], d.eigenvectors.column(0).iter().copied().collect::<Vec<_>>())
    } else {
        // a smooth positive start overlaps the nodeless ground state strongly
        let start: Vec<f64> = (0..dim)
            .map(|i| {
                let (p1, p2) = basis_momenta(m, i);
                (-((p1 * p1 + p2 * p2) as f64) / (1.0 + m as f64)).exp() + 1e-3
            })
            .collect();
        let gs = lanczos_ground_from(|x, y| h.apply(x, y), &start, &opts.lanczos)?;
        (gs.energy, gs.state)
    };
    let pivot = vec
        .iter()
        .copied()
        .fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
    if pivot < 0.0 {
        vec.iter_mut().for_each(|v| *v = -*v);
    }
    let psi = WaveFunction::new(m, vec.into_iter().map(|v| C64::new(v, 0.0)).collect())?;
    let boundary_weight = psi.boundary_weight();
    let warning = (boundary_weight > opts.truncation_tol).then(|| TruncationWarning {
        boundary_weight,
        tol: opts.truncation_tol,
        suggested_m: m + m.max(4),
    });
    Ok(RotorGround {
        energy,
        psi,
        boundary_weight,
        warning,
    })
}

/// Cutoff ladder `M_k = 4 + margin·2ᵏ` with `margin = ceil(2 (ω² + 2κ)^{1/4})`.
pub fn cutoff_ladder(omega_sq: f64, kappa: f64, steps: usize) -> Vec<usize> {
    let margin = (2.0 * (omega_sq + 2.0 * kappa).powf(0.25)).ceil().max(1.0) as usize;
    (0..steps).map(|k| 4 + margin * (1usize << k)).collect()
}

#[derive(Debug, Clone)]
pub struct AutoCutoff {
    pub params: RotorParams,
    pub ground: RotorGround,
    /// Every cutoff tried, with the boundary weight it produced.
    pub trail: Vec<(usize, f64)>,
}

/// Escalate the cutoff along [`cutoff_ladder`] until the pre-quench ground
/// state has boundary weight below `opts.truncation_tol`.
pub fn auto_cutoff(
    omega_sq: f64,
    kappa: f64,
    max_m: usize,
    opts: &GroundStateOptions,
) -> Result<AutoCutoff> {
    let mut trail = Vec::new();
    for m in cutoff_ladder(omega_sq, kappa, 8) {
        if m > max_m {
            break;
        }
        let params = RotorParams::new(omega_sq, kappa, m)?;
        let ground = ground_state(&build_hamiltonian(&params, omega_sq), m, opts)?;
        trail.push((m, ground.boundary_weight));
        if ground.warning.is_none() {
            return Ok(AutoCutoff {
                params,
                ground,
                trail,
            });
        }
    }
    Err(Rotor2Error::Truncation(format!(
        "no cutoff up to {max_m} reached boundary weight {:.1e} (tried {trail:?})",
        opts.truncation_tol
    )))
}

/// Pre-quench energy expectation `⟨ψ|H|ψ⟩` for any sparse operator.
pub fn expectation(h: &CsrMatrix, psi: &WaveFunction) -> f64 {
    let mut y = vec![C64::new(0.0, 0.0); h.dim()];
    h.apply_complex(psi.amplitudes(), &mut y);
    psi.amplitudes()
        .iter()
        .zip(&y)
        .map(|(a, b)| (a.conj() * b).re)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cho2::{ChoQuench, Mode};

    #[test]
    fn basis_round_trip() {
        for i in 0..25 {
            let (p1, p2) = basis_momenta(2, i);
            assert_eq!(basis_index(2, p1, p2), Some(i));
        }
        assert_eq!(basis_index(2, 3, 0), None);
    }

    #[test]
    fn matrix_elements() {
        let p = RotorParams::new(3.0, 5.0, 3).unwrap();
        let h = build_hamiltonian(&p, p.omega_sq);
        let at = |a: (i64, i64), b: (i64, i64)| {
            h.get(basis_index(3, a.0, a.1).unwrap(), basis_index(3, b.0, b.1).unwrap())
        };
        assert_eq!(at((1, 0), (0, 1)), -2.5);
        assert_eq!(at((0, 1), (1, 0)), -2.5);
        assert_eq!(at((1, 1), (0, 1)), -1.5);
        assert_eq!(at((1, 1), (0, 0)), 0.0);
        assert_eq!(at((2, -1), (2, -1)), 0.5 * 5.0 + 6.0 + 5.0);
        assert_eq!(h.max_asymmetry(), 0.0);
    }

    #[test]
    fn free_rotors() {
        let p = RotorParams::new(0.0, 0.0, 2).unwrap();
        let h = build_hamiltonian(&p, 0.0);
        // purely diagonal; the (0, 0) entry is an exact zero and is not stored
        assert_eq!(h.nnz(), 24);
        let g = ground_state(&h, 2, &GroundStateOptions::default()).unwrap();
        assert!(g.energy.abs() < 1e-14);
        assert!((g.psi.amplitude(0, 0).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coupling_conserves_total_momentum() {
        let p = RotorParams::new(4.0, 7.0, 4).unwrap();
        let c = build_hamiltonian(&p, 0.0).commutator(&total_momentum_operator(4));
        assert_eq!(c.max_abs(), 0.0);
        let c = build_hamiltonian(&p, 4.0).commutator(&total_momentum_operator(4));
        assert!(c.max_abs() > 0.0);
    }

    #[test]
    fn dense_and_lanczos_paths_agree() {
        let p = RotorParams::new(5.0, 10.0, 10).unwrap();
        let h = build_hamiltonian(&p, 5.0);
        let dense = ground_state(&h, 10, &GroundStateOptions::default()).unwrap();
        let sparse = ground_state(
            &h,
            10,
            &GroundStateOptions {
                dense_max_dim: 0,
                ..GroundStateOptions::default()
            },
        )
        .unwrap();
        assert!((dense.energy - sparse.energy).abs() < 1e-10);
        let ov = dense.psi.overlap(&sparse.psi).unwrap();
        assert!((ov.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ground_energy_is_cutoff_converged() {
        let opts = GroundStateOptions::default();
        let e = |m| {
            let p = RotorParams::new(10.0, 100.0, m).unwrap();
            ground_state(&build_hamiltonian(&p, 10.0), m, &opts).unwrap().energy
        };
        let (e20, e24) = (e(20), e(24));
        assert!((e20 - e24).abs() < 1e-8, "{e20} vs {e24}");
        // harmonic two-mode estimate minus a small anharmonic shift
        let q = ChoQuench::frequency_quench(10.0, 100.0).unwrap();
        let harmonic = 0.5 * (q.initial_frequency(Mode::Plus) + q.initial_frequency(Mode::Minus));
        assert!(e20 < harmonic && harmonic - e20 < 0.05 * harmonic);
    }

    #[test]
    fn auto_cutoff_ladder() {
        assert_eq!(cutoff_ladder(10.0, 100.0, 3), vec![12, 20, 36]);
        let a = auto_cutoff(10.0, 100.0, 40, &GroundStateOptions::default()).unwrap();
        assert_eq!(a.params.m, 20);
        assert!(a.ground.boundary_weight < 1e-10);
        assert_eq!(a.trail.len(), 2);
        assert!(a.trail[0].1 > 1e-10);
    }

    #[test]
    fn truncation_warning_suggests_larger_cutoff() {
        let p = RotorParams::new(10.0, 100.0, 4).unwrap();
        let g = ground_state(&build_hamiltonian(&p, 10.0), 4, &GroundStateOptions::default()).unwrap();
        let w = g.warning.expect("M = 4 is far too small here");
        assert!(w.suggested_m > 4);
    }

    #[test]
    fn wave_function_validation() {
        assert!(WaveFunction::new(1, vec![C64::new(1.0, 0.0); 8]).is_err());
        assert!(WaveFunction::new(1, vec![C64::new(0.0, 0.0); 9]).is_err());
        let psi = WaveFunction::new(1, vec![C64::new(2.0, 0.0); 9]).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-15);
        assert!((psi.boundary_weight() - 8.0 / 9.0).abs() < 1e-15);
        let big = psi.embed(3).unwrap();
        assert_eq!(big.amplitude(1, -1), psi.amplitude(1, -1));
        assert_eq!(big.boundary_weight(), 0.0);
    }
}
