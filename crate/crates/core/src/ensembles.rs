//! Stationary ensembles and entropy bounds for the two-rotor quench.
//!
//! After the quench the Hamiltonian splits into a free centre-of-mass rotor
//! `H₊ = P²/4` and a relative pendulum `H₋ = d²/4 + κ(1 − cos x₋)`, with the
//! torus constraint `P ≡ d (mod 2)`. Ensembles built here are reported through
//! the reduced state of rotor 1.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::numerics::{
    find_root_1d, find_root_2d, NumericsError, Root2dOptions, RootBracket,
};
use crate::rotor2::{
    auto_cutoff, basis_momenta, entanglement_entropy, expectation_cos, post_quench_spectra,
    reduce_site, BlockSpectrum, CosOperator, GroundStateOptions, Propagator,
    ReducedDensityMatrix, RelativeSector, Rotor2Error, WaveFunction, C64,
};

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{what} energy {energy} cannot be reached")]
    Unreachable { what: &'static str, energy: f64 },
    #[error(transparent)]
    Rotor2(#[from] Rotor2Error),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, EnsembleError>;

/// One unnormalized pure component `|C⟩` of a mixture `ρ = Σ |C⟩⟨C|`.
#[derive(Debug, Clone)]
pub struct Component {
    pub energy: f64,
    /// Sparse amplitudes on the flat two-rotor basis.
    pub amps: Vec<(usize, C64)>,
}

/// A stationary state stored as a mixture of sparse components.
#[derive(Debug, Clone)]
pub struct EnsembleState {
    m: usize,
    components: Vec<Component>,
}

impl EnsembleState {
    pub fn cutoff(&self) -> usize {
        self.m
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn trace(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.amps.iter())
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// `ρ₁ = Tr₂ ρ`, accumulated component by component.
    pub fn reduced(&self) -> ReducedDensityMatrix {
        let side = 2 * self.m + 1;
        let mut rho = DMatrix::zeros(side, side);
        let mut by_p2: Vec<Vec<(usize, C64)>> = vec![Vec::new(); side];
        for comp in &self.components {
            by_p2.iter_mut().for_each(Vec::clear);
            for &(i, a) in &comp.amps {
                by_p2[i % side].push((i / side, a));
            }
            for col in &by_p2 {
                for &(r, a) in col {
                    for &(s, b) in col {
                        rho[(r, s)] += a * b.conj();
                    }
                }
            }
        }
        ReducedDensityMatrix {
            m: self.m,
            entries: rho,
        }
    }

    /// Entanglement entropy of the reduced state, in nats.
    pub fn entropy(&self) -> Result<f64> {
        Ok(entanglement_entropy(&self.reduced())?)
    }

    /// Full density matrix; only sensible for small cutoffs.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let dim = (2 * self.m + 1).pow(2);
        let mut rho = DMatrix::zeros(dim, dim);
        for comp in &self.components {
            for &(i, a) in &comp.amps {
                for &(j, b) in &comp.amps {
                    rho[(i, j)] += a * b.conj();
                }
            }
        }
        rho
    }
}

/// Overlaps `⟨n|ψ₀⟩` flattened in [`BlockSpectrum::eigenpairs`] order.
fn populations(spec: &BlockSpectrum, psi0: &WaveFunction) -> Result<Vec<(f64, Vec<(usize, f64)>, C64)>> {
    let coeffs = spec.project(psi0)?;
    Ok(spec
        .eigenpairs()
        .into_iter()
        .zip(coeffs.into_iter().flatten())
        .map(|((e, _, v), c)| (e, v, c))
        .collect())
}

/// `ρ_DE = Σₙ |⟨n|ψ₀⟩|² |n⟩⟨n|` over the post-quench eigenbasis.
pub fn diagonal_ensemble(spec: &BlockSpectrum, psi0: &WaveFunction) -> Result<EnsembleState> {
    let components = populations(spec, psi0)?
        .into_iter()
        .filter(|(_, _, c)| c.norm_sqr() > 0.0)
        .map(|(energy, v, c)| Component {
            energy,
            amps: v.into_iter().map(|(i, a)| (i, c * a)).collect(),
        })
        .collect();
    Ok(EnsembleState {
        m: spec.cutoff(),
        components,
    })
}

/// Like [`diagonal_ensemble`], but coherences between eigenstates with
/// `|E_m − E_n| ≤ deg_tol·max(1, |E|)` survive. Degenerate levels are chained
/// in energy order, so a cluster may be wider than one tolerance.
pub fn block_diagonal_ensemble(
    spec: &BlockSpectrum,
    psi0: &WaveFunction,
    deg_tol: f64,
) -> Result<EnsembleState> {
    if !(deg_tol >= 0.0) || !deg_tol.is_finite() {
        return Err(EnsembleError::InvalidParameter(format!(
            "degeneracy tolerance must be finite and >= 0, got {deg_tol}"
        )));
    }
    let mut pops = populations(spec, psi0)?;
    pops.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut components = Vec::new();
    let mut start = 0;
    while start < pops.len() {
        let mut end = start + 1;
        while end < pops.len() {
            let (prev, next) = (pops[end - 1].0, pops[end].0);
            if next - prev > deg_tol * prev.abs().max(1.0) {
                break;
            }
            end += 1;
        }
        let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
        for (_, v, c) in &pops[start..end] {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            for &(i, a) in v {
                *acc.entry(i).or_default() += c * a;
            }
        }
        if !acc.is_empty() {
            components.push(Component {
                energy: pops[start].0,
                amps: acc.into_iter().collect(),
            });
        }
        start = end;
    }
    Ok(EnsembleState {
        m: spec.cutoff(),
        components,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedEnergies {
    pub plus: f64,
    pub minus: f64,
}

impl ConservedEnergies {
    pub fn total(&self) -> f64 {
        self.plus + self.minus
    }
}

/// `E₊ = ⟨P²/4⟩` and `E₋ = ⟨d²/4⟩ + κ(1 − ⟨cos(x₁ − x₂)⟩)` in the state `ψ₀`.
pub fn conserved_energies(psi0: &WaveFunction, kappa: f64) -> ConservedEnergies {
    let m = psi0.cutoff();
    let (mut plus, mut kin) = (0.0, 0.0);
    for (i, c) in psi0.amplitudes().iter().enumerate() {
        let (p1, p2) = basis_momenta(m, i);
        let w = c.norm_sqr();
        plus += w * ((p1 + p2) * (p1 + p2)) as f64 / 4.0;
        kin += w * ((p1 - p2) * (p1 - p2)) as f64 / 4.0;
    }
    ConservedEnergies {
        plus,
        minus: kin + kappa * (1.0 - expectation_cos(psi0, CosOperator::Diff)),
    }
}

/// Largest `|P|` kept in a zero-mode sum at multiplier `λ₊` (tail below `e^{−40}`).
fn zero_mode_cut(lambda_plus: f64) -> i64 {
    (160.0 / lambda_plus).sqrt().ceil() as i64 + 2
}

/// `(Z, Σ E e^{−λE})` of the zero mode, split into even and odd `P`.
fn zero_mode_sums(lambda_plus: f64) -> [(f64, f64); 2] {
    if lambda_plus.is_infinite() {
        return [(1.0, 0.0), (0.0, 0.0)];
    }
    let mut out = [(0.0, 0.0); 2];
    for p in -zero_mode_cut(lambda_plus)..=zero_mode_cut(lambda_plus) {
        let e = (p * p) as f64 / 4.0;
        let w = (-lambda_plus * e).exp();
        let s = &mut out[p.rem_euclid(2) as usize];
        s.0 += w;
        s.1 += e * w;
    }
    out
}

/// Same for one relative sector, energies measured from `e_min`.
fn relative_sums(sector: &RelativeSector, lambda_minus: f64, e_min: f64) -> (f64, f64) {
    sector.levels().iter().fold((0.0, 0.0), |(z, y), &e| {
        let x = e - e_min;
        let w = (-lambda_minus * x).exp();
        (z + w, y + x * w)
    })
}

/// Lagrange multipliers of the parity-constrained generalized Gibbs ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgeSolution {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    /// Reproduced minus target energies, `(δE₊, δE₋)`.
    pub residuals: (f64, f64),
}

struct GgeModel {
    even: RelativeSector,
    odd: RelativeSector,
    e_min: f64,
}

impl GgeModel {
    fn new(kappa: f64, m: usize) -> Result<Self> {
        let s = post_quench_spectra(kappa, m)?;
        let e_min = s.even.levels()[0].min(s.odd.levels()[0]);
        Ok(Self {
            even: s.even,
            odd: s.odd,
            e_min,
        })
    }

    /// `(⟨H₊⟩, ⟨H₋⟩ − e_min)` of the ensemble.
    fn energies(&self, lambda_plus: f64, lambda_minus: f64) -> (f64, f64) {
        let [(zpe, ype), (zpo, ypo)] = zero_mode_sums(lambda_plus);
        let (zme, yme) = relative_sums(&self.even, lambda_minus, self.e_min);
        let (zmo, ymo) = relative_sums(&self.odd, lambda_minus, self.e_min);
        let z = zpe * zme + zpo * zmo;
        ((ype * zme + ypo * zmo) / z, (zpe * yme + zpo * ymo) / z)
    }
}

fn log_ratio(model: f64, target: f64) -> f64 {
    model.max(f64::MIN_POSITIVE).ln() - target.ln()
}

/// Fix `λ±` so that `Tr(ρ_GGE H_{f,±}) = E±`. The relative spectrum is taken
/// on `|d| ≤ 2M`; `E₊ = 0` gives `λ₊ = ∞` (all weight on `P = 0`).
pub fn gge_solve(kappa: f64, m: usize, e_plus: f64, e_minus: f64) -> Result<GgeSolution> {
    if !(e_plus >= 0.0) || !e_plus.is_finite() || !e_minus.is_finite() {
        return Err(EnsembleError::InvalidParameter(format!(
            "need finite E+ >= 0 and finite E-, got ({e_plus}, {e_minus})"
        )));
    }
    let model = GgeModel::new(kappa, m)?;
    let excess = e_minus - model.e_min;
    if !(excess > 0.0) {
        return Err(EnsembleError::Unreachable {
            what: "relative",
            energy: e_minus,
        });
    }
    // harmonic-spacing guess for λ₋
    let gap = model.even.lowest_gap().max(1e-3);
    let lm0 = (1.0 + gap / excess).ln() / gap;
    let (lambda_plus, lambda_minus) = if e_plus == 0.0 {
        let g = |v: f64| log_ratio(model.energies(f64::INFINITY, v.exp()).1, excess);
        let v = expand_and_solve(g, lm0.ln())?;
        (f64::INFINITY, v.exp())
    } else {
        let f = |u: f64, v: f64| {
            let (ep, xm) = model.energies(u.exp(), v.exp());
            (log_ratio(ep, e_plus), log_ratio(xm, excess))
        };
        let opts = Root2dOptions {
            tol: 1e-12,
            ..Root2dOptions::default()
        };
        let (u, v) = find_root_2d(f, ((0.5 / e_plus).ln(), lm0.ln()), &opts)?;
        (u.exp(), v.exp())
    };
    let (ep, xm) = model.energies(lambda_plus, lambda_minus);
    Ok(GgeSolution {
        lambda_plus,
        lambda_minus,
        e_plus,
        e_minus,
        residuals: (ep - e_plus, xm + model.e_min - e_minus),
    })
}

/// Bracket a sign change of a monotone `g` by unit steps from `x0`, then Brent.
fn expand_and_solve<G: Fn(f64) -> f64>(g: G, x0: f64) -> Result<f64> {
    let g0 = g(x0);
    if g0 == 0.0 {
        return Ok(x0);
    }
    // both residuals used here decrease with their argument
    let dir = if g0 > 0.0 { 1.0 } else { -1.0 };
    let mut a = x0;
    for _ in 0..200 {
        let b = a + dir;
        if g(b) * g0 <= 0.0 {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            return Ok(find_root_1d(&g, RootBracket { lo, hi }, 1e-14)?);
        }
        a = b;
    }
    Err(NumericsError::NoConvergence {
        what: "bracket expansion",
        iterations: 200,
    }
    .into())
}

/// Diagonal reduced GGE state `λ_{p₁}`.
#[derive(Debug, Clone)]
pub struct ReducedGge {
    /// `(p₁, λ_{p₁})`, ascending in `p₁`, summing to one.
    pub weights: Vec<(i64, f64)>,
    pub entropy: f64,
    /// Relative-sector weight on the outermost momenta `|d| = 2M`, `2M − 1`.
    pub edge_weight: f64,
}

/// `λ_{p₁} = Z⁻¹ Σ_P e^{−λ₊P²/4} Σₙ e^{−λ₋Eₙ} |φₙ(2p₁ − P)|²`, with `n`
/// running over the relative sector of the same parity as `P`.
pub fn gge_reduced_state(g: &GgeSolution, kappa: f64, m: usize) -> Result<ReducedGge> {
    let model = GgeModel::new(kappa, m)?;
    // r_s(d) for both sectors, indexed like the sector's d_values
    let profile = |s: &RelativeSector| -> Vec<f64> {
        let mut r = vec![0.0; s.d_values.len()];
        for (n, &e) in s.levels().iter().enumerate() {
            let w = (-g.lambda_minus * (e - model.e_min)).exp();
            if w == 0.0 {
                continue;
            }
            for (k, rk) in r.iter_mut().enumerate() {
                *rk += w * s.decomposition.eigenvectors[(k, n)].powi(2);
            }
        }
        r
    };
    let sectors = [(&model.even, profile(&model.even)), (&model.odd, profile(&model.odd))];
    let pcut = if g.lambda_plus.is_infinite() { 0 } else { zero_mode_cut(g.lambda_plus) };
    let dmax = 2 * m as i64;
    let p1_max = (pcut + dmax) / 2 + 1;
    let mut lam = vec![0.0; (2 * p1_max + 1) as usize];
    let mut edge = 0.0;
    for p in -pcut..=pcut {
        let w = if p == 0 { 1.0 } else { (-g.lambda_plus * (p * p) as f64 / 4.0).exp() };
        let (sector, r) = &sectors[p.rem_euclid(2) as usize];
        for (&d, &rd) in sector.d_values.iter().zip(r) {
            let p1 = (p + d) / 2;
            lam[(p1 + p1_max) as usize] += w * rd;
            if d.abs() >= dmax - 1 {
                edge += w * rd;
            }
        }
    }
    let z: f64 = lam.iter().sum();
    let weights: Vec<(i64, f64)> = lam
        .iter()
        .enumerate()
        .map(|(k, &x)| (k as i64 - p1_max, x / z))
        .collect();
    let entropy = weights
        .iter()
        .filter(|w| w.1 > 0.0)
        .map(|w| -w.1 * w.1.ln())
        .sum();
    Ok(ReducedGge {
        weights,
        entropy,
        edge_weight: edge / z,
    })
}

/// Single-site GGE entropy. Fails if the relative cutoff carries weight above
/// `1e-8`, since the ensemble would then feel the truncation.
pub fn gge_reduced_entropy(g: &GgeSolution, kappa: f64, m: usize) -> Result<f64> {
    let r = gge_reduced_state(g, kappa, m)?;
    if r.edge_weight > 1e-8 {
        return Err(Rotor2Error::Truncation(format!(
            "GGE relative weight {:.3e} at |d| = 2M with M = {m}",
            r.edge_weight
        ))
        .into());
    }
    Ok(r.entropy)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenGge {
    pub lambda_plus: f64,
    pub entropy: f64,
}

/// GGE with the relative mode frozen in its Gaussian ground state: even `P`
/// only, `w_P ∝ e^{−λ₊P²/4}`, `|c_d|² ∝ exp(−d²/2ω_{i,−})` for even `d`.
pub fn frozen_gge(omega_sq: f64, kappa: f64, e_plus: f64) -> Result<FrozenGge> {
    if !(omega_sq >= 0.0) || !(kappa >= 0.0) || !(omega_sq + kappa > 0.0) || !(e_plus > 0.0) {
        return Err(EnsembleError::InvalidParameter(format!(
            "need omega_sq, kappa >= 0 (not both zero) and E+ > 0, got ({omega_sq}, {kappa}, {e_plus})"
        )));
    }
    let even_energy = |lp: f64| {
        let [(z, y), _] = zero_mode_sums(lp);
        y / z
    };
    let u = expand_and_solve(|u| log_ratio(even_energy(u.exp()), e_plus), (0.5 / e_plus).ln())?;
    let lambda_plus = u.exp();
    let w_minus = (omega_sq + 2.0 * kappa).sqrt();

    let pcut = zero_mode_cut(lambda_plus);
    let dcut = (80.0 * w_minus).sqrt().ceil() as i64 + 2;
    let w: Vec<(i64, f64)> = (-pcut..=pcut)
        .filter(|p| p % 2 == 0)
        .map(|p| (p, (-lambda_plus * (p * p) as f64 / 4.0).exp()))
        .collect();
    let c = |d: i64| (-((d * d) as f64) / (2.0 * w_minus)).exp();
    let zw: f64 = w.iter().map(|x| x.1).sum();
    let zc: f64 = (-dcut..=dcut).filter(|d| d % 2 == 0).map(c).sum();
    let mmax = (pcut + dcut) / 2 + 1;
    let entropy = (-mmax..=mmax)
        .map(|m1| {
            w.iter()
                .filter(|(p, _)| (2 * m1 - p).abs() <= dcut)
                .map(|&(p, wp)| wp * c(2 * m1 - p))
                .sum::<f64>()
                / (zw * zc)
        })
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.ln())
        .sum();
    Ok(FrozenGge {
        lambda_plus,
        entropy,
    })
}

/// Closed-form ceiling `½ ln[(πe/2)(ω + √(ω² + 2κ))]`.
pub fn analytic_gge_estimate(omega: f64, kappa: f64) -> Result<f64> {
    if !(omega > 0.0) || !(kappa >= 0.0) || !omega.is_finite() || !kappa.is_finite() {
        return Err(EnsembleError::InvalidParameter(format!(
            "need omega > 0 and kappa >= 0, got ({omega}, {kappa})"
        )));
    }
    Ok(0.5 * (PI * E / 2.0 * (omega + (omega * omega + 2.0 * kappa).sqrt())).ln())
}

/// Gibbs-variational entropy ceiling for a rotor with `h₁ = p²/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    pub beta_star: f64,
    pub bound: f64,
    pub e_tot: f64,
    pub ln_z1: f64,
}

/// `(ln Z₁, ln E₁)` for `Z₁(β) = Σ_p e^{−βp²/2}`, with the `p = ±1` weight
/// factored out of `E₁` so that large `β` does not underflow.
fn theta_sums(beta: f64) -> (f64, f64) {
    let cut = (80.0 / beta).sqrt().ceil() as i64 + 2;
    let (mut z, mut s) = (1.0, 0.0);
    for p in 1..=cut {
        let q = (p * p) as f64;
        z += 2.0 * (-beta * q / 2.0).exp();
        s += q * (-beta * (q - 1.0) / 2.0).exp();
    }
    // E₁ = (2 Σ_{p≥1} (p²/2) e^{−βp²/2}) / Z₁
    (z.ln(), -beta / 2.0 + s.ln() - z.ln())
}

/// Solve `E₁(β*) = E_tot` and return `β* E_tot + ln Z₁(β*)`. `E_tot = 0`
/// yields a zero bound.
pub fn uniform_bound(e_tot: f64) -> Result<BoundResult> {
    if !(e_tot >= 0.0) || !e_tot.is_finite() {
        return Err(EnsembleError::InvalidParameter(format!(
            "total energy must be finite and >= 0, got {e_tot}"
        )));
    }
    if e_tot == 0.0 {
        return Ok(BoundResult {
            beta_star: f64::INFINITY,
            bound: 0.0,
            e_tot,
            ln_z1: 0.0,
        });
    }
    let guess = if e_tot > 0.25 { 0.5 / e_tot } else { -2.0 * e_tot.ln() };
    let u = expand_and_solve(|u| theta_sums(u.exp()).1 - e_tot.ln(), guess.ln())?;
    let beta_star = u.exp();
    let ln_z1 = theta_sums(beta_star).0;
    Ok(BoundResult {
        beta_star,
        bound: beta_star * e_tot + ln_z1,
        e_tot,
        ln_z1,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ComparisonOptions {
    /// `S₁,max` is the maximum over `n_t` uniform times in `[0, t_max]`.
    pub t_max: f64,
    pub n_t: usize,
    pub deg_tol: f64,
    pub max_m: usize,
    pub ground: GroundStateOptions,
}

impl Default for ComparisonOptions {
    fn default() -> Self {
        Self {
            t_max: 16.0 * PI,
            n_t: 1601,
            deg_tol: 1e-9,
            max_m: 80,
            ground: GroundStateOptions::default(),
        }
    }
}

/// Every ensemble estimate at one `(ω², κ)` point, next to the exact maximum.
#[derive(Debug, Clone)]
pub struct EnsembleComparison {
    pub omega_sq: f64,
    pub kappa: f64,
    pub m: usize,
    pub s_max: f64,
    pub t_at_max: f64,
    pub s_de: f64,
    pub s_bde: f64,
    pub s_gge: f64,
    pub s_frozen: f64,
    pub s_estimate: f64,
    pub energies: ConservedEnergies,
    pub gge: GgeSolution,
    pub bound: BoundResult,
}

pub fn compare_ensembles(omega_sq: f64, kappa: f64, opts: &ComparisonOptions) -> Result<EnsembleComparison> {
    if opts.n_t < 2 || !(opts.t_max > 0.0) {
        return Err(EnsembleError::InvalidParameter(
            "need n_t >= 2 and t_max > 0".into(),
        ));
    }
    let auto = auto_cutoff(omega_sq, kappa, opts.max_m, &opts.ground)?;
    let m = auto.params.m;
    let psi0 = auto.ground.psi;
    let spec = BlockSpectrum::new(kappa, m)?;
    let ts: Vec<f64> = (0..opts.n_t)
        .map(|k| opts.t_max * k as f64 / (opts.n_t - 1) as f64)
        .collect();
    let series = Propagator::Blocks(spec.clone())
        .map_series(&psi0, &ts, |_, psi| entanglement_entropy(&reduce_site(psi)))?
        .into_iter()
        .collect::<std::result::Result<Vec<f64>, _>>()?;
    let (k_max, s_max) = series
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let s_de = diagonal_ensemble(&spec, &psi0)?.entropy()?;
    let s_bde = block_diagonal_ensemble(&spec, &psi0, opts.deg_tol)?.entropy()?;
    let energies = conserved_energies(&psi0, kappa);
    let gge = gge_solve(kappa, m, energies.plus, energies.minus)?;
    Ok(EnsembleComparison {
        omega_sq,
        kappa,
        m,
        s_max,
        t_at_max: ts[k_max],
        s_de,
        s_bde,
        s_gge: gge_reduced_entropy(&gge, kappa, m)?,
        s_frozen: frozen_gge(omega_sq, kappa, energies.plus)?.entropy,
        s_estimate: analytic_gge_estimate(omega_sq.sqrt(), kappa)?,
        energies,
        gge,
        bound: uniform_bound(energies.total())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eig_sym;
    use crate::rotor2::{build_hamiltonian, expectation, ground_state, RotorParams};
    use proptest::prelude::*;

    fn prepared(omega_sq: f64, kappa: f64, m: usize) -> WaveFunction {
        let p = RotorParams::new(omega_sq, kappa, m).unwrap();
        ground_state(&build_hamiltonian(&p, omega_sq), m, &GroundStateOptions::default())
            .unwrap()
            .psi
    }

    fn sparse_to_state(m: usize, v: &[(usize, f64)]) -> WaveFunction {
        let mut amps = vec![C64::new(0.0, 0.0); (2 * m + 1).pow(2)];
        for &(i, a) in v {
            amps[i] = C64::new(a, 0.0);
        }
        WaveFunction::new(m, amps).unwrap()
    }

    #[test]
    fn eigenstate_gives_pure_projector() {
        let spec = BlockSpectrum::new(1.5, 3).unwrap();
        let (_, _, v) = &spec.eigenpairs()[7];
        let psi = sparse_to_state(3, v);
        let de = diagonal_ensemble(&spec, &psi).unwrap();
        let rho = de.to_dense();
        let amps = psi.amplitudes();
        for i in 0..amps.len() {
            for j in 0..amps.len() {
                assert!((rho[(i, j)] - amps[i] * amps[j].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn two_level_superposition() {
        let spec = BlockSpectrum::new(1.5, 3).unwrap();
        let pairs = spec.eigenpairs();
        let (a, b) = (&pairs[3].2, &pairs[20].2);
        let mut amps = vec![C64::new(0.0, 0.0); spec.dim()];
        for &(i, x) in a.iter().chain(b) {
            amps[i] += C64::new(x, 0.0);
        }
        let psi = WaveFunction::new(3, amps).unwrap();
        let rho = diagonal_ensemble(&spec, &psi).unwrap().to_dense();
        let mut expect = DMatrix::<C64>::zeros(spec.dim(), spec.dim());
        for v in [a, b] {
            for &(i, x) in v {
                for &(j, y) in v {
                    expect[(i, j)] += C64::new(0.5 * x * y, 0.0);
                }
            }
        }
        assert!((rho - expect).camax() < 1e-12);
    }

    #[test]
    fn single_block_state_has_no_coherences_to_keep() {
        // every eigenstate inside one P block has a distinct energy
        let spec = BlockSpectrum::new(2.0, 4).unwrap();
        let block = &spec.blocks()[6];
        let mut amps = vec![C64::new(0.0, 0.0); spec.dim()];
        for (k, &i) in block.indices.iter().enumerate() {
            amps[i] = C64::new(1.0 + k as f64, 0.3 * k as f64);
        }
        let psi = WaveFunction::new(4, amps).unwrap();
        let de = diagonal_ensemble(&spec, &psi).unwrap();
        let bde = block_diagonal_ensemble(&spec, &psi, 1e-9).unwrap();
        assert!((de.to_dense() - bde.to_dense()).camax() < 1e-14);
    }

    #[test]
    fn ensembles_keep_trace_and_zero_mode_degeneracy_matters() {
        let psi = prepared(5.0, 10.0, 10);
        let spec = BlockSpectrum::new(10.0, 10).unwrap();
        let de = diagonal_ensemble(&spec, &psi).unwrap();
        let bde = block_diagonal_ensemble(&spec, &psi, 1e-9).unwrap();
        assert!((de.trace() - 1.0).abs() < 1e-12);
        assert!((bde.trace() - 1.0).abs() < 1e-12);
        assert!((bde.reduced().trace() - 1.0).abs() < 1e-12);
        // ±P pairs are combined, so there are fewer components
        assert!(bde.components().len() < de.components().len());
        // the DE reduced state is diagonal in p₁; the BDE one is not
        assert!(de.reduced().off_diagonal_ratio() < 1e-14);
        assert!(bde.reduced().off_diagonal_ratio() > 1e-6);
        assert!(bde.entropy().unwrap() <= de.entropy().unwrap() + 1e-12);
    }

    #[test]
    fn conserved_energies_of_simple_states() {
        let e = conserved_energies(&WaveFunction::basis_state(3, 0, 0).unwrap(), 4.0);
        assert_eq!((e.plus, e.minus), (0.0, 4.0));
        let e = conserved_energies(&WaveFunction::basis_state(3, 2, 1).unwrap(), 0.0);
        assert_eq!((e.plus, e.minus), (9.0 / 4.0, 1.0 / 4.0));
    }

    #[test]
    fn energies_sum_to_quadratic_form() {
        let m = 16;
        let psi = prepared(10.0, 100.0, m);
        let e = conserved_energies(&psi, 100.0);
        let p = RotorParams::new(10.0, 100.0, m).unwrap();
        let direct = expectation(&build_hamiltonian(&p, 0.0), &psi);
        assert!((e.total() - direct).abs() < 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn harmonic_zero_mode_energy() {
        // deep harmonic regime: E₊ close to ω/4
        let (w2, k) = (400.0, 400.0);
        let psi = prepared(w2, k, 24);
        let e = conserved_energies(&psi, k);
        let target = w2.sqrt() / 4.0;
        assert!((e.plus - target).abs() < 0.02 * target, "{} vs {target}", e.plus);
    }

    /// Independent oracle: exponentiate `λ₊H₊ + λ₋H₋` on a large product box
    /// and take traces and a partial trace directly.
    fn brute_force_gge(kappa: f64, m: usize, lp: f64, lm: f64) -> (f64, f64, f64) {
        let side = 2 * m + 1;
        let dim = side * side;
        let mut hp = DMatrix::zeros(dim, dim);
        let mut hm = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            let (p1, p2) = basis_momenta(m, i);
            hp[(i, i)] = ((p1 + p2) * (p1 + p2)) as f64 / 4.0;
            hm[(i, i)] = ((p1 - p2) * (p1 - p2)) as f64 / 4.0 + kappa;
            if let Some(j) = crate::rotor2::basis_index(m, p1 + 1, p2 - 1) {
                hm[(i, j)] = -kappa / 2.0;
                hm[(j, i)] = -kappa / 2.0;
            }
        }
        let g = eig_sym(&(&hp * lp + &hm * lm), 1e-12).unwrap();
        let e0 = g.eigenvalues[0];
        let v = &g.eigenvectors;
        let w: Vec<f64> = g.eigenvalues.iter().map(|&e| (-(e - e0)).exp()).collect();
        let z: f64 = w.iter().sum();
        let mut rho = DMatrix::zeros(dim, dim);
        for (n, &wn) in w.iter().enumerate() {
            let c = v.column(n);
            rho += &c * c.transpose() * (wn / z);
        }
        let ep = (&rho * &hp).trace();
        let em = (&rho * &hm).trace();
        let mut r1 = DMatrix::<f64>::zeros(side, side);
        for a in 0..side {
            for b in 0..side {
                for k in 0..side {
                    r1[(a, b)] += rho[(a * side + k, b * side + k)];
                }
            }
        }
        let ev = r1.symmetric_eigen().eigenvalues;
        let s = ev.iter().filter(|&&x| x > 1e-300).map(|&x| -x * x.ln()).sum();
        (ep, em, s)
    }

    #[test]
    fn gge_matches_brute_force_exponential() {
        let (kappa, lp, lm) = (2.0, 1.3, 0.9);
        let (ep, em, s) = brute_force_gge(kappa, 12, lp, lm);
        let g = gge_solve(kappa, 12, ep, em).unwrap();
        assert!((g.lambda_plus - lp).abs() < 1e-7, "{}", g.lambda_plus);
        assert!((g.lambda_minus - lm).abs() < 1e-7, "{}", g.lambda_minus);
        let r = gge_reduced_state(&g, kappa, 12).unwrap();
        assert!((r.entropy - s).abs() < 1e-8, "{} vs {s}", r.entropy);
        assert!(r.edge_weight < 1e-10);
    }

    #[test]
    fn gge_reproduces_fig3_energies() {
        let m = 20;
        let psi = prepared(10.0, 100.0, m);
        let e = conserved_energies(&psi, 100.0);
        let g = gge_solve(100.0, m, e.plus, e.minus).unwrap();
        assert!(g.residuals.0.abs() < 1e-8 * e.plus.max(1.0));
        assert!(g.residuals.1.abs() < 1e-8 * e.minus.max(1.0));
        let s = gge_reduced_entropy(&g, 100.0, m).unwrap();
        let est = analytic_gge_estimate(10f64.sqrt(), 100.0).unwrap();
        assert!((s - est).abs() < 0.1 * s, "{s} vs {est}");
        let frozen = frozen_gge(10.0, 100.0, e.plus).unwrap();
        assert!((frozen.entropy - s).abs() < 0.05 * s, "{} vs {s}", frozen.entropy);
    }

    #[test]
    fn zero_mode_energy_limit() {
        let psi = prepared(10.0, 100.0, 16);
        let e = conserved_energies(&psi, 100.0);
        let g = gge_solve(100.0, 16, 0.0, e.minus).unwrap();
        assert!(g.lambda_plus.is_infinite());
        assert!(g.residuals.1.abs() < 1e-8 * e.minus);
        let r = gge_reduced_state(&g, 100.0, 16).unwrap();
        let total: f64 = r.weights.iter().map(|w| w.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn continuum_zero_mode_multiplier() {
        // in the Gaussian-sum regime E₊ ≈ 1/(2λ₊)
        let g = gge_solve(1.0, 6, 40.0, 1.2).unwrap();
        assert!((g.lambda_plus * 2.0 * 40.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn unreachable_relative_energy() {
        assert!(matches!(
            gge_solve(10.0, 8, 1.0, 0.1),
            Err(EnsembleError::Unreachable { .. })
        ));
    }

    #[test]
    fn analytic_estimate_values() {
        let s = analytic_gge_estimate(10f64.sqrt(), 100.0).unwrap();
        let direct = 0.5 * ((PI * E / 2.0) * (10f64.sqrt() + 210f64.sqrt())).ln();
        assert!((s - direct).abs() < 1e-15);
        assert!((s - 2.161).abs() < 5e-4);
        let w = 1.7;
        assert!((analytic_gge_estimate(w, 0.0).unwrap() - 0.5 * (PI * E * w).ln()).abs() < 1e-14);
        assert!(analytic_gge_estimate(0.0, 1.0).is_err());
    }

    #[test]
    fn bound_small_and_large_energy() {
        assert_eq!(uniform_bound(0.0).unwrap().bound, 0.0);
        let b = uniform_bound(1e-9).unwrap();
        assert!(b.bound > 0.0 && b.bound < 1e-6);
        let tiny = uniform_bound(1e-300).unwrap();
        assert!(tiny.bound.is_finite() && tiny.bound < 1e-290);
        // Gaussian-integral regime; corrections are O(e^{−4π²E})
        for e in [5.0, 50.0, 1e4] {
            let b = uniform_bound(e).unwrap();
            assert!((b.bound - 0.5 * (4.0 * PI * E * e).ln()).abs() < 1e-9, "{e}");
        }
    }

    #[test]
    fn bound_invariants_at_moderate_energy() {
        let b = uniform_bound(0.8).unwrap();
        let beta = b.beta_star;
        // direct sums without any rescaling
        let z: f64 = (-60i64..=60).map(|p| (-beta * (p * p) as f64 / 2.0).exp()).sum();
        let e1: f64 = (-60i64..=60)
            .map(|p| (p * p) as f64 / 2.0 * (-beta * (p * p) as f64 / 2.0).exp())
            .sum::<f64>()
            / z;
        assert!((e1 - 0.8).abs() < 1e-12);
        assert!((b.bound - (beta * 0.8 + z.ln())).abs() < 1e-12);
        assert!(uniform_bound(-1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn bde_never_exceeds_de(w2 in 0.5f64..20.0, k in 0.5f64..20.0) {
            let m = 8;
            let psi = prepared(w2, k, m);
            let spec = BlockSpectrum::new(k, m).unwrap();
            let de = diagonal_ensemble(&spec, &psi).unwrap().entropy().unwrap();
            let bde = block_diagonal_ensemble(&spec, &psi, 1e-9).unwrap().entropy().unwrap();
            prop_assert!(bde <= de + 1e-10);
        }

        #[test]
        fn bound_is_increasing(e in 1e-6f64..1e3, f in 1.01f64..3.0) {
            let a = uniform_bound(e).unwrap();
            let b = uniform_bound(e * f).unwrap();
            prop_assert!(b.bound > a.bound);
            prop_assert!(b.beta_star < a.beta_star);
        }

        #[test]
        fn estimate_is_monotone(w in 0.1f64..30.0, k in 0.0f64..300.0, dw in 0.01f64..2.0, dk in 0.01f64..20.0) {
            let s = analytic_gge_estimate(w, k).unwrap();
            prop_assert!(analytic_gge_estimate(w + dw, k).unwrap() > s);
            prop_assert!(analytic_gge_estimate(w, k + dk).unwrap() > s);
        }

        #[test]
        fn gge_energies_round_trip(lp in 0.05f64..3.0, lm in 0.05f64..3.0, k in 0.2f64..10.0) {
            let model = GgeModel::new(k, 12).unwrap();
            let (ep, xm) = model.energies(lp, lm);
            let g = gge_solve(k, 12, ep, xm + model.e_min).unwrap();
            prop_assert!((g.lambda_plus - lp).abs() < 1e-6 * lp.max(1.0));
            prop_assert!((g.lambda_minus - lm).abs() < 1e-6 * lm.max(1.0));
        }
    }
}
