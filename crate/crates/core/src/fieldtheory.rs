//! Continuum estimates for a tunnel-coupled pair of 1D condensates.
//!
//! The relative phase `φ(z)` on `[0, L]` with free ends is expanded in cosine
//! modes. Pre-quench it is a massive Klein–Gordon field, post-quench (`J → 0`)
//! a massless one whose uniform mode `φ₀ ≡ φ₀ + 2πR₀` is a compact zero mode.
//! Frequencies `Ω` are those of the rescaled Hamiltonian `H/(2g₁D)` and carry
//! units of inverse length; time is rescaled as `t̃ = 2g₁D t`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, FieldError>;

/// `ħ` and `k_B`; CODATA 2018 by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub k_b: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: 1.054_571_817e-34,
            k_b: 1.380_649e-23,
        }
    }
}

/// Condensate parameters in SI units (`J` as an angular rate).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondensateParams {
    pub length: f64,
    pub n_1d: f64,
    pub g_1d: f64,
    pub m_atom: f64,
    pub tunnel: f64,
    pub temperature: f64,
    pub constants: PhysicalConstants,
}

impl CondensateParams {
    pub fn new(
        length: f64,
        n_1d: f64,
        g_1d: f64,
        m_atom: f64,
        tunnel: f64,
        temperature: f64,
    ) -> Result<Self> {
        Self {
            length,
            n_1d,
            g_1d,
            m_atom,
            tunnel,
            temperature,
            constants: PhysicalConstants::default(),
        }
        .validated()
    }

    /// Replace `ħ` and `k_B`, e.g. to work in another unit system.
    pub fn with_constants(self, constants: PhysicalConstants) -> Result<Self> {
        Self { constants, ..self }.validated()
    }

    fn validated(self) -> Result<Self> {
        let fields = [
            ("L", self.length),
            ("n1D", self.n_1d),
            ("g1D", self.g_1d),
            ("m", self.m_atom),
            ("hbar", self.constants.hbar),
            ("kB", self.constants.k_b),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(FieldError::InvalidParameter(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        // J = 0 and T = 0 are meaningful limits
        for (name, v) in [("J", self.tunnel), ("T", self.temperature)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(FieldError::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(self)
    }

    /// Parameters of the 2024 split-condensate entropy measurement.
    pub fn experiment_2024() -> Self {
        Self {
            length: 49e-6,
            n_1d: 70e6,
            g_1d: 8.594e-39,
            m_atom: 1.433e-25,
            tunnel: 2.0 * PI * 0.76,
            temperature: 49e-9,
            constants: PhysicalConstants::default(),
        }
    }

    /// Compactification radius `√L` of `φ₀` in the mode normalization used here.
    pub fn natural_radius(&self) -> f64 {
        self.length.sqrt()
    }

    /// `ħ J n₁D / g₁D`, the squared mass term.
    fn mass_sq(&self) -> f64 {
        self.constants.hbar * self.tunnel * self.n_1d / self.g_1d
    }

    /// `ħ² n₁D / (4 m g₁D)`, the gradient stiffness.
    fn stiffness(&self) -> f64 {
        self.constants.hbar.powi(2) * self.n_1d / (4.0 * self.m_atom * self.g_1d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpectrum {
    pub k: usize,
    pub omega_i: f64,
    pub omega_f: f64,
}

/// `Ω²_{i,k} = ħJn/g + (ħ²n/4mg)(πk/L)²` and `Ω²_{f,k}` without the mass term.
pub fn mode_frequencies(p: &CondensateParams, k: usize) -> ModeSpectrum {
    let grad = p.stiffness() * (PI * k as f64 / p.length).powi(2);
    ModeSpectrum {
        k,
        omega_i: (p.mass_sq() + grad).sqrt(),
        omega_f: grad.sqrt(),
    }
}

/// Thermal `(σ²_{φ₀}, σ²_{δρ₀})` of the pre-quench zero mode.
pub fn thermal_zero_mode_variances(p: &CondensateParams) -> Result<(f64, f64)> {
    let w = mode_frequencies(p, 0).omega_i;
    if !(w > 0.0) {
        return Err(FieldError::InvalidParameter(
            "zero-mode variances need J > 0 (gapped pre-quench state)".into(),
        ));
    }
    let x = p.g_1d * w / (p.constants.k_b * p.temperature);
    // coth x, with T = 0 giving x = ∞ and coth = 1
    let coth = if x.is_infinite() { 1.0 } else { 1.0 / x.tanh() };
    Ok((coth / (2.0 * w), 0.5 * w * coth))
}

/// `t̃ = 2 g₁D t`.
pub fn rescaled_time(p: &CondensateParams, t: f64) -> f64 {
    2.0 * p.g_1d * t
}

/// `σ²_{φ₀}(t) = σ²_{φ₀}(0) + (t̃/ħ)² σ²_{δρ₀}(0)` after the quench.
pub fn zero_mode_variance(p: &CondensateParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(FieldError::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    let (s0, r0) = thermal_zero_mode_variances(p)?;
    Ok(s0 + (rescaled_time(p, t) / p.constants.hbar).powi(2) * r0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimescaleResult {
    /// Deep-quench closed form, in seconds.
    pub t_c: f64,
    /// Exact root of `σ²_{φ₀}(t) = π²R₀²/3`, in seconds (`0` if already exceeded).
    pub t_c_exact: f64,
    pub sigma0_sq: f64,
    pub sigma_rho0_sq: f64,
    pub r0: f64,
    /// `σ²_{φ₀}(0) / (π²R₀²/3)`.
    pub initial_fraction: f64,
    /// True when `initial_fraction < 0.1`, where the closed form applies.
    pub deep_quench: bool,
}

/// Time for the zero-mode variance to reach that of a uniform distribution on
/// a circle of radius `r0`. `R₀` is explicit because conventions differ; pass
/// [`CondensateParams::natural_radius`] for the mode normalization used here.
pub fn compactness_timescale(p: &CondensateParams, r0: f64) -> Result<TimescaleResult> {
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(FieldError::InvalidParameter(format!("R0 must be finite and > 0, got {r0}")));
    }
    let (s0, sr) = thermal_zero_mode_variances(p)?;
    let target = PI * PI * r0 * r0 / 3.0;
    let hbar = p.constants.hbar;
    let to_seconds = |tt: f64| tt / (2.0 * p.g_1d);
    let t_c = to_seconds(hbar / sr.sqrt() * PI * r0 / 3f64.sqrt());
    let t_c_exact = to_seconds(hbar * ((target - s0).max(0.0) / sr).sqrt());
    let initial_fraction = s0 / target;
    Ok(TimescaleResult {
        t_c,
        t_c_exact,
        sigma0_sq: s0,
        sigma_rho0_sq: sr,
        r0,
        initial_fraction,
        deep_quench: initial_fraction < 0.1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreezingRatio {
    pub r_k: f64,
    pub frozen: bool,
}

/// `r_k = √(1 + 4mJ / (ħ(πk/L)²))`; the mode counts as frozen when `r_k − 1 < threshold`.
pub fn freezing_ratio(p: &CondensateParams, k: usize, threshold: f64) -> Result<FreezingRatio> {
    if k == 0 {
        return Err(FieldError::InvalidParameter("freezing ratio is undefined for k = 0".into()));
    }
    let q = PI * k as f64 / p.length;
    let r_k = (1.0 + 4.0 * p.m_atom * p.tunnel / (p.constants.hbar * q * q)).sqrt();
    Ok(FreezingRatio {
        r_k,
        frozen: r_k - 1.0 < threshold,
    })
}

/// Dimensionless rotor-chain couplings of an `N`-site discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeMap {
    pub n: usize,
    pub omega_sq: f64,
    pub kappa: f64,
    /// Lattice spacing `a = L/N`, in metres.
    pub spacing: f64,
    /// Energy unit `2g₁D/a`, in joules.
    pub energy_unit: f64,
    /// Time unit `ħa/(2g₁D)`, in seconds.
    pub time_unit: f64,
}

impl LatticeMap {
    /// Convert a lattice mode frequency to the continuum `Ω` (inverse length).
    pub fn to_continuum_frequency(&self, omega_lattice: f64) -> f64 {
        omega_lattice / self.spacing
    }
}

/// Sample `φ` on sites `zₙ` with cell momenta `Πₙ = a δρ(zₙ)`. In units of
/// `2g₁D/a` the lattice Hamiltonian is the rotor chain with
/// `ω² = a²ħJn/g` and `κ = ħ²n/(4mg)`, whose small-angle modes approach
/// `a Ω_{i,k}` as `N → ∞`.
pub fn lattice_map(p: &CondensateParams, n: usize) -> Result<LatticeMap> {
    if n < 2 {
        return Err(FieldError::InvalidParameter(format!("need N >= 2, got {n}")));
    }
    let a = p.length / n as f64;
    let energy_unit = 2.0 * p.g_1d / a;
    Ok(LatticeMap {
        n,
        omega_sq: a * a * p.mass_sq(),
        kappa: p.stiffness(),
        spacing: a,
        energy_unit,
        time_unit: p.constants.hbar / energy_unit,
    })
}

/// Map to `[−π, π)`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = x - 2.0 * PI * ((x + PI) / (2.0 * PI)).floor();
    // rounding can land exactly on +π
    if y >= PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Mean squared wrapped deviation from the circular mean.
pub fn wrapped_variance(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(FieldError::InvalidParameter("need at least one sample".into()));
    }
    let (s, c) = samples
        .iter()
        .fold((0.0, 0.0), |(s, c), &x| (s + x.sin(), c + x.cos()));
    let mu = s.atan2(c);
    Ok(samples.iter().map(|&x| wrap_phase(x - mu).powi(2)).sum::<f64>() / samples.len() as f64)
}

/// Exact `E[θ²]` of a wrapped `N(0, σ²)` angle, centred at zero:
/// `π²/3 + 4 Σₖ (−1)ᵏ e^{−k²σ²/2} / k²`.
pub fn wrapped_gaussian_variance(sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) || sigma.is_nan() {
        return Err(FieldError::InvalidParameter(format!("sigma must be >= 0, got {sigma}")));
    }
    // images beyond ±π carry weight below e^{−π²/(2σ²)} < 1e-23 here
    if sigma < 0.3 {
        return Ok(sigma * sigma);
    }
    Ok(wrapped_series(sigma))
}

fn wrapped_series(sigma: f64) -> f64 {
    let k_max = (2.0 * 40.0f64).sqrt() / sigma;
    let series: f64 = (1..=k_max.ceil() as usize)
        .map(|k| {
            let k = k as f64;
            let sign = if k as usize % 2 == 0 { 1.0 } else { -1.0 };
            sign * (-0.5 * k * k * sigma * sigma).exp() / (k * k)
        })
        .sum();
    PI * PI / 3.0 + 4.0 * series
}

const SAMPLE_CHUNK: usize = 1 << 16;

/// `n` wrapped draws from `N(0, σ²)`. Chunk `j` uses ChaCha8 stream `j` of
/// `seed`, so the output does not depend on the thread count.
pub fn sample_wrapped_gaussian(sigma: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(FieldError::InvalidParameter(format!("sigma must be finite and >= 0, got {sigma}")));
    }
    if n == 0 {
        return Err(FieldError::InvalidParameter("need n >= 1".into()));
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| FieldError::InvalidParameter(e.to_string()))?;
    let chunks = n.div_ceil(SAMPLE_CHUNK);
    Ok((0..chunks)
        .into_par_iter()
        .flat_map_iter(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64);
            let len = SAMPLE_CHUNK.min(n - j * SAMPLE_CHUNK);
            (0..len).map(move |_| wrap_phase(normal.sample(&mut rng))).collect::<Vec<_>>()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::{neumann_modes, ChainParams};
    use crate::numerics::fit_polynomial;
    use proptest::prelude::*;

    #[test]
    fn zero_mode_frequencies() {
        let p = CondensateParams::experiment_2024();
        let m = mode_frequencies(&p, 0);
        assert_eq!(m.omega_f, 0.0);
        let want = (p.constants.hbar * p.tunnel * p.n_1d / p.g_1d).sqrt();
        assert!((m.omega_i - want).abs() < 1e-12 * want);
        let free = CondensateParams { tunnel: 0.0, ..p };
        for k in 0..5 {
            let m = mode_frequencies(&free, k);
            assert_eq!(m.omega_i, m.omega_f);
        }
        let mut last = 0.0;
        for k in 0..10 {
            let m = mode_frequencies(&p, k);
            assert!(m.omega_i >= m.omega_f && m.omega_i > last);
            last = m.omega_i;
        }
    }

    #[test]
    fn thermal_limits() {
        let p = CondensateParams::experiment_2024();
        let w = mode_frequencies(&p, 0).omega_i;
        let cold = CondensateParams { temperature: 0.0, ..p };
        let (s, r) = thermal_zero_mode_variances(&cold).unwrap();
        assert!((s - 0.5 / w).abs() < 1e-15 * s && (r - 0.5 * w).abs() < 1e-15 * r);
        // equipartition: coth x ≈ 1/x + x/3
        let hot = CondensateParams { temperature: 1e3, ..p };
        let (s, _) = thermal_zero_mode_variances(&hot).unwrap();
        let x = p.g_1d * w / (p.constants.k_b * 1e3);
        let classical = p.constants.k_b * 1e3 / (2.0 * p.g_1d * w * w);
        assert!((s - classical * (1.0 + x * x / 3.0)).abs() < 1e-12 * s);
        let (s, r) = thermal_zero_mode_variances(&p).unwrap();
        assert!((s * r).sqrt() >= 0.5);
    }

    #[test]
    fn ballistic_growth_is_quadratic() {
        let p = CondensateParams::experiment_2024();
        let (s0, r0) = thermal_zero_mode_variances(&p).unwrap();
        assert_eq!(zero_mode_variance(&p, 0.0).unwrap(), s0);
        let ts: Vec<f64> = (0..40).map(|k| k as f64 * 5e-4).collect();
        let ys: Vec<f64> = ts.iter().map(|&t| zero_mode_variance(&p, t).unwrap()).collect();
        let fit = fit_polynomial(&ts, &ys, 2).unwrap();
        let want = (2.0 * p.g_1d / p.constants.hbar).powi(2) * r0;
        assert!((fit.leading() - want).abs() < 1e-9 * want);
        // the variance crosses the uniform-circle value near t_c
        let tc = compactness_timescale(&p, p.natural_radius()).unwrap();
        let target = PI * PI * p.length / 3.0;
        assert!((zero_mode_variance(&p, tc.t_c_exact).unwrap() - target).abs() < 1e-10 * target);
    }

    #[test]
    fn experimental_timescale() {
        let p = CondensateParams::experiment_2024();
        let r = compactness_timescale(&p, p.natural_radius()).unwrap();
        assert!(r.deep_quench);
        assert!((r.t_c - 0.012).abs() < 0.0012, "{}", r.t_c);
        assert!((r.t_c - r.t_c_exact).abs() < 0.05 * r.t_c);
        // the printed closed form in physical units
        let c = p.constants;
        let x = (p.g_1d * c.hbar * p.tunnel * p.n_1d).sqrt() / (c.k_b * p.temperature);
        let printed = c.hbar * PI / (p.g_1d * 6f64.sqrt())
            * p.length.sqrt()
            * (p.g_1d / (c.hbar * p.tunnel * p.n_1d)).powf(0.25)
            * x.tanh().sqrt();
        assert!((r.t_c - printed).abs() < 1e-12 * printed);
    }

    #[test]
    fn timescale_scales_with_root_length() {
        let p = CondensateParams::experiment_2024();
        let q = CondensateParams { length: 4.0 * p.length, ..p };
        let a = compactness_timescale(&p, p.natural_radius()).unwrap().t_c;
        let b = compactness_timescale(&q, q.natural_radius()).unwrap().t_c;
        assert!((b / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unit_system_invariance() {
        // lengths in µm, times in ms, masses in units of 1e-25 kg
        let (l, tau, mu) = (1e-6, 1e-3, 1e-25);
        let p = CondensateParams::experiment_2024();
        let q = CondensateParams {
            length: p.length / l,
            n_1d: p.n_1d * l,
            g_1d: p.g_1d / (mu * l.powi(3) / (tau * tau)),
            m_atom: p.m_atom / mu,
            tunnel: p.tunnel * tau,
            temperature: p.temperature,
            constants: PhysicalConstants {
                hbar: p.constants.hbar / (mu * l * l / tau),
                k_b: p.constants.k_b / (mu * l * l / (tau * tau)),
            },
        };
        let a = compactness_timescale(&p, p.natural_radius()).unwrap();
        let b = compactness_timescale(&q, q.natural_radius()).unwrap();
        assert!((a.t_c / tau - b.t_c).abs() < 1e-12 * b.t_c);
        assert!((a.initial_fraction - b.initial_fraction).abs() < 1e-12);
        let (fa, fb) = (freezing_ratio(&p, 1, 0.01).unwrap(), freezing_ratio(&q, 1, 0.01).unwrap());
        assert!((fa.r_k - fb.r_k).abs() < 1e-12 * fa.r_k);
        let (ma, mb) = (lattice_map(&p, 32).unwrap(), lattice_map(&q, 32).unwrap());
        assert!((ma.omega_sq - mb.omega_sq).abs() < 1e-12 * ma.omega_sq);
        assert!((ma.kappa - mb.kappa).abs() < 1e-12 * ma.kappa);
    }

    #[test]
    fn freezing() {
        let p = CondensateParams::experiment_2024();
        assert!(freezing_ratio(&p, 0, 0.01).is_err());
        assert!(!freezing_ratio(&p, 1, 0.01).unwrap().frozen);
        let free = CondensateParams { tunnel: 0.0, ..p };
        assert_eq!(freezing_ratio(&free, 3, 0.01).unwrap().r_k, 1.0);
        let r: Vec<f64> = (1..8).map(|k| freezing_ratio(&p, k, 0.01).unwrap().r_k).collect();
        assert!(r.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn lattice_map_limits() {
        let p = CondensateParams::experiment_2024();
        let free = CondensateParams { tunnel: 0.0, ..p };
        assert_eq!(lattice_map(&free, 16).unwrap().omega_sq, 0.0);
        assert_eq!(lattice_map(&p, 16).unwrap().kappa, lattice_map(&p, 128).unwrap().kappa);
        let m = lattice_map(&p, 16).unwrap();
        assert!((m.energy_unit * m.time_unit - p.constants.hbar).abs() < 1e-12 * p.constants.hbar);
    }

    #[test]
    fn lattice_modes_converge_quadratically() {
        let p = CondensateParams::experiment_2024();
        let exact = mode_frequencies(&p, 1).omega_i;
        let errs: Vec<f64> = [16, 32, 64, 128]
            .iter()
            .map(|&n| {
                let map = lattice_map(&p, n).unwrap();
                let modes = neumann_modes(&ChainParams::new(n, map.omega_sq, map.kappa).unwrap());
                (map.to_continuum_frequency(modes.frequencies[1]) - exact).abs() / exact
            })
            .collect();
        assert!(errs[2] < 0.01);
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
        }
    }

    #[test]
    fn wrapping() {
        assert!((wrap_phase(1.5 * PI) + 0.5 * PI).abs() < 1e-15);
        assert_eq!(wrap_phase(PI), -PI);
        assert_eq!(wrap_phase(-PI), -PI);
        assert!((wrap_phase(0.3 + 8.0 * PI) - 0.3).abs() < 1e-14);
    }

    #[test]
    fn wrapped_gaussian_limits() {
        let narrow = sample_wrapped_gaussian(0.1, 1_000_000, 7).unwrap();
        assert!((wrapped_variance(&narrow).unwrap() / 0.01 - 1.0).abs() < 0.01);
        let wide = sample_wrapped_gaussian(1e3, 1_000_000, 11).unwrap();
        let v = wrapped_variance(&wide).unwrap();
        assert!((v / (PI * PI / 3.0) - 1.0).abs() < 0.01, "{v}");
        assert_eq!(wide, sample_wrapped_gaussian(1e3, 1_000_000, 11).unwrap());
        assert!(sample_wrapped_gaussian(-1.0, 10, 0).is_err());
    }

    #[test]
    fn wrapped_variance_series() {
        assert_eq!(wrapped_gaussian_variance(0.0).unwrap(), 0.0);
        // both branches agree where they meet
        assert!((wrapped_series(0.3) - 0.09).abs() < 1e-14);
        assert!((wrapped_gaussian_variance(50.0).unwrap() - PI * PI / 3.0).abs() < 1e-12);
        let s = sample_wrapped_gaussian(1.7, 400_000, 3).unwrap();
        let mc = s.iter().map(|x| x * x).sum::<f64>() / s.len() as f64;
        let exact = wrapped_gaussian_variance(1.7).unwrap();
        assert!((mc - exact).abs() < 0.01 * exact, "{mc} vs {exact}");
    }

    proptest! {
        #[test]
        fn wrap_properties(x in -1e4f64..1e4) {
            let w = wrap_phase(x);
            prop_assert!((-PI..PI).contains(&w));
            prop_assert_eq!(wrap_phase(w), w);
            prop_assert!((wrap_phase(x + 2.0 * PI) - w).abs() < 1e-9);
        }

        #[test]
        fn wrapped_variance_is_bounded(xs in proptest::collection::vec(-50.0f64..50.0, 1..200)) {
            // every wrapped deviation lies in [−π, π)
            prop_assert!(wrapped_variance(&xs).unwrap() <= PI * PI);
        }
    }
}
