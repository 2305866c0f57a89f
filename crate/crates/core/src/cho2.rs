//! Two coupled harmonic oscillators after a global frequency quench.
//!
//! Everything here is closed form. The normal modes `x_± = (x₁ ± x₂)/√2`
//! evolve independently as squeezed Gaussians whose widths follow the
//! Ermakov scaling function `b_ν(t)`; tracing out one oscillator gives a
//! Mehler kernel whose single parameter `ξ` fixes the entanglement spectrum
//! `(1 − ξ) ξᵏ`. Entropies are in nats.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum Cho2Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("kernel is not normalizable: A = {a}, B = {b}")]
    InvalidKernel { a: f64, b: f64 },
}

pub type Result<T> = std::result::Result<T, Cho2Error>;

/// Values of `1 − ξ` below this are at the edge of double precision; the
/// reported entropy is capped there and the point is flagged.
pub const XI_SATURATION: f64 = 1e-15;

/// Normal mode label: `Plus` is the centre-of-mass mode, `Minus` the relative one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Plus,
    Minus,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::Plus, Mode::Minus];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    /// Post-quench frequency positive: bounded oscillation.
    Stable,
    /// Post-quench frequency zero: free spreading.
    Metastable,
    /// Post-quench frequency imaginary: inverted oscillator.
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorPair {
    pub plus: Sector,
    pub minus: Sector,
}

/// Pre-quench frequency `ω_i`, coupling `κ` and post-quench on-site
/// frequency squared `ω_f²`.
///
/// `ω_f²` may be negative, which only [`classify_sector`] accepts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoQuench {
    omega_i: f64,
    kappa: f64,
    omega_f_sq: f64,
}

impl ChoQuench {
    pub fn new(omega_i: f64, kappa: f64, omega_f: f64) -> Result<Self> {
        if !(omega_f >= 0.0) || !omega_f.is_finite() {
            return Err(Cho2Error::InvalidParameter(format!(
                "omega_f must be finite and >= 0, got {omega_f}"
            )));
        }
        Self::with_omega_f_sq(omega_i, kappa, omega_f * omega_f)
    }

    /// The usual quench `ω → 0`, parametrised by `ω²` as in the rotor models.
    pub fn frequency_quench(omega_sq: f64, kappa: f64) -> Result<Self> {
        if !(omega_sq > 0.0) {
            return Err(Cho2Error::InvalidParameter(format!(
                "omega_sq must be > 0, got {omega_sq}"
            )));
        }
        Self::new(omega_sq.sqrt(), kappa, 0.0)
    }

    pub fn with_omega_f_sq(omega_i: f64, kappa: f64, omega_f_sq: f64) -> Result<Self> {
        if !(omega_i > 0.0) || !omega_i.is_finite() {
            return Err(Cho2Error::InvalidParameter(format!(
                "omega_i must be finite and > 0, got {omega_i}"
            )));
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Cho2Error::InvalidParameter(format!(
                "kappa must be finite and >= 0, got {kappa}"
            )));
        }
        if !omega_f_sq.is_finite() {
            return Err(Cho2Error::InvalidParameter(format!(
                "omega_f^2 must be finite, got {omega_f_sq}"
            )));
        }
        Ok(Self {
            omega_i,
            kappa,
            omega_f_sq,
        })
    }

    pub fn omega_i(&self) -> f64 {
        self.omega_i
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn omega_f_sq(&self) -> f64 {
        self.omega_f_sq
    }

    /// `ω_{i,+} = ω_i`, `ω_{i,−} = √(ω_i² + 2κ)`.
    pub fn initial_frequency(&self, nu: Mode) -> f64 {
        match nu {
            Mode::Plus => self.omega_i,
            Mode::Minus => (self.omega_i * self.omega_i + 2.0 * self.kappa).sqrt(),
        }
    }

    /// Squared post-quench mode frequency; negative in the unstable sector.
    pub fn final_frequency_sq(&self, nu: Mode) -> f64 {
        match nu {
            Mode::Plus => self.omega_f_sq,
            Mode::Minus => self.omega_f_sq + 2.0 * self.kappa,
        }
    }

    /// Real post-quench mode frequency, `None` if the mode is unstable.
    pub fn final_frequency(&self, nu: Mode) -> Option<f64> {
        let w2 = self.final_frequency_sq(nu);
        (w2 >= 0.0).then(|| w2.sqrt())
    }
}

pub fn classify_sector(q: &ChoQuench) -> SectorPair {
    let one = |nu| {
        let w2 = q.final_frequency_sq(nu);
        if w2 > 0.0 {
            Sector::Stable
        } else if w2 == 0.0 {
            Sector::Metastable
        } else {
            Sector::Unstable
        }
    };
    SectorPair {
        plus: one(Mode::Plus),
        minus: one(Mode::Minus),
    }
}

/// Ermakov scaling function `(b, ḃ)` of one mode with `b(0) = 1`, `ḃ(0) = 0`.
pub fn scaling_function(q: &ChoQuench, nu: Mode, t: f64) -> Result<(f64, f64)> {
    if !(t >= 0.0) {
        return Err(Cho2Error::NegativeTime(t));
    }
    let wi = q.initial_frequency(nu);
    let wf = q.final_frequency(nu).ok_or_else(|| {
        Cho2Error::Unsupported(format!(
            "{nu:?} mode is in the unstable sector (omega_f^2 = {})",
            q.final_frequency_sq(nu)
        ))
    })?;
    if wf == 0.0 {
        let b = (wi * t).hypot(1.0);
        return Ok((b, wi * wi * t / b));
    }
    let r = wi / wf;
    let (s, c) = (wf * t).sin_cos();
    let b = (c * c + r * r * s * s).sqrt();
    Ok((b, wf * (r * r - 1.0) * s * c / b))
}

/// Per-mode data of the evolved Gaussian `exp[−(A_ν − i B_ν) x_ν²/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeData {
    pub b: f64,
    pub bdot: f64,
    /// `ω_{i,ν} / b²`
    pub a: f64,
    /// `ḃ / b`
    pub bb: f64,
    /// True for a zero post-quench frequency, which has exact momentum data.
    pub metastable: bool,
    pub omega_i: f64,
    pub t: f64,
}

impl ModeData {
    /// Momentum-space counterparts `(Ã_ν, B̃_ν)`.
    ///
    /// For a metastable mode these are exactly `(1/ω_i, −t)` at all times,
    /// not just asymptotically, and are returned in that form.
    pub fn momentum(&self) -> (f64, f64) {
        if self.metastable {
            return (1.0 / self.omega_i, -self.t);
        }
        let n = self.a * self.a + self.bb * self.bb;
        (self.a / n, -self.bb / n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCoefficients {
    pub plus: ModeData,
    pub minus: ModeData,
}

impl ModeCoefficients {
    pub fn get(&self, nu: Mode) -> &ModeData {
        match nu {
            Mode::Plus => &self.plus,
            Mode::Minus => &self.minus,
        }
    }
}

pub fn mode_coefficients(q: &ChoQuench, t: f64) -> Result<ModeCoefficients> {
    let one = |nu| -> Result<ModeData> {
        let (b, bdot) = scaling_function(q, nu, t)?;
        let wi = q.initial_frequency(nu);
        Ok(ModeData {
            b,
            bdot,
            a: wi / (b * b),
            bb: bdot / b,
            metastable: q.final_frequency_sq(nu) == 0.0,
            omega_i: wi,
            t,
        })
    };
    Ok(ModeCoefficients {
        plus: one(Mode::Plus)?,
        minus: one(Mode::Minus)?,
    })
}

/// Combined Mehler coefficients for either representation.
///
/// `a_minus_b` and `a_plus_b` are evaluated in forms free of cancellation,
/// which is what keeps `1 − ξ` accurate as `ξ → 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MehlerPair {
    pub a: f64,
    pub b: f64,
    pub a_minus_b: f64,
    pub a_plus_b: f64,
}

impl MehlerPair {
    /// Combine per-mode `(A₊, B₊)` and `(A₋, B₋)`.
    pub fn combine(ap: f64, bp: f64, am: f64, bm: f64) -> Result<Self> {
        if !(ap > 0.0) || !(am > 0.0) {
            return Err(Cho2Error::InvalidKernel { a: ap.min(am), b: 0.0 });
        }
        let s = ap + am;
        let da = ap - am;
        let db = bp - bm;
        let a = (2.0 * s * s - (da * da - db * db)) / (4.0 * s);
        let b = (da * da + db * db) / (4.0 * s);
        Ok(Self {
            a,
            b,
            a_minus_b: 2.0 * ap * am / s,
            a_plus_b: (s * s + db * db) / (2.0 * s),
        })
    }

    /// `1 − ξ` with `ξ = χ / (1 + √(1 − χ²))`, `χ = B/A`.
    pub fn one_minus_xi(&self) -> f64 {
        let g = (self.a_minus_b * self.a_plus_b).sqrt();
        (self.a_minus_b + g) / (self.a + g)
    }

    pub fn xi(&self) -> f64 {
        let g = (self.a_minus_b * self.a_plus_b).sqrt();
        self.b / (self.a + g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelCoefficients {
    pub a: f64,
    pub b: f64,
    /// Phase coefficient; carried for completeness, it does not enter the spectrum.
    pub phi: f64,
    pub a_tilde: f64,
    pub b_tilde: f64,
    pub a_tilde_plus: f64,
    pub b_tilde_plus: f64,
    pub a_tilde_minus: f64,
    pub b_tilde_minus: f64,
    pub position: MehlerPair,
    pub momentum: MehlerPair,
}

pub fn kernel_coefficients(modes: &ModeCoefficients) -> Result<KernelCoefficients> {
    let (p, m) = (&modes.plus, &modes.minus);
    if !(p.a > 0.0) || !(m.a > 0.0) {
        return Err(Cho2Error::InvalidKernel {
            a: p.a.min(m.a),
            b: 0.0,
        });
    }
    let position = MehlerPair::combine(p.a, p.bb, m.a, m.bb)?;
    let s = p.a + m.a;
    let phi = (p.bb + m.bb) / 4.0 - (p.a - m.a) * (p.bb - m.bb) / (4.0 * s);
    let (atp, btp) = p.momentum();
    let (atm, btm) = m.momentum();
    let momentum = MehlerPair::combine(atp, btp, atm, btm)?;
    if !(position.a_minus_b > 0.0) || !(position.b >= 0.0) {
        return Err(Cho2Error::InvalidKernel {
            a: position.a,
            b: position.b,
        });
    }
    Ok(KernelCoefficients {
        a: position.a,
        b: position.b,
        phi,
        a_tilde: momentum.a,
        b_tilde: momentum.b,
        a_tilde_plus: atp,
        b_tilde_plus: btp,
        a_tilde_minus: atm,
        b_tilde_minus: btm,
        position,
        momentum,
    })
}

/// `S(ξ) = −ln(1−ξ) − ξ/(1−ξ) ln ξ`, taking `1 − ξ` as input for accuracy.
pub fn entropy_from_one_minus_xi(omx: f64) -> f64 {
    if omx >= 1.0 {
        return 0.0;
    }
    let xi = 1.0 - omx;
    let ln_xi = (-omx).ln_1p();
    (-omx.ln() - xi / omx * ln_xi).max(0.0)
}

pub fn entropy_from_xi(xi: f64) -> f64 {
    entropy_from_one_minus_xi(1.0 - xi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceLengths {
    pub l_xs: f64,
    pub l_xa: f64,
    pub l_ps: f64,
    pub l_pa: f64,
}

impl CoherenceLengths {
    pub fn xi_position(&self) -> f64 {
        (self.l_xs - self.l_xa) / (self.l_xs + self.l_xa)
    }

    pub fn xi_momentum(&self) -> f64 {
        (self.l_ps - self.l_pa) / (self.l_ps + self.l_pa)
    }
}

pub fn coherence_lengths(k: &KernelCoefficients) -> Result<CoherenceLengths> {
    for pair in [&k.position, &k.momentum] {
        if !(pair.a_minus_b > 0.0) {
            return Err(Cho2Error::InvalidKernel { a: pair.a, b: pair.b });
        }
    }
    Ok(CoherenceLengths {
        l_xs: k.position.a_minus_b.sqrt().recip(),
        l_xa: k.position.a_plus_b.sqrt().recip(),
        l_ps: k.momentum.a_minus_b.sqrt().recip(),
        l_pa: k.momentum.a_plus_b.sqrt().recip(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementPoint {
    pub t: f64,
    pub chi: f64,
    pub xi: f64,
    /// `1 − ξ` evaluated without cancellation.
    pub one_minus_xi: f64,
    /// Momentum-representation `ξ̃`, equal to `xi` up to rounding.
    pub xi_momentum: f64,
    pub entropy: f64,
    /// `1 − ξ` fell below [`XI_SATURATION`] and `entropy` is capped.
    pub saturated: bool,
    pub lengths: CoherenceLengths,
}

pub fn entanglement_point(q: &ChoQuench, t: f64) -> Result<EntanglementPoint> {
    let k = kernel_coefficients(&mode_coefficients(q, t)?)?;
    let lengths = coherence_lengths(&k)?;
    let omx = k.position.one_minus_xi();
    let saturated = omx < XI_SATURATION;
    Ok(EntanglementPoint {
        t,
        chi: k.b / k.a,
        xi: k.position.xi(),
        one_minus_xi: omx,
        xi_momentum: k.momentum.xi(),
        entropy: entropy_from_one_minus_xi(omx.max(XI_SATURATION)),
        saturated,
        lengths,
    })
}

pub fn entanglement_entropy_series(q: &ChoQuench, ts: &[f64]) -> Result<Vec<EntanglementPoint>> {
    ts.iter().map(|&t| entanglement_point(q, t)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeVariances {
    pub sigma_x_plus: f64,
    pub sigma_x_minus: f64,
    pub sigma_p_plus: f64,
    pub sigma_p_minus: f64,
}

/// Position and momentum widths of each normal mode.
pub fn mode_variances(q: &ChoQuench, t: f64) -> Result<ModeVariances> {
    let m = mode_coefficients(q, t)?;
    let sx = |d: &ModeData| (2.0 * d.a).sqrt().recip();
    let sp = |d: &ModeData| {
        if d.metastable {
            // (A² + B²)/(2A) collapses to ω_i/2 identically
            (d.omega_i / 2.0).sqrt()
        } else {
            ((d.a * d.a + d.bb * d.bb) / (2.0 * d.a)).sqrt()
        }
    };
    Ok(ModeVariances {
        sigma_x_plus: sx(&m.plus),
        sigma_x_minus: sx(&m.minus),
        sigma_p_plus: sp(&m.plus),
        sigma_p_minus: sp(&m.minus),
    })
}

/// Partial sum `Σ_{k<n} (1−ξ) ξᵏ` of the entanglement spectrum.
pub fn spectrum_partial_sum(xi: f64, n: usize) -> f64 {
    (0..n).map(|k| (1.0 - xi) * xi.powi(k as i32)).sum()
}
