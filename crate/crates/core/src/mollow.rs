//! Driven two-level emitter (resonance fluorescence): Hamiltonian, dressed
//! quantities, closed-form Bloch steady state, unfiltered `g⁽²⁾(τ)` and the
//! secular dressed-state approximation for sideband cross-correlations.
//!
//! All frequencies are measured from the laser, in units of the emitter
//! decay rate. The emitter basis is `|g⟩ = 0`, `|e⟩ = 1` and
//!
//! ```text
//! H = ω_σ σ†σ + Ω(σ + σ†)
//! ```
//!
//! so the dressed energies are `(ω_σ ± Ω₊)/2` with `Ω₊ = √(ω_σ² + 4Ω²)`.
//!
//! # Stationary Bloch solution
//!
//! With `n = ⟨σ†σ⟩`, `s = ⟨σ⟩`, `Δ = ω_σ` the Heisenberg equations are
//!
//! ```text
//! ds/dt = −(γ/2 + iΔ) s + iΩ(2n − 1)
//! dn/dt = iΩ(s − s*) − γ n = −2Ω Im(s) − γ n
//! ```
//!
//! Setting both to zero gives `s = iΩ(2n − 1)/(γ/2 + iΔ)`, hence
//! `Im(s) = Ω(2n − 1)(γ/2)/(Δ² + γ²/4)`, and the population equation closes to
//! `n = Ω²/(Δ² + γ²/4 + 2Ω²)`.
//!
//! # Secular dressed-state sideband correlations
//!
//! Write the dressed states as `|+⟩ = sinθ|g⟩ + cosθ|e⟩` and
//! `|−⟩ = cosθ|g⟩ − sinθ|e⟩` with `tan 2θ = 2Ω/ω_σ`. The jump `|+⟩ → |−⟩`
//! emits at `+Ω₊` with rate `γ|⟨−|σ|+⟩|² = γcos⁴θ`, the jump `|−⟩ → |+⟩` at
//! `−Ω₊` with rate `γsin⁴θ`. The dressed populations relax at
//! `Γ_pop = γ(cos⁴θ + sin⁴θ)` towards `p₊ = sin⁴θ/(cos⁴θ + sin⁴θ)`.
//!
//! A blue (`+Ω₊`) photon leaves the emitter in `|−⟩`, the only state that emits
//! red, so the red-after-blue correlation is `p₋(τ | −)/p₋ = 1 + (p₊/p₋)e^{−Γ_pop τ}`;
//! symmetrically blue-after-red is `1 + (p₋/p₊)e^{−Γ_pop τ}`. Taking the
//! time-ordered pair as one function of signed delay,
//!
//! ```text
//! g(τ) = 1 + A e^{−aτ}  (τ ≥ 0),    g(τ) = 1 + B e^{aτ}  (τ < 0),    a = Γ_pop
//! ```
//!
//! with `A = p₋/p₊`, `B = p₊/p₋` for the low→high ordering (swapped for
//! high→low).
//!
//! Each Lorentzian filter of width Γ delays its photon by an exponentially
//! distributed time with density `Γe^{−Γt}`; the difference of two such delays
//! has density `K(s) = (Γ/2)e^{−Γ|s|}`. The filtered correlation is `1 + (K * (g − 1))`,
//! which for `τ ≥ 0` evaluates to
//!
//! ```text
//! 1 + (Γ/2) [ A ( (e^{−aτ} − e^{−Γτ})/(Γ − a) + e^{−aτ}/(Γ + a) ) + B e^{−Γτ}/(Γ + a) ]
//! ```
//!
//! (the first bracket becomes `τe^{−aτ}` when `Γ = a`), and for `τ < 0` the same
//! expression in `|τ|` with `A` and `B` exchanged. At resonance `θ = π/4`, so
//! `A = B = 1` and `a = γ/2` independently of the drive.

use crate::liouville::{
    build_liouvillian, lowering_op, steady_state, two_time_correlator, HilbertSpace, LindbladTerm, Liouvillian,
    LiouvilleError, Operator,
};
use crate::numerics::{CMatrix, C64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MollowError {
    #[error("invalid emitter parameters: {0}")]
    InvalidParams(String),
    #[error("undriven emitter has no Mollow sidebands")]
    NoSidebands,
    #[error(transparent)]
    Liouville(#[from] LiouvilleError),
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EmitterParams {
    pub gamma_sigma: f64,
    pub omega_drive: f64,
    /// Laser–emitter detuning `ω_σ`.
    pub detuning: f64,
}

impl EmitterParams {
    pub fn new(gamma_sigma: f64, omega_drive: f64, detuning: f64) -> Result<Self, MollowError> {
        let p = Self { gamma_sigma, omega_drive, detuning };
        p.validate()?;
        Ok(p)
    }

    /// Unit decay rate.
    pub fn with_drive(omega_drive: f64, detuning: f64) -> Result<Self, MollowError> {
        Self::new(1.0, omega_drive, detuning)
    }

    /// Drive amplitude producing the dressed splitting `splitting` at the given
    /// detuning, `Ω = √(Ω₊² − ω_σ²)/2`.
    pub fn from_splitting(splitting: f64, detuning: f64) -> Result<Self, MollowError> {
        if !(splitting >= detuning.abs()) {
            return Err(MollowError::InvalidParams(format!(
                "splitting {splitting} smaller than |detuning| {}",
                detuning.abs()
            )));
        }
        Self::with_drive((splitting * splitting - detuning * detuning).sqrt() / 2.0, detuning)
    }

    pub fn validate(&self) -> Result<(), MollowError> {
        if !(self.gamma_sigma > 0.0 && self.gamma_sigma.is_finite()) {
            return Err(MollowError::InvalidParams(format!("gamma must be > 0, got {}", self.gamma_sigma)));
        }
        if !(self.omega_drive >= 0.0 && self.omega_drive.is_finite()) {
            return Err(MollowError::InvalidParams(format!("omega must be >= 0, got {}", self.omega_drive)));
        }
        if !self.detuning.is_finite() {
            return Err(MollowError::InvalidParams(format!("detuning must be finite, got {}", self.detuning)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedQuantities {
    /// `Ω₊`
    pub splitting: f64,
    /// `θ` with `tan 2θ = 2Ω/ω_σ`.
    pub mixing_angle: f64,
}

pub fn dressed_splitting(p: &EmitterParams) -> DressedQuantities {
    let splitting = (p.detuning * p.detuning + 4.0 * p.omega_drive * p.omega_drive).sqrt();
    let mixing_angle = 0.5 * (2.0 * p.omega_drive).atan2(p.detuning);
    DressedQuantities { splitting, mixing_angle }
}

pub fn emitter_space() -> HilbertSpace {
    HilbertSpace::new(vec![2]).expect("static space")
}

/// `ω_σ σ†σ + Ω(σ + σ†)` as a bare 2×2 matrix.
pub fn emitter_hamiltonian_matrix(p: &EmitterParams) -> CMatrix {
    let s = lowering_op(2);
    let mut h = s.adjoint().matmul(&s).scale(C64::new(p.detuning, 0.0));
    h.add_scaled(C64::new(p.omega_drive, 0.0), &s.add(&s.adjoint()));
    h
}

pub fn emitter_hamiltonian(p: &EmitterParams) -> Operator {
    Operator::new(emitter_space(), emitter_hamiltonian_matrix(p)).expect("2x2 on a 2-dim space")
}

/// Generator of the bare driven emitter.
pub fn bare_liouvillian(p: &EmitterParams) -> Result<Liouvillian, MollowError> {
    p.validate()?;
    let sigma = Operator::new(emitter_space(), lowering_op(2))?;
    let decay = LindbladTerm::new(p.gamma_sigma, sigma)?;
    Ok(build_liouvillian(&emitter_hamiltonian(p), &[decay])?)
}

/// Closed-form stationary excited population and coherence `⟨σ⟩`.
pub fn bloch_steady_state(p: &EmitterParams) -> (f64, C64) {
    let (g, o, d) = (p.gamma_sigma, p.omega_drive, p.detuning);
    let population = o * o / (d * d + g * g / 4.0 + 2.0 * o * o);
    let coherence = C64::new(0.0, o * (2.0 * population - 1.0)) / C64::new(g / 2.0, d);
    (population, coherence)
}

/// `⟨σ†(0)σ†σ(τ)σ(0)⟩/⟨σ†σ⟩²` of the unfiltered emission.
pub fn unfiltered_g2(p: &EmitterParams, taus: &[f64]) -> Result<Vec<f64>, MollowError> {
    let l = bare_liouvillian(p)?;
    let rho = steady_state(&l)?;
    let sigma = Operator::new(emitter_space(), lowering_op(2))?;
    let n = sigma.number();
    let pop = crate::liouville::expectation(&rho, &n)?.re;
    if pop <= 0.0 {
        return Err(MollowError::InvalidParams("undriven emitter has no emission to correlate".into()));
    }
    let c = two_time_correlator(&l, &rho, &sigma, &n, taus)?;
    Ok(c.into_iter().map(|z| z.re / (pop * pop)).collect())
}

/// Time ordering of the two detected sideband photons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SidebandOrder {
    /// First photon from the `−Ω₊` sideband, second from `+Ω₊`.
    LowThenHigh,
    HighThenLow,
}

/// Secular dressed-state approximation to the filtered sideband
/// cross-correlation (see the module docs for the closed form). Negative
/// delays are accepted and describe the opposite time ordering.
pub fn secular_sideband_g2(
    p: &EmitterParams,
    filter_linewidth: f64,
    order: SidebandOrder,
    taus: &[f64],
) -> Result<Vec<f64>, MollowError> {
    p.validate()?;
    if !(filter_linewidth > 0.0 && filter_linewidth.is_finite()) {
        return Err(MollowError::InvalidParams(format!("filter linewidth must be > 0, got {filter_linewidth}")));
    }
    if p.omega_drive == 0.0 {
        return Err(MollowError::NoSidebands);
    }
    let theta = dressed_splitting(p).mixing_angle;
    let (s, c) = theta.sin_cos();
    let blue_rate = p.gamma_sigma * c.powi(4);
    let red_rate = p.gamma_sigma * s.powi(4);
    let relax = blue_rate + red_rate;
    let p_plus = red_rate / relax;
    let p_minus = blue_rate / relax;
    let (a_amp, b_amp) = match order {
        SidebandOrder::LowThenHigh => (p_minus / p_plus, p_plus / p_minus),
        SidebandOrder::HighThenLow => (p_plus / p_minus, p_minus / p_plus),
    };
    Ok(taus
        .iter()
        .map(|&tau| {
            if tau >= 0.0 {
                filtered_cascade(tau, a_amp, b_amp, relax, filter_linewidth)
            } else {
                filtered_cascade(-tau, b_amp, a_amp, relax, filter_linewidth)
            }
        })
        .collect())
}

fn filtered_cascade(tau: f64, forward: f64, backward: f64, relax: f64, width: f64) -> f64 {
    let ea = (-relax * tau).exp();
    let eg = (-width * tau).exp();
    let rise = if (width - relax).abs() <= 1e-12 * width { tau * ea } else { (ea - eg) / (width - relax) };
    1.0 + 0.5 * width * (forward * (rise + ea / (width + relax)) + backward * eg / (width + relax))
}
