//! Frequency-resolved detection by weakly coupled sensors.
//!
//! Each sensor is a lossy bosonic mode at laser-relative frequency `ωᵢ`,
//! linewidth `Γᵢ`, truncated to `nᵢ + 1` levels so that `ςᵢⁿ` detects
//! `nᵢ`-photon bundles. Sensors couple to the emitter through
//! `ε(σςᵢ† + σ†ςᵢ)`; for `ε → 0` they do not perturb the emitter and their
//! normalized correlators become the filtered photon correlators.
//!
//! The Liouvillian of the composed system is affine in the sensor frequencies
//! and in `ε`, so [`SensorSystem`] assembles the fixed part once and each
//! evaluation only forms `L₀ + Σ ωᵢ Kᵢ + ε C`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::liouville::{
    dissipator_superop, embed, hamiltonian_superop, lowering_op, steady_state, trace_product,
    DensityMatrix, HilbertSpace, Liouvillian, LiouvilleError, Operator,
};
use crate::mollow::{emitter_hamiltonian_matrix, EmitterParams, MollowError};
use crate::numerics::{CMatrix, C64, ONE};

/// Normalizations below this are not representable reliably.
pub const DENOMINATOR_FLOOR: f64 = 1e-30;
/// Lower bound the ε policy keeps every bundle normalization above.
pub const NORMALIZATION_FLOOR: f64 = 1e-24;
/// Relative change between the ε and ε/2 runs accepted as converged.
pub const CONVERGENCE_TOL: f64 = 5e-3;
/// Default coupling as a fraction of the smallest rate in the problem.
pub const DEFAULT_COUPLING_FRACTION: f64 = 1e-2;
/// Largest coupling accepted as weak, as a fraction of the smallest rate.
pub const MAX_COUPLING_FRACTION: f64 = 1e-1;
pub const MAX_SENSORS: usize = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SensingError {
    #[error("invalid sensor: {0}")]
    InvalidSensor(String),
    #[error("{0} sensors requested; between 1 and 2 are supported")]
    UnsupportedSensorCount(usize),
    #[error("sensors must share one coupling, got {0} and {1}")]
    UnequalCoupling(f64, f64),
    #[error("normalization of sensor {sensor} is {value:e}, below {floor:e}: ε too small for this bundle order")]
    DenominatorUnderflow { sensor: usize, value: f64, floor: f64 },
    #[error("no coupling satisfies both the weak-coupling ceiling {ceiling:e} and the underflow floor (needs {required:e})")]
    InfeasibleEpsilon { required: f64, ceiling: f64 },
    #[error("coupling {epsilon:e} exceeds the weak-coupling ceiling {ceiling:e}")]
    CouplingTooStrong { epsilon: f64, ceiling: f64 },
    #[error(transparent)]
    Mollow(#[from] MollowError),
    #[error(transparent)]
    Liouville(#[from] LiouvilleError),
}

impl From<crate::numerics::NumericsError> for SensingError {
    fn from(e: crate::numerics::NumericsError) -> Self {
        SensingError::Liouville(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorSpec {
    pub frequency: f64,
    pub linewidth: f64,
    /// Bundle size; the sensor keeps `photons + 1 + truncation_padding` levels.
    pub photons: u32,
    pub coupling: f64,
    /// Extra Fock levels above the bundle size, for truncation diagnostics.
    #[serde(default)]
    pub truncation_padding: u32,
}

impl SensorSpec {
    pub fn new(frequency: f64, linewidth: f64, photons: u32, coupling: f64) -> Self {
        Self { frequency, linewidth, photons, coupling, truncation_padding: 0 }
    }

    pub fn levels(&self) -> usize {
        (self.photons + 1 + self.truncation_padding) as usize
    }

    pub fn with_frequency(mut self, frequency: f64) -> Self {
        self.frequency = frequency;
        self
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    fn validate_shape(&self) -> Result<(), SensingError> {
        if !(self.linewidth > 0.0 && self.linewidth.is_finite()) {
            return Err(SensingError::InvalidSensor(format!("linewidth must be > 0, got {}", self.linewidth)));
        }
        if self.photons < 1 {
            return Err(SensingError::InvalidSensor("photons must be >= 1".into()));
        }
        if !self.frequency.is_finite() {
            return Err(SensingError::InvalidSensor(format!("frequency must be finite, got {}", self.frequency)));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), SensingError> {
        self.validate_shape()?;
        if !(self.coupling > 0.0 && self.coupling.is_finite()) {
            return Err(SensingError::InvalidSensor(format!("coupling must be > 0, got {}", self.coupling)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub value: f64,
    pub epsilon_used: f64,
    /// `|g(ε) − g(ε/2)| / |g(ε/2)|`
    pub convergence: f64,
    pub converged: bool,
}

impl CorrelationResult {
    fn from_pair(value: f64, halved: f64, epsilon_used: f64) -> Self {
        let convergence = (value - halved).abs() / halved.abs().max(f64::MIN_POSITIVE);
        Self { value, epsilon_used, convergence, converged: convergence < CONVERGENCE_TOL }
    }
}

/// Emitter plus one or two sensors with every frequency- and
/// coupling-independent piece of the Liouvillian assembled up front.
#[derive(Debug, Clone)]
pub struct SensorSystem {
    emitter: EmitterParams,
    space: HilbertSpace,
    photons: Vec<u32>,
    linewidths: Vec<f64>,
    base: CMatrix,
    detuning_generators: Vec<CMatrix>,
    coupling_generator: CMatrix,
    sigma: Operator,
    sensors: Vec<Operator>,
}

impl SensorSystem {
    /// Uses the linewidth, bundle size and truncation of each template; the
    /// frequencies and couplings are supplied per evaluation.
    pub fn new(p: &EmitterParams, templates: &[SensorSpec]) -> Result<Self, SensingError> {
        p.validate()?;
        if templates.is_empty() || templates.len() > MAX_SENSORS {
            return Err(SensingError::UnsupportedSensorCount(templates.len()));
        }
        for s in templates {
            s.validate_shape()?;
        }
        let mut dims = vec![2];
        dims.extend(templates.iter().map(SensorSpec::levels));
        let space = HilbertSpace::new(dims)?;

        let sigma = embed(&lowering_op(2), 0, &space)?;
        let sensors = templates
            .iter()
            .enumerate()
            .map(|(i, s)| embed(&lowering_op(s.levels()), i + 1, &space))
            .collect::<Result<Vec<_>, _>>()?;

        let h0 = embed(&emitter_hamiltonian_matrix(p), 0, &space)?;
        let mut base = hamiltonian_superop(h0.matrix());
        base.add_scaled(ONE, &dissipator_superop(p.gamma_sigma, sigma.matrix()));
        for (s, op) in templates.iter().zip(&sensors) {
            base.add_scaled(ONE, &dissipator_superop(s.linewidth, op.matrix()));
        }
        let detuning_generators = sensors.iter().map(|op| hamiltonian_superop(op.number().matrix())).collect();

        let d = space.dim();
        let mut coupling = CMatrix::zeros(d, d);
        for op in &sensors {
            let exchange = sigma.matrix().matmul(&op.matrix().adjoint());
            coupling.add_scaled(ONE, &exchange);
            coupling.add_scaled(ONE, &exchange.adjoint());
        }
        let coupling_generator = hamiltonian_superop(&coupling);

        Ok(Self {
            emitter: *p,
            space,
            photons: templates.iter().map(|s| s.photons).collect(),
            linewidths: templates.iter().map(|s| s.linewidth).collect(),
            base,
            detuning_generators,
            coupling_generator,
            sigma,
            sensors,
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn emitter(&self) -> &EmitterParams {
        &self.emitter
    }

    pub fn sensor_count(&self) -> usize {
        self.sensors.len()
    }

    pub fn photons(&self) -> &[u32] {
        &self.photons
    }

    pub fn linewidths(&self) -> &[f64] {
        &self.linewidths
    }

    pub fn sigma(&self) -> &Operator {
        &self.sigma
    }

    /// Lowering operator `ςᵢ` of sensor `i`.
    pub fn sensor(&self, i: usize) -> &Operator {
        &self.sensors[i]
    }

    /// `ςᵢⁿⁱ`
    pub fn bundle_operator(&self, i: usize) -> Operator {
        self.sensors[i].pow(self.photons[i])
    }

    /// Smallest rate in the problem, `min(γ_σ, Γ₁, Γ₂, …)`.
    pub fn min_rate(&self) -> f64 {
        self.linewidths.iter().copied().fold(self.emitter.gamma_sigma, f64::min)
    }

    pub fn liouvillian(&self, frequencies: &[f64], epsilon: f64) -> Result<Liouvillian, SensingError> {
        if frequencies.len() != self.sensors.len() {
            return Err(SensingError::InvalidSensor(format!(
                "{} frequencies for {} sensors",
                frequencies.len(),
                self.sensors.len()
            )));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(SensingError::InvalidSensor(format!("coupling must be finite and >= 0, got {epsilon}")));
        }
        let mut m = self.base.clone();
        for (w, k) in frequencies.iter().zip(&self.detuning_generators) {
            if *w != 0.0 {
                m.add_scaled(C64::new(*w, 0.0), k);
            }
        }
        if epsilon != 0.0 {
            m.add_scaled(C64::new(epsilon, 0.0), &self.coupling_generator);
        }
        Ok(Liouvillian::from_matrix(self.space.clone(), m)?)
    }

    pub fn steady_state(&self, frequencies: &[f64], epsilon: f64) -> Result<(Liouvillian, DensityMatrix), SensingError> {
        let l = self.liouvillian(frequencies, epsilon)?;
        let rho = steady_state(&l)?;
        Ok((l, rho))
    }

    /// `⟨ςᵢ†ςᵢ⟩` for every sensor.
    pub fn sensor_populations(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.sensors.iter().map(|op| trace_product(op.number().matrix(), rho.matrix()).re).collect()
    }

    /// `⟨(ςᵢⁿⁱ)†ςᵢⁿⁱ⟩` for every sensor.
    pub fn bundle_normalizations(&self, rho: &DensityMatrix) -> Vec<f64> {
        (0..self.sensors.len()).map(|i| trace_product(self.bundle_operator(i).number().matrix(), rho.matrix()).re).collect()
    }

    fn checked_normalizations(&self, rho: &DensityMatrix) -> Result<Vec<f64>, SensingError> {
        let norms = self.bundle_normalizations(rho);
        for (i, &n) in norms.iter().enumerate() {
            if !(n >= DENOMINATOR_FLOOR) {
                return Err(SensingError::DenominatorUnderflow { sensor: i, value: n, floor: DENOMINATOR_FLOOR });
            }
        }
        Ok(norms)
    }

    /// Zero-delay bundle correlator at one coupling, without the ε/2 check.
    pub fn zero_delay_value(&self, frequencies: &[f64; 2], epsilon: f64) -> Result<f64, SensingError> {
        self.require_pair()?;
        let (_, rho) = self.steady_state(frequencies, epsilon)?;
        let norms = self.checked_normalizations(&rho)?;
        let joint = self.bundle_operator(1).mul(&self.bundle_operator(0))?;
        let numerator = trace_product(joint.number().matrix(), rho.matrix()).re;
        Ok((numerator / (norms[0] * norms[1])).max(0.0))
    }

    /// Delay-resolved bundle correlator at one coupling: sensor 0 detects at
    /// time 0, sensor 1 at `τ`.
    pub fn tau_values(&self, frequencies: &[f64; 2], epsilon: f64, taus: &[f64], rel_tol: f64) -> Result<Vec<f64>, SensingError> {
        self.require_pair()?;
        let (l, rho) = self.steady_state(frequencies, epsilon)?;
        let norms = self.checked_normalizations(&rho)?;
        // ρ' = AρA†/⟨A†A⟩ has unit trace, which keeps the propagated state O(1).
        let first = self.bundle_operator(0).scale(1.0 / norms[0].sqrt());
        let second = self.bundle_operator(1).number();
        let c = crate::liouville::two_time_correlator_with_tol(&l, &rho, &first, &second, taus, rel_tol)?;
        Ok(c.into_iter().map(|z| (z.re / norms[1]).max(0.0)).collect())
    }

    fn require_pair(&self) -> Result<(), SensingError> {
        if self.sensors.len() != 2 {
            return Err(SensingError::UnsupportedSensorCount(self.sensors.len()));
        }
        Ok(())
    }
}

/// Builds the emitter+sensors Liouvillian and returns it with the sensor
/// lowering operators.
pub fn attach_sensors(p: &EmitterParams, sensors: &[SensorSpec]) -> Result<(Liouvillian, Vec<Operator>), SensingError> {
    let epsilon = common_coupling(sensors)?;
    let system = SensorSystem::new(p, sensors)?;
    let freqs: Vec<f64> = sensors.iter().map(|s| s.frequency).collect();
    let l = system.liouvillian(&freqs, epsilon)?;
    Ok((l, system.sensors))
}

fn common_coupling(sensors: &[SensorSpec]) -> Result<f64, SensingError> {
    let Some(first) = sensors.first() else {
        return Err(SensingError::UnsupportedSensorCount(0));
    };
    for s in &sensors[1..] {
        if s.coupling != first.coupling {
            return Err(SensingError::UnequalCoupling(first.coupling, s.coupling));
        }
    }
    Ok(first.coupling)
}

/// Filtered emission spectrum `S_Γ(ω) = Γ/(2πε²)·⟨ς†ς⟩` sampled on `omegas`.
pub fn filtered_spectrum(p: &EmitterParams, linewidth: f64, omegas: &[f64], epsilon: f64) -> Result<Vec<f64>, SensingError> {
    let template = SensorSpec::new(0.0, linewidth, 1, epsilon);
    template.validate()?;
    let system = SensorSystem::new(p, &[template])?;
    let ceiling = MAX_COUPLING_FRACTION * system.min_rate();
    if epsilon > ceiling {
        return Err(SensingError::CouplingTooStrong { epsilon, ceiling });
    }
    let scale = linewidth / (2.0 * PI * epsilon * epsilon);
    omegas
        .iter()
        .map(|&w| {
            let (_, rho) = system.steady_state(&[w], epsilon)?;
            Ok(scale * system.sensor_populations(&rho)[0])
        })
        .collect()
}

/// Default coupling `min(γ_σ, Γᵢ)/100`, raised if needed so that every
/// `⟨ςᵢ†ⁿςᵢⁿ⟩` stays above [`NORMALIZATION_FLOOR`].
///
/// The bundle normalizations are estimated from a single-photon pilot run at
/// the default coupling as `(⟨ς†ς⟩·(ε/ε₀)²)ⁿ`.
pub fn epsilon_policy(p: &EmitterParams, sensors: &[SensorSpec]) -> Result<f64, SensingError> {
    let pilot_templates: Vec<SensorSpec> =
        sensors.iter().map(|s| SensorSpec { photons: 1, truncation_padding: 0, ..*s }).collect();
    let pilot = SensorSystem::new(p, &pilot_templates)?;
    let freqs: Vec<f64> = sensors.iter().map(|s| s.frequency).collect();
    let photons: Vec<u32> = sensors.iter().map(|s| s.photons).collect();
    policy_with_pilot(&pilot, &freqs, &photons)
}

fn policy_with_pilot(pilot: &SensorSystem, freqs: &[f64], photons: &[u32]) -> Result<f64, SensingError> {
    let min_rate = pilot.min_rate();
    let default = DEFAULT_COUPLING_FRACTION * min_rate;
    let ceiling = MAX_COUPLING_FRACTION * min_rate;
    let (_, rho) = pilot.steady_state(freqs, default)?;
    let pops = pilot.sensor_populations(&rho);
    let mut eps = default;
    for (&pop, &n) in pops.iter().zip(photons) {
        if !(pop > 0.0) {
            return Err(SensingError::InfeasibleEpsilon { required: f64::INFINITY, ceiling });
        }
        let n = f64::from(n);
        // (pop·(ε/ε₀)²)ⁿ ≥ floor
        let needed = default * (NORMALIZATION_FLOOR.powf(1.0 / n) / pop).sqrt();
        eps = eps.max(needed);
    }
    if eps > ceiling {
        return Err(SensingError::InfeasibleEpsilon { required: eps, ceiling });
    }
    Ok(eps)
}

/// Evaluates two-sensor bundle correlators for one emitter, bundle pair and
/// set of linewidths at arbitrary sensor frequencies, reusing the assembled
/// Liouvillian pieces between calls.
#[derive(Debug, Clone)]
pub struct BundleCorrelator {
    system: SensorSystem,
    pilot: Option<SensorSystem>,
    epsilon: Option<f64>,
    rel_tol: f64,
}

impl BundleCorrelator {
    /// `epsilon = None` applies [`epsilon_policy`] at every frequency pair.
    pub fn new(p: &EmitterParams, templates: [SensorSpec; 2], epsilon: Option<f64>) -> Result<Self, SensingError> {
        if let Some(e) = epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return Err(SensingError::InvalidSensor(format!("coupling must be > 0, got {e}")));
            }
        }
        let system = SensorSystem::new(p, &templates)?;
        let pilot = if templates.iter().all(|s| s.photons == 1 && s.truncation_padding == 0) {
            None
        } else {
            let t = templates.map(|s| SensorSpec { photons: 1, truncation_padding: 0, ..s });
            Some(SensorSystem::new(p, &t)?)
        };
        Ok(Self { system, pilot, epsilon, rel_tol: crate::liouville::DEFAULT_REL_TOL })
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn system(&self) -> &SensorSystem {
        &self.system
    }

    pub fn epsilon_for(&self, frequencies: &[f64; 2]) -> Result<f64, SensingError> {
        match self.epsilon {
            Some(e) => Ok(e),
            None => policy_with_pilot(self.pilot.as_ref().unwrap_or(&self.system), frequencies, self.system.photons()),
        }
    }

    pub fn zero_delay(&self, omega1: f64, omega2: f64) -> Result<CorrelationResult, SensingError> {
        let freqs = [omega1, omega2];
        let eps = self.epsilon_for(&freqs)?;
        let value = self.system.zero_delay_value(&freqs, eps)?;
        let halved = self.system.zero_delay_value(&freqs, eps / 2.0)?;
        Ok(CorrelationResult::from_pair(value, halved, eps))
    }

    pub fn tau_resolved(&self, omega1: f64, omega2: f64, taus: &[f64]) -> Result<Vec<CorrelationResult>, SensingError> {
        let freqs = [omega1, omega2];
        let eps = self.epsilon_for(&freqs)?;
        let values = self.system.tau_values(&freqs, eps, taus, self.rel_tol)?;
        let halved = self.system.tau_values(&freqs, eps / 2.0, taus, self.rel_tol)?;
        Ok(values.iter().zip(&halved).map(|(&v, &h)| CorrelationResult::from_pair(v, h, eps)).collect())
    }
}

fn explicit_pair(p: &EmitterParams, s1: &SensorSpec, s2: &SensorSpec) -> Result<BundleCorrelator, SensingError> {
    s1.validate()?;
    s2.validate()?;
    let eps = common_coupling(&[*s1, *s2])?;
    BundleCorrelator::new(p, [*s1, *s2], Some(eps))
}

/// `g⁽²⁾_{n₁,n₂}(ω₁, ω₂)` at zero delay, at the sensors' coupling and checked
/// against half of it.
pub fn bundle_g2_zero_delay(p: &EmitterParams, s1: &SensorSpec, s2: &SensorSpec) -> Result<CorrelationResult, SensingError> {
    explicit_pair(p, s1, s2)?.zero_delay(s1.frequency, s2.frequency)
}

/// `g⁽²⁾_{n₁,n₂}(ω₁, ω₂; τ)` for `τ ≥ 0`, bundle 1 detected first. Negative
/// delays follow from `g(ω₁, ω₂; −τ) = g(ω₂, ω₁; τ)`.
pub fn bundle_g2_tau(
    p: &EmitterParams,
    s1: &SensorSpec,
    s2: &SensorSpec,
    taus: &[f64],
) -> Result<Vec<CorrelationResult>, SensingError> {
    explicit_pair(p, s1, s2)?.tau_resolved(s1.frequency, s2.frequency, taus)
}
