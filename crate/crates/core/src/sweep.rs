//! Grid evaluation of bundle correlators: delay traces, frequency-frequency
//! landscapes and joint time-frequency maps, with leapfrog-line annotations.
//!
//! Every grid point is an independent pure computation. Points are split into
//! contiguous blocks, one per worker, and each worker writes only into its own
//! block of the output, so the result does not depend on the worker count.

use std::num::NonZeroUsize;

use serde::{Deserialize, Serialize};

use crate::mollow::{dressed_splitting, DressedQuantities, EmitterParams};
use crate::sensing::{BundleCorrelator, CorrelationResult, SensingError, SensorSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Sensing(#[from] SensingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Omega1,
    Omega2,
    Tau,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Omega1 => "omega1",
            Axis::Omega2 => "omega2",
            Axis::Tau => "tau",
        }
    }
}

/// Uniform grid including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(axis: Axis, min: f64, max: f64, points: usize) -> Result<Self, SweepError> {
        let g = Self { axis, min, max, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let name = self.axis.name();
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(SweepError::InvalidGrid(format!("{name}: bounds must be finite")));
        }
        if !(self.min < self.max) {
            return Err(SweepError::InvalidGrid(format!("{name}: min {} must be below max {}", self.min, self.max)));
        }
        if self.points < 2 {
            return Err(SweepError::InvalidGrid(format!("{name}: at least 2 points required, got {}", self.points)));
        }
        Ok(())
    }

    pub fn value(&self, k: usize) -> f64 {
        if k + 1 == self.points {
            return self.max;
        }
        self.min + k as f64 * (self.max - self.min) / (self.points - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.value(k)).collect()
    }
}

/// The line `n₁ω₁ + n₂ω₂ = constant` in the frequency plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeapfrogLine {
    pub n1: u32,
    pub n2: u32,
    pub constant: f64,
}

impl LeapfrogLine {
    pub fn omega2_at(&self, omega1: f64) -> f64 {
        (self.constant - f64::from(self.n1) * omega1) / f64::from(self.n2)
    }

    pub fn omega1_at(&self, omega2: f64) -> f64 {
        (self.constant - f64::from(self.n2) * omega2) / f64::from(self.n1)
    }

    /// Euclidean distance from `(ω₁, ω₂)` to the line.
    pub fn distance(&self, omega1: f64, omega2: f64) -> f64 {
        let (a, b) = (f64::from(self.n1), f64::from(self.n2));
        (a * omega1 + b * omega2 - self.constant).abs() / a.hypot(b)
    }
}

/// Energy conservation for `n₁ + n₂` photons emitted across the dressed
/// ladder: the total emitted energy relative to the laser is `0` or `±Ω₊`.
pub fn leapfrog_lines(n1: u32, n2: u32, dressed: &DressedQuantities) -> Vec<LeapfrogLine> {
    let s = dressed.splitting;
    let mut lines: Vec<LeapfrogLine> =
        [-s, 0.0, s].into_iter().map(|constant| LeapfrogLine { n1, n2, constant }).collect();
    lines.dedup_by(|a, b| a.constant == b.constant);
    lines
}

/// Emitter plus the two sensor templates. Sensor frequencies are used by
/// traces only; landscapes and maps take them from the grids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub emitter: EmitterParams,
    pub sensors: [SensorSpec; 2],
    /// `None` applies the coupling policy at every grid point.
    pub epsilon: Option<f64>,
}

impl Scenario {
    pub fn new(emitter: EmitterParams, sensors: [SensorSpec; 2], epsilon: Option<f64>) -> Self {
        Self { emitter, sensors, epsilon }
    }

    fn correlator(&self) -> Result<BundleCorrelator, SweepError> {
        Ok(BundleCorrelator::new(&self.emitter, self.sensors, self.epsilon)?)
    }

    fn swapped(&self) -> Self {
        let [a, b] = self.sensors;
        Self { sensors: [b, a], ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResultKind {
    /// 1-D over τ at fixed sensor frequencies.
    Trace,
    /// 2-D over (ω₁, ω₂) at zero delay, ω₁-major.
    Landscape,
    /// 2-D over (ω₁, τ) at fixed ω₂, ω₁-major.
    TimeFrequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMeta {
    pub epsilon: f64,
    pub convergence: f64,
    pub converged: bool,
}

impl From<&CorrelationResult> for PointMeta {
    fn from(r: &CorrelationResult) -> Self {
        Self { epsilon: r.epsilon_used, convergence: r.convergence, converged: r.converged }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeResult {
    pub kind: ResultKind,
    pub axes: Vec<GridSpec>,
    pub scenario: Scenario,
    /// Fixed ω₂ of a time-frequency map.
    pub fixed_omega2: Option<f64>,
    pub values: Vec<f64>,
    pub meta: Vec<PointMeta>,
    pub annotations: Vec<LeapfrogLine>,
}

impl LandscapeResult {
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.points).collect()
    }

    /// Value at grid indices, first axis slowest.
    pub fn at(&self, idx: &[usize]) -> f64 {
        self.values[self.flat_index(idx)]
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.axes.len(), "index rank");
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, a)| {
            assert!(i < a.points, "index {i} out of range for {}", a.axis.name());
            acc * a.points + i
        })
    }

    /// Grid coordinates of each flat index, first axis slowest.
    pub fn coordinates(&self) -> Vec<Vec<f64>> {
        let grids: Vec<Vec<f64>> = self.axes.iter().map(GridSpec::values).collect();
        (0..self.values.len())
            .map(|mut flat| {
                let mut c = vec![0.0; grids.len()];
                for (slot, g) in c.iter_mut().zip(&grids).rev() {
                    *slot = g[flat % g.len()];
                    flat /= g.len();
                }
                c
            })
            .collect()
    }

    pub fn unconverged_count(&self) -> usize {
        self.meta.iter().filter(|m| !m.converged).count()
    }

    pub fn unconverged_fraction(&self) -> f64 {
        if self.meta.is_empty() {
            0.0
        } else {
            self.unconverged_count() as f64 / self.meta.len() as f64
        }
    }

    pub fn max_convergence(&self) -> f64 {
        self.meta.iter().map(|m| m.convergence).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub workers: NonZeroUsize,
}

impl SweepOptions {
    pub fn with_workers(workers: usize) -> Self {
        Self { workers: NonZeroUsize::new(workers).unwrap_or(NonZeroUsize::MIN) }
    }
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { workers: default_workers() }
    }
}

pub fn default_workers() -> NonZeroUsize {
    std::thread::available_parallelism().unwrap_or(NonZeroUsize::MIN)
}

/// Evaluates `f(0..n)` over contiguous blocks on `workers` threads. The first
/// error in index order is returned.
pub fn parallel_map<T, E, F>(n: usize, workers: NonZeroUsize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync,
{
    let mut slots: Vec<Option<Result<T, E>>> = (0..n).map(|_| None).collect();
    let workers = workers.get().min(n.max(1));
    if workers == 1 {
        for (i, s) in slots.iter_mut().enumerate() {
            *s = Some(f(i));
        }
    } else {
        let block = n.div_ceil(workers);
        std::thread::scope(|scope| {
            for (b, chunk) in slots.chunks_mut(block).enumerate() {
                let f = &f;
                scope.spawn(move || {
                    for (k, s) in chunk.iter_mut().enumerate() {
                        *s = Some(f(b * block + k));
                    }
                });
            }
        });
    }
    slots.into_iter().map(|s| s.expect("every slot is written")).collect()
}

fn require_axis(g: &GridSpec, axis: Axis) -> Result<(), SweepError> {
    g.validate()?;
    if g.axis != axis {
        return Err(SweepError::InvalidGrid(format!("expected a {} grid, got {}", axis.name(), g.axis.name())));
    }
    Ok(())
}

/// Splits a delay grid into its non-negative part and the mirrored negative
/// part, both ascending in `|τ|`, with the original index of each.
fn split_delays(taus: &[f64]) -> (Vec<(usize, f64)>, Vec<(usize, f64)>) {
    let mut forward: Vec<(usize, f64)> = Vec::new();
    let mut backward: Vec<(usize, f64)> = Vec::new();
    for (i, &t) in taus.iter().enumerate() {
        if t >= 0.0 {
            forward.push((i, t));
        } else {
            backward.push((i, -t));
        }
    }
    backward.sort_by(|a, b| a.1.total_cmp(&b.1));
    (forward, backward)
}

/// Delay-resolved values on an arbitrary grid. Negative delays use
/// `g(ω₁, ω₂; −τ) = g(ω₂, ω₁; τ)` with the sensors exchanged.
fn signed_delay_values(
    forward_corr: &BundleCorrelator,
    backward_corr: Option<&BundleCorrelator>,
    omega1: f64,
    omega2: f64,
    taus: &[f64],
) -> Result<Vec<CorrelationResult>, SweepError> {
    let (fwd, bwd) = split_delays(taus);
    let mut out = vec![None; taus.len()];
    if !fwd.is_empty() {
        let t: Vec<f64> = fwd.iter().map(|p| p.1).collect();
        for ((i, _), r) in fwd.iter().zip(forward_corr.tau_resolved(omega1, omega2, &t)?) {
            out[*i] = Some(r);
        }
    }
    if !bwd.is_empty() {
        let corr = backward_corr.ok_or_else(|| SweepError::InvalidGrid("negative delays need both orderings".into()))?;
        let t: Vec<f64> = bwd.iter().map(|p| p.1).collect();
        for ((i, _), r) in bwd.iter().zip(corr.tau_resolved(omega2, omega1, &t)?) {
            out[*i] = Some(r);
        }
    }
    Ok(out.into_iter().map(|r| r.expect("every delay assigned")).collect())
}

fn unzip_results(results: &[CorrelationResult]) -> (Vec<f64>, Vec<PointMeta>) {
    (results.iter().map(|r| r.value).collect(), results.iter().map(PointMeta::from).collect())
}

fn lines_for(scenario: &Scenario) -> Vec<LeapfrogLine> {
    leapfrog_lines(scenario.sensors[0].photons, scenario.sensors[1].photons, &dressed_splitting(&scenario.emitter))
}

/// `g⁽²⁾(ω₁, ω₂; τ)` over a delay grid at the sensor frequencies of the
/// scenario. A grid reaching below zero covers both detection orderings.
pub fn run_tau_trace(scenario: &Scenario, tau: &GridSpec, opts: &SweepOptions) -> Result<LandscapeResult, SweepError> {
    require_axis(tau, Axis::Tau)?;
    let [s1, s2] = scenario.sensors;
    let taus = tau.values();
    let forward = scenario.correlator()?;
    let backward = if tau.min < 0.0 { Some(scenario.swapped().correlator()?) } else { None };
    let (fwd, bwd) = split_delays(&taus);

    // the two orderings are independent propagations
    let halves = parallel_map(2, opts.workers, |which| -> Result<Vec<(usize, CorrelationResult)>, SweepError> {
        let (part, corr, w1, w2) = match which {
            0 => (&fwd, Some(&forward), s1.frequency, s2.frequency),
            _ => (&bwd, backward.as_ref(), s2.frequency, s1.frequency),
        };
        if part.is_empty() {
            return Ok(Vec::new());
        }
        let corr = corr.expect("swapped correlator exists for negative delays");
        let t: Vec<f64> = part.iter().map(|p| p.1).collect();
        Ok(part.iter().map(|p| p.0).zip(corr.tau_resolved(w1, w2, &t)?).collect())
    })?;
    let mut results = vec![None; taus.len()];
    for (i, r) in halves.into_iter().flatten() {
        results[i] = Some(r);
    }
    let results: Vec<CorrelationResult> = results.into_iter().map(|r| r.expect("every delay assigned")).collect();
    let (values, meta) = unzip_results(&results);
    Ok(LandscapeResult {
        kind: ResultKind::Trace,
        axes: vec![*tau],
        scenario: *scenario,
        fixed_omega2: None,
        values,
        meta,
        annotations: Vec::new(),
    })
}

/// Zero-delay `g⁽²⁾_{n₁,n₂}(ω₁, ω₂)` over the product grid, ω₁-major.
pub fn run_frequency_landscape(
    scenario: &Scenario,
    omega1: &GridSpec,
    omega2: &GridSpec,
    opts: &SweepOptions,
) -> Result<LandscapeResult, SweepError> {
    require_axis(omega1, Axis::Omega1)?;
    require_axis(omega2, Axis::Omega2)?;
    let corr = scenario.correlator()?;
    let w1 = omega1.values();
    let w2 = omega2.values();
    let n2 = w2.len();
    let results = parallel_map(w1.len() * n2, opts.workers, |k| corr.zero_delay(w1[k / n2], w2[k % n2]))?;
    let (values, meta) = unzip_results(&results);
    Ok(LandscapeResult {
        kind: ResultKind::Landscape,
        axes: vec![*omega1, *omega2],
        scenario: *scenario,
        fixed_omega2: None,
        values,
        meta,
        annotations: lines_for(scenario),
    })
}

/// `g⁽²⁾(ω₁, ω₂; τ)` over (ω₁, τ) at fixed ω₂, ω₁-major. Each ω₁ is one
/// propagation over the whole delay grid.
pub fn run_time_frequency_map(
    scenario: &Scenario,
    omega2: f64,
    omega1: &GridSpec,
    tau: &GridSpec,
    opts: &SweepOptions,
) -> Result<LandscapeResult, SweepError> {
    require_axis(omega1, Axis::Omega1)?;
    require_axis(tau, Axis::Tau)?;
    if !omega2.is_finite() {
        return Err(SweepError::InvalidScenario(format!("fixed omega2 must be finite, got {omega2}")));
    }
    let forward = scenario.correlator()?;
    let backward = if tau.min < 0.0 { Some(scenario.swapped().correlator()?) } else { None };
    let w1 = omega1.values();
    let taus = tau.values();
    let rows = parallel_map(w1.len(), opts.workers, |i| signed_delay_values(&forward, backward.as_ref(), w1[i], omega2, &taus))?;
    let results: Vec<CorrelationResult> = rows.into_iter().flatten().collect();
    let (values, meta) = unzip_results(&results);
    Ok(LandscapeResult {
        kind: ResultKind::TimeFrequency,
        axes: vec![*omega1, *tau],
        scenario: *scenario,
        fixed_omega2: Some(omega2),
        values,
        meta,
        annotations: lines_for(scenario),
    })
}
