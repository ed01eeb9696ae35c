//! JSON scenario configuration.

use std::num::NonZeroUsize;
use std::path::PathBuf;

use serde::Deserialize;

use crate::mollow::{EmitterParams, SidebandOrder};
use crate::sensing::{epsilon_policy, SensorSpec, DEFAULT_COUPLING_FRACTION};
use crate::sweep::{default_workers, Axis, GridSpec};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invalid `{path}`: {message}")]
    Validation { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation { path: path.into(), message: message.into() }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEmitter {
    #[serde(default = "unit_rate")]
    gamma: f64,
    omega: f64,
    #[serde(default)]
    detuning: f64,
}

fn unit_rate() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSensor {
    #[serde(default)]
    frequency: f64,
    linewidth: f64,
    #[serde(default = "one_photon")]
    photons: u32,
    coupling: Option<f64>,
    #[serde(default)]
    truncation_padding: u32,
}

fn one_photon() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    min: f64,
    max: f64,
    points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    omega: RawGrid,
    linewidth: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDelays {
    tau: RawGrid,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLandscape {
    omega1: RawGrid,
    omega2: RawGrid,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTimeFreq {
    omega2: f64,
    omega1: RawGrid,
    tau: RawGrid,
}

#[derive(Debug)]
enum RawTask {
    Spectrum(RawSpectrum),
    G2tau(RawDelays),
    Landscape(RawLandscape),
    Timefreq(RawTimeFreq),
    CompareApprox(RawDelays),
}

fn schema_error<E: std::fmt::Display>(prefix: &str, e: serde_path_to_error::Error<E>) -> ConfigError {
    let inner = e.path().to_string();
    let path = if inner == "." { prefix.to_string() } else { format!("{prefix}.{inner}") };
    ConfigError::Schema { path, message: e.into_inner().to_string() }
}

fn variant<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(v).map_err(|e| schema_error("task", e))
}

// Internally tagged enums lose the field path, so the tag is read by hand.
fn parse_task(mut v: serde_json::Value) -> Result<RawTask, ConfigError> {
    let schema = |path: &str, message: String| ConfigError::Schema { path: path.into(), message };
    let obj = v.as_object_mut().ok_or_else(|| schema("task", "expected an object".into()))?;
    let tag = obj.remove("type").ok_or_else(|| schema("task.type", "missing field".into()))?;
    let tag = tag.as_str().ok_or_else(|| schema("task.type", format!("expected a string, got {tag}")))?.to_string();
    Ok(match tag.as_str() {
        "spectrum" => RawTask::Spectrum(variant(v)?),
        "g2tau" => RawTask::G2tau(variant(v)?),
        "landscape" => RawTask::Landscape(variant(v)?),
        "timefreq" => RawTask::Timefreq(variant(v)?),
        "compare-approx" => RawTask::CompareApprox(variant(v)?),
        other => {
            return Err(schema(
                "task.type",
                format!("unknown task `{other}`, expected one of spectrum, g2tau, landscape, timefreq, compare-approx"),
            ))
        }
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    emitter: RawEmitter,
    #[serde(default)]
    sensors: Vec<RawSensor>,
    #[serde(default)]
    epsilon: Option<f64>,
    task: serde_json::Value,
    output: PathBuf,
    #[serde(default)]
    workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Spectrum,
    G2Tau,
    Landscape,
    TimeFreq,
    CompareApprox,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Spectrum => "spectrum",
            TaskKind::G2Tau => "g2tau",
            TaskKind::Landscape => "landscape",
            TaskKind::TimeFreq => "timefreq",
            TaskKind::CompareApprox => "compare-approx",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Spectrum { omega: GridSpec, linewidth: f64 },
    G2Tau { tau: GridSpec },
    Landscape { omega1: GridSpec, omega2: GridSpec },
    TimeFreq { omega2: f64, omega1: GridSpec, tau: GridSpec },
    CompareApprox { tau: GridSpec, order: SidebandOrder },
}

impl Task {
    pub fn kind(&self) -> TaskKind {
        match self {
            Task::Spectrum { .. } => TaskKind::Spectrum,
            Task::G2Tau { .. } => TaskKind::G2Tau,
            Task::Landscape { .. } => TaskKind::Landscape,
            Task::TimeFreq { .. } => TaskKind::TimeFreq,
            Task::CompareApprox { .. } => TaskKind::CompareApprox,
        }
    }
}

/// Validated configuration with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub emitter: EmitterParams,
    /// Couplings hold the resolved ε, or 0 when it is chosen per grid point.
    pub sensors: Vec<SensorSpec>,
    /// `None` for grid tasks whose ε follows the policy at every point.
    pub epsilon: Option<f64>,
    pub task: Task,
    pub output: PathBuf,
    pub workers: NonZeroUsize,
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::Schema { path, message: e.into_inner().to_string() }
    })?;
    let task = parse_task(raw.task.take())?;
    validate(raw, task)
}

fn check_finite(path: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, format!("must be finite, got {v}")))
    }
}

fn check_positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, format!("must be > 0, got {v}")))
    }
}

fn grid(path: &str, axis: Axis, g: RawGrid) -> Result<GridSpec, ConfigError> {
    check_finite(&format!("{path}.min"), g.min)?;
    check_finite(&format!("{path}.max"), g.max)?;
    if !(g.min < g.max) {
        return Err(invalid(format!("{path}.max"), format!("must exceed min {}, got {}", g.min, g.max)));
    }
    if g.points < 2 {
        return Err(invalid(format!("{path}.points"), format!("must be >= 2, got {}", g.points)));
    }
    Ok(GridSpec { axis, min: g.min, max: g.max, points: g.points })
}

fn validate(raw: RawConfig, task: RawTask) -> Result<ScenarioConfig, ConfigError> {
    check_positive("emitter.gamma", raw.emitter.gamma)?;
    if !(raw.emitter.omega >= 0.0 && raw.emitter.omega.is_finite()) {
        return Err(invalid("emitter.omega", format!("must be >= 0, got {}", raw.emitter.omega)));
    }
    check_finite("emitter.detuning", raw.emitter.detuning)?;
    let emitter = EmitterParams { gamma_sigma: raw.emitter.gamma, omega_drive: raw.emitter.omega, detuning: raw.emitter.detuning };

    let mut sensors = Vec::with_capacity(raw.sensors.len());
    for (i, s) in raw.sensors.iter().enumerate() {
        let at = |field: &str| format!("sensors[{i}].{field}");
        check_finite(&at("frequency"), s.frequency)?;
        check_positive(&at("linewidth"), s.linewidth)?;
        if s.photons < 1 {
            return Err(invalid(at("photons"), "must be >= 1"));
        }
        if let Some(c) = s.coupling {
            check_positive(&at("coupling"), c)?;
        }
        sensors.push(SensorSpec {
            frequency: s.frequency,
            linewidth: s.linewidth,
            photons: s.photons,
            coupling: 0.0,
            truncation_padding: s.truncation_padding,
        });
    }

    let mut explicit = raw.epsilon;
    if let Some(e) = explicit {
        check_positive("epsilon", e)?;
    }
    for (i, s) in raw.sensors.iter().enumerate() {
        match (explicit, s.coupling) {
            (None, Some(c)) => explicit = Some(c),
            (Some(e), Some(c)) if e != c => {
                return Err(invalid(format!("sensors[{i}].coupling"), format!("{c} disagrees with coupling {e}")));
            }
            _ => {}
        }
    }

    let workers = match raw.workers {
        None => default_workers(),
        Some(w) => NonZeroUsize::new(w).ok_or_else(|| invalid("workers", "must be >= 1"))?,
    };

    let need_pair = |kind: &str| -> Result<(), ConfigError> {
        if sensors.len() == 2 {
            Ok(())
        } else {
            Err(invalid("sensors", format!("task `{kind}` needs exactly 2 sensors, got {}", sensors.len())))
        }
    };

    let task = match task {
        RawTask::Spectrum(RawSpectrum { omega, linewidth }) => {
            let linewidth = match (linewidth, sensors.first()) {
                (Some(l), _) => {
                    check_positive("task.linewidth", l)?;
                    l
                }
                (None, Some(s)) => s.linewidth,
                (None, None) => return Err(invalid("task.linewidth", "required when no sensor is given")),
            };
            Task::Spectrum { omega: grid("task.omega", Axis::Omega1, omega)?, linewidth }
        }
        RawTask::G2tau(RawDelays { tau }) => {
            need_pair("g2tau")?;
            Task::G2Tau { tau: grid("task.tau", Axis::Tau, tau)? }
        }
        RawTask::Landscape(RawLandscape { omega1, omega2 }) => {
            need_pair("landscape")?;
            Task::Landscape { omega1: grid("task.omega1", Axis::Omega1, omega1)?, omega2: grid("task.omega2", Axis::Omega2, omega2)? }
        }
        RawTask::Timefreq(RawTimeFreq { omega2, omega1, tau }) => {
            need_pair("timefreq")?;
            check_finite("task.omega2", omega2)?;
            Task::TimeFreq { omega2, omega1: grid("task.omega1", Axis::Omega1, omega1)?, tau: grid("task.tau", Axis::Tau, tau)? }
        }
        RawTask::CompareApprox(RawDelays { tau }) => {
            need_pair("compare-approx")?;
            for (i, s) in sensors.iter().enumerate() {
                if s.photons != 1 {
                    return Err(invalid(format!("sensors[{i}].photons"), "the dressed-state approximation covers single photons only"));
                }
            }
            if sensors[0].linewidth != sensors[1].linewidth {
                return Err(invalid("sensors[1].linewidth", "the dressed-state approximation needs equal linewidths"));
            }
            if emitter.omega_drive == 0.0 {
                return Err(invalid("emitter.omega", "the dressed-state approximation needs a driven emitter"));
            }
            let order = if sensors[0].frequency < sensors[1].frequency {
                SidebandOrder::LowThenHigh
            } else if sensors[0].frequency > sensors[1].frequency {
                SidebandOrder::HighThenLow
            } else {
                return Err(invalid("sensors[1].frequency", "compare-approx needs one sensor on each sideband"));
            };
            Task::CompareApprox { tau: grid("task.tau", Axis::Tau, tau)?, order }
        }
    };

    let epsilon = match (&task, explicit) {
        (_, Some(e)) => Some(e),
        (Task::Spectrum { linewidth, .. }, None) => Some(DEFAULT_COUPLING_FRACTION * linewidth.min(emitter.gamma_sigma)),
        (Task::G2Tau { .. } | Task::CompareApprox { .. }, None) => {
            Some(epsilon_policy(&emitter, &sensors).map_err(|e| invalid("epsilon", e.to_string()))?)
        }
        (Task::Landscape { .. } | Task::TimeFreq { .. }, None) => None,
    };
    if let Some(e) = epsilon {
        for s in &mut sensors {
            s.coupling = e;
        }
    }

    Ok(ScenarioConfig { emitter, sensors, epsilon, task, output: raw.output, workers })
}
