//! Scenario configuration, task execution and result files.

mod config;
mod plot;
mod table;

use std::path::{Path, PathBuf};

pub use config::{parse_config, ConfigError, ScenarioConfig, Task, TaskKind};
pub use plot::{emit_plot_script, plot_script};
pub use table::{format_real, ResultTable, TableError};

use crate::mollow::{dressed_splitting, secular_sideband_g2, EmitterParams, MollowError, SidebandOrder};
use crate::sensing::{filtered_spectrum, SensingError, CONVERGENCE_TOL};
use crate::sweep::{
    parallel_map, run_frequency_landscape, run_tau_trace, run_time_frequency_map, GridSpec, LandscapeResult, ResultKind,
    Scenario, SweepError, SweepOptions,
};

pub const TOOL_NAME: &str = "mollow";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const UNITS: &str = "frequencies and rates in gamma_sigma; times in 1/gamma_sigma";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Sensing(#[from] SensingError),
    #[error(transparent)]
    Mollow(#[from] MollowError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub emitter: EmitterParams,
    pub linewidth: f64,
    pub epsilon: f64,
    pub omega: GridSpec,
    pub intensity: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskOutput {
    Spectrum(SpectrumResult),
    /// Delay trace, frequency landscape or time-frequency map.
    Grid(LandscapeResult),
    Compare { exact: LandscapeResult, approx: Vec<f64>, order: SidebandOrder },
}

impl TaskOutput {
    pub fn unconverged_count(&self) -> usize {
        match self {
            TaskOutput::Spectrum(_) => 0,
            TaskOutput::Grid(r) | TaskOutput::Compare { exact: r, .. } => r.unconverged_count(),
        }
    }

    pub fn point_count(&self) -> usize {
        match self {
            TaskOutput::Spectrum(s) => s.intensity.len(),
            TaskOutput::Grid(r) | TaskOutput::Compare { exact: r, .. } => r.values.len(),
        }
    }

    pub fn to_table(&self) -> ResultTable {
        match self {
            TaskOutput::Spectrum(s) => spectrum_table(s),
            TaskOutput::Grid(r) => grid_table(r, None),
            TaskOutput::Compare { exact, approx, order } => grid_table(exact, Some((approx, *order))),
        }
    }
}

fn scenario_of(cfg: &ScenarioConfig) -> Scenario {
    Scenario::new(cfg.emitter, [cfg.sensors[0], cfg.sensors[1]], cfg.epsilon)
}

pub fn run_task(cfg: &ScenarioConfig) -> Result<TaskOutput, RunError> {
    let opts = SweepOptions { workers: cfg.workers };
    Ok(match &cfg.task {
        Task::Spectrum { omega, linewidth } => {
            let epsilon = cfg.epsilon.expect("spectrum coupling is resolved while parsing");
            let omegas = omega.values();
            let intensity = parallel_map(omegas.len(), cfg.workers, |k| {
                filtered_spectrum(&cfg.emitter, *linewidth, &omegas[k..=k], epsilon).map(|v| v[0])
            })?;
            TaskOutput::Spectrum(SpectrumResult { emitter: cfg.emitter, linewidth: *linewidth, epsilon, omega: *omega, intensity })
        }
        Task::G2Tau { tau } => TaskOutput::Grid(run_tau_trace(&scenario_of(cfg), tau, &opts)?),
        Task::Landscape { omega1, omega2 } => TaskOutput::Grid(run_frequency_landscape(&scenario_of(cfg), omega1, omega2, &opts)?),
        Task::TimeFreq { omega2, omega1, tau } => {
            TaskOutput::Grid(run_time_frequency_map(&scenario_of(cfg), *omega2, omega1, tau, &opts)?)
        }
        Task::CompareApprox { tau, order } => {
            let exact = run_tau_trace(&scenario_of(cfg), tau, &opts)?;
            let approx = secular_sideband_g2(&cfg.emitter, cfg.sensors[0].linewidth, *order, &tau.values())?;
            TaskOutput::Compare { exact, approx, order: *order }
        }
    })
}

fn tool_header(t: &mut ResultTable, task: &str) {
    t.meta("tool", TOOL_NAME).meta("version", TOOL_VERSION).meta("task", task).meta("units", UNITS);
}

fn emitter_header(t: &mut ResultTable, p: &EmitterParams) {
    t.meta_real("emitter.gamma", p.gamma_sigma)
        .meta_real("emitter.omega", p.omega_drive)
        .meta_real("emitter.detuning", p.detuning)
        .meta_real("dressed_splitting", dressed_splitting(p).splitting);
}

fn grid_header(t: &mut ResultTable, g: &GridSpec) {
    grid_header_named(t, g.axis.name(), g);
}

fn grid_header_named(t: &mut ResultTable, name: &str, g: &GridSpec) {
    t.meta(&format!("grid.{name}"), format!("min={} max={} points={}", format_real(g.min), format_real(g.max), g.points));
}

fn spectrum_table(s: &SpectrumResult) -> ResultTable {
    let mut t = ResultTable::new(&["omega", "intensity"]);
    tool_header(&mut t, "spectrum");
    emitter_header(&mut t, &s.emitter);
    t.meta_real("linewidth", s.linewidth).meta_real("epsilon", s.epsilon).meta("normalization", "linewidth/(2 pi epsilon^2) <n>");
    grid_header_named(&mut t, "omega", &s.omega);
    for (w, i) in s.omega.values().into_iter().zip(&s.intensity) {
        t.push_row(vec![w, *i]);
    }
    t
}

fn grid_table(r: &LandscapeResult, approx: Option<(&Vec<f64>, SidebandOrder)>) -> ResultTable {
    let (task, mut columns): (&str, Vec<&str>) = match (r.kind, approx.is_some()) {
        (ResultKind::Trace, false) => ("g2tau", vec!["tau", "g2"]),
        (ResultKind::Trace, true) => ("compare-approx", vec!["tau", "g2", "g2_approx"]),
        (ResultKind::Landscape, _) => ("landscape", vec!["omega1", "omega2", "g2"]),
        (ResultKind::TimeFrequency, _) => ("timefreq", vec!["omega1", "tau", "g2"]),
    };
    columns.extend(["epsilon", "converged"]);
    let mut t = ResultTable::new(&columns);
    tool_header(&mut t, task);
    emitter_header(&mut t, &r.scenario.emitter);
    for (i, s) in r.scenario.sensors.iter().enumerate() {
        if r.kind == ResultKind::Trace {
            t.meta_real(&format!("sensors[{i}].frequency"), s.frequency);
        }
        t.meta_real(&format!("sensors[{i}].linewidth"), s.linewidth)
            .meta(&format!("sensors[{i}].photons"), s.photons)
            .meta(&format!("sensors[{i}].truncation_padding"), s.truncation_padding);
    }
    if let Some(w2) = r.fixed_omega2 {
        t.meta_real("omega2", w2);
    }
    match r.scenario.epsilon {
        Some(e) => t.meta_real("epsilon", e),
        None => t.meta("epsilon", "policy per point"),
    };
    let eps_min = r.meta.iter().map(|m| m.epsilon).fold(f64::INFINITY, f64::min);
    let eps_max = r.meta.iter().map(|m| m.epsilon).fold(0.0, f64::max);
    t.meta_real("epsilon_min", eps_min)
        .meta_real("epsilon_max", eps_max)
        .meta_real("convergence_tol", CONVERGENCE_TOL)
        .meta_real("max_convergence", r.max_convergence())
        .meta("unconverged_points", r.unconverged_count())
        .meta("all_converged", r.unconverged_count() == 0);
    if let Some((_, order)) = approx {
        t.meta("approx_order", if order == SidebandOrder::LowThenHigh { "low-then-high" } else { "high-then-low" });
    }
    for a in &r.axes {
        grid_header(&mut t, a);
    }
    for (k, l) in r.annotations.iter().enumerate() {
        t.meta(&format!("leapfrog[{k}]"), format!("{}*omega1+{}*omega2={}", l.n1, l.n2, format_real(l.constant)));
    }
    for (k, (coords, (v, m))) in r.coordinates().into_iter().zip(r.values.iter().zip(&r.meta)).enumerate() {
        let mut row = coords;
        row.push(*v);
        if let Some((a, _)) = approx {
            row.push(a[k]);
        }
        row.push(m.epsilon);
        row.push(if m.converged { 1.0 } else { 0.0 });
        t.push_row(row);
    }
    t
}

/// `<output>.csv`
pub fn csv_path(output: &Path) -> PathBuf {
    with_suffix(output, "csv")
}

/// `<output>.py`
pub fn plot_path(output: &Path) -> PathBuf {
    with_suffix(output, "py")
}

fn with_suffix(output: &Path, ext: &str) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Writes the result table, creating missing parent directories.
pub fn emit_csv(output: &TaskOutput, path: &Path) -> Result<ResultTable, RunError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let table = output.to_table();
    table.write(path)?;
    Ok(table)
}
