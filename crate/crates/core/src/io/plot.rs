//! Standalone matplotlib scripts that render a written CSV.

use std::fmt::Write as _;
use std::path::Path;

use super::{RunError, TaskOutput, TOOL_VERSION};
use crate::sweep::ResultKind;

const PREAMBLE: &str = r##"import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import TwoSlopeNorm

HERE = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(HERE, CSV)) as f:
    rows = [line for line in f if not line.startswith("#")]
names = rows[0].strip().split(",")
table = np.loadtxt(rows[1:], delimiter=",", ndmin=2)
data = {name: table[:, k] for k, name in enumerate(names)}
"##;

// log10 g2 on a diverging map whose white midpoint is g2 = 1
const LOG_MAP: &str = r#"logg = np.log10(np.clip(data["g2"], 1e-6, None)).reshape(N1, N2)
span = max(float(np.abs(logg).max()), 1e-12)
fig, ax = plt.subplots(figsize=(6, 5))
mesh = ax.pcolormesh(x, y, logg.T, cmap="bwr", norm=TwoSlopeNorm(vcenter=0.0, vmin=-span, vmax=span), shading="nearest")
fig.colorbar(mesh, ax=ax, label=r"$\log_{10} g^{(2)}$")
"#;

const SAVE: &str = r#"fig.tight_layout()
fig.savefig(os.path.join(HERE, PNG), dpi=150)
"#;

fn py_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Script text for `output`, reading the CSV named `csv_name` from the
/// script's own directory and saving `png_name` beside it.
pub fn plot_script(output: &TaskOutput, csv_name: &str, png_name: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "#!/usr/bin/env python3");
    let _ = writeln!(s, "# Generated by mollow {TOOL_VERSION}. Renders {csv_name}.");
    let _ = writeln!(s, "CSV = {csv_name:?}");
    let _ = writeln!(s, "PNG = {png_name:?}");
    s.push_str(PREAMBLE);
    match output {
        TaskOutput::Spectrum(_) => {
            s.push_str("fig, ax = plt.subplots(figsize=(6, 4))\n");
            s.push_str("ax.plot(data[\"omega\"], data[\"intensity\"], lw=1.2)\n");
            s.push_str("ax.set_xlabel(r\"$\\omega/\\gamma_\\sigma$\")\nax.set_ylabel(r\"$S_\\Gamma(\\omega)$\")\n");
        }
        TaskOutput::Compare { .. } => {
            s.push_str("fig, ax = plt.subplots(figsize=(6, 4))\n");
            s.push_str("ax.plot(data[\"tau\"], data[\"g2\"], lw=1.2, label=\"sensors\")\n");
            s.push_str("ax.plot(data[\"tau\"], data[\"g2_approx\"], \"--\", lw=1.2, label=\"dressed-state approximation\")\n");
            s.push_str("ax.axhline(1.0, color=\"0.6\", lw=0.6)\nax.legend()\n");
            s.push_str("ax.set_xlabel(r\"$\\gamma_\\sigma\\tau$\")\nax.set_ylabel(r\"$g^{(2)}(\\tau)$\")\n");
        }
        TaskOutput::Grid(r) => match r.kind {
            ResultKind::Trace => {
                s.push_str("fig, ax = plt.subplots(figsize=(6, 4))\n");
                s.push_str("ax.plot(data[\"tau\"], data[\"g2\"], lw=1.2)\n");
                s.push_str("ax.axhline(1.0, color=\"0.6\", lw=0.6)\n");
                s.push_str("ax.set_xlabel(r\"$\\gamma_\\sigma\\tau$\")\nax.set_ylabel(r\"$g^{(2)}(\\tau)$\")\n");
            }
            ResultKind::Landscape | ResultKind::TimeFrequency => {
                let (c1, c2) = if r.kind == ResultKind::Landscape { ("omega1", "omega2") } else { ("omega1", "tau") };
                let _ = writeln!(s, "N1, N2 = {}, {}", r.axes[0].points, r.axes[1].points);
                let _ = writeln!(s, "x = data[{c1:?}].reshape(N1, N2)[:, 0]");
                let _ = writeln!(s, "y = data[{c2:?}].reshape(N1, N2)[0, :]");
                s.push_str(LOG_MAP);
                let lines: Vec<String> = r
                    .annotations
                    .iter()
                    .map(|l| format!("({}, {}, {})", l.n1, l.n2, py_real(l.constant)))
                    .collect();
                let _ = writeln!(s, "LINES = [{}]", lines.join(", "));
                if r.kind == ResultKind::Landscape {
                    s.push_str("xs = np.array([x.min(), x.max()])\n");
                    s.push_str("for n1, n2, c in LINES:\n    ax.plot(xs, (c - n1 * xs) / n2, \"k--\", lw=0.7)\n");
                    s.push_str("ax.set_ylabel(r\"$\\omega_2/\\gamma_\\sigma$\")\n");
                } else {
                    let _ = writeln!(s, "OMEGA2 = {}", py_real(r.fixed_omega2.unwrap_or(0.0)));
                    s.push_str("for n1, n2, c in LINES:\n    ax.axvline((c - n2 * OMEGA2) / n1, color=\"k\", ls=\"--\", lw=0.7)\n");
                    s.push_str("ax.set_ylabel(r\"$\\gamma_\\sigma\\tau$\")\n");
                }
                s.push_str("ax.set_xlim(x.min(), x.max())\nax.set_ylim(y.min(), y.max())\n");
                s.push_str("ax.set_xlabel(r\"$\\omega_1/\\gamma_\\sigma$\")\n");
            }
        },
    }
    s.push_str(SAVE);
    s
}

/// Writes the script for `output` to `script`, pointing it at `csv` by file
/// name. The two files are expected to share a directory.
pub fn emit_plot_script(output: &TaskOutput, csv: &Path, script: &Path) -> Result<(), RunError> {
    let name = |p: &Path| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let png = script.with_extension("png");
    std::fs::write(script, plot_script(output, &name(csv), &name(&png)))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollow::EmitterParams;
    use crate::sensing::SensorSpec;
    use crate::sweep::{Axis, GridSpec, LandscapeResult, LeapfrogLine, PointMeta, Scenario};

    fn landscape() -> TaskOutput {
        let p = EmitterParams::with_drive(10.0, 0.0).unwrap();
        let s = SensorSpec::new(0.0, 5.0, 1, 0.0);
        let g = GridSpec::new(Axis::Omega1, -1.0, 1.0, 2).unwrap();
        TaskOutput::Grid(LandscapeResult {
            kind: ResultKind::Landscape,
            axes: vec![g, GridSpec { axis: Axis::Omega2, ..g }],
            scenario: Scenario::new(p, [s, s], None),
            fixed_omega2: None,
            values: vec![1.0; 4],
            meta: vec![PointMeta { epsilon: 0.01, convergence: 0.0, converged: true }; 4],
            annotations: vec![LeapfrogLine { n1: 1, n2: 1, constant: 20.0 }],
        })
    }

    #[test]
    fn landscape_script_uses_relative_csv_and_centered_map() {
        let s = plot_script(&landscape(), "landscape.csv", "landscape.png");
        assert!(s.contains("CSV = \"landscape.csv\""));
        assert!(s.contains("os.path.join(HERE, CSV)"));
        assert!(s.contains("cmap=\"bwr\""));
        assert!(s.contains("TwoSlopeNorm(vcenter=0.0"));
        assert!(s.contains("np.log10"));
        assert!(s.contains("LINES = [(1, 1, 2.0000000000000000e1)]"));
    }

    #[test]
    fn trace_script_is_a_line_plot() {
        let TaskOutput::Grid(mut r) = landscape() else { unreachable!() };
        r.kind = ResultKind::Trace;
        r.axes = vec![GridSpec::new(Axis::Tau, 0.0, 1.0, 4).unwrap()];
        let s = plot_script(&TaskOutput::Grid(r), "t.csv", "t.png");
        assert!(s.contains("ax.plot(data[\"tau\"], data[\"g2\"]"));
        assert!(!s.contains("pcolormesh"));
    }

    #[test]
    fn written_next_to_the_csv() {
        let dir = tempfile::tempdir().unwrap();
        let script = dir.path().join("run.py");
        emit_plot_script(&landscape(), &dir.path().join("run.csv"), &script).unwrap();
        let text = std::fs::read_to_string(script).unwrap();
        assert!(text.contains("CSV = \"run.csv\"") && text.contains("PNG = \"run.png\""));
    }
}
