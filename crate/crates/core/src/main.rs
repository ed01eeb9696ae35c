use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use mollow_core::io::{csv_path, emit_csv, emit_plot_script, parse_config, plot_path, run_task, TaskKind};

#[derive(Parser)]
#[command(name = "mollow", version, about = "Frequency- and time-resolved photon correlations of resonance fluorescence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filtered emission spectrum
    Spectrum(Flags),
    /// Delay-resolved two-sensor correlator
    G2tau(Flags),
    /// Zero-delay frequency-frequency landscape
    Landscape(Flags),
    /// Frequency-delay map at fixed second frequency
    Timefreq(Flags),
    /// Sensor trace against the dressed-state approximation
    CompareApprox(Flags),
}

#[derive(clap::Args)]
struct Flags {
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Worker threads; defaults to the config value, then to all cores
    #[arg(long, value_name = "N")]
    workers: Option<NonZeroUsize>,
    /// Exit successfully even if some points failed the ε/2 check
    #[arg(long)]
    allow_unconverged: bool,
    /// Also write a matplotlib script next to the CSV
    #[arg(long)]
    emit_plot: bool,
    /// Extra Fock levels on every sensor, to check truncation
    #[arg(long, value_name = "LEVELS")]
    truncation_padding: Option<u32>,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<ExitCode> {
    let (kind, flags) = match Cli::parse().command {
        Command::Spectrum(f) => (TaskKind::Spectrum, f),
        Command::G2tau(f) => (TaskKind::G2Tau, f),
        Command::Landscape(f) => (TaskKind::Landscape, f),
        Command::Timefreq(f) => (TaskKind::TimeFreq, f),
        Command::CompareApprox(f) => (TaskKind::CompareApprox, f),
    };
    let text = std::fs::read_to_string(&flags.config).with_context(|| format!("reading {}", flags.config.display()))?;
    let mut cfg = parse_config(&text).with_context(|| format!("in {}", flags.config.display()))?;
    if cfg.task.kind() != kind {
        bail!("subcommand `{}` does not match task type `{}` in the config", kind.name(), cfg.task.kind().name());
    }
    if let Some(w) = flags.workers {
        cfg.workers = w;
    }
    if let Some(pad) = flags.truncation_padding {
        for s in &mut cfg.sensors {
            s.truncation_padding = pad;
        }
    }

    let output = run_task(&cfg)?;
    let csv = csv_path(&cfg.output);
    emit_csv(&output, &csv).with_context(|| format!("writing {}", csv.display()))?;
    eprintln!("wrote {} ({} points)", csv.display(), output.point_count());
    if flags.emit_plot {
        let script = plot_path(&cfg.output);
        emit_plot_script(&output, &csv, &script).with_context(|| format!("writing {}", script.display()))?;
        eprintln!("wrote {}", script.display());
    }

    let bad = output.unconverged_count();
    if bad > 0 {
        eprintln!("{bad} of {} points did not converge under ε → ε/2", output.point_count());
        if !flags.allow_unconverged {
            return Ok(ExitCode::from(2));
        }
    }
    Ok(ExitCode::SUCCESS)
}
