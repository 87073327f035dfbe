//! Command-line front end: sweeps from JSON experiment files, the built-in
//! figure presets, and the quantization-error report.
//!
//! Exit codes: 0 success, 1 simulation failure, 2 configuration error,
//! 3 I/O error.

mod config;
mod output;
mod plot;
mod presets;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hybridsim::Simulator;

use config::{load_experiment, parse_file, validation_error, ConfigError, ExperimentFile};
use presets::Preset;
use report::ReportFile;

#[derive(Parser)]
#[command(name = "hybridsim", version, about = "Hybrid precoding rate simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a JSON experiment file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Quantization error of the fully-connected network over (Nt, Ntrx) pairs.
    QuantizationReport {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a built-in comparison: fig2, fig3 or fig4.
    Figures {
        preset: Preset,
        #[arg(long)]
        out: PathBuf,
        /// Shrink the transmit array by this factor (0 < scale <= 1).
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// fig4 only: use 2 transceiver chains instead of 8.
        #[arg(long)]
        caption_ntrx: bool,
        #[arg(long)]
        no_plot: bool,
    },
}

enum Failure {
    Config(String),
    Io(String),
    Simulation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Simulation(_) => 1,
            Failure::Config(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Config(m) => format!("config error: {m}"),
            Failure::Io(m) => format!("i/o error: {m}"),
            Failure::Simulation(m) => format!("simulation error: {m}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

/// Writes every file or none: all contents are rendered before this is called.
fn write_outputs(dir: &Path, files: &[(&str, String)]) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    for (name, text) in files {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn sweep(file: &ExperimentFile, title: &str, out: &Path) -> Result<(), Failure> {
    let sim_config = file.to_sim();
    let sim = Simulator::new(sim_config.clone()).map_err(|e| Failure::Config(e.to_string()))?;
    let result = sim.run_sweep(file.workers).map_err(|e| Failure::Simulation(e.to_string()))?;
    let echo = ExperimentFile { plot: file.plot, workers: file.workers, ..ExperimentFile::from_sim(&sim_config) };
    let mut files = vec![
        ("results.csv", output::rates_csv(&result.curves)),
        ("results.json", output::results_json(&echo, &result.curves)),
    ];
    if file.plot {
        files.push(("rates.svg", plot::rates_svg(&result.curves, title)));
    }
    write_outputs(out, &files)?;
    for c in &result.curves {
        let failed = c.points.first().map_or(0, |p| p.failed_trials);
        if failed > 0 {
            eprintln!("note: {}: {failed} of {} trials failed", c.method, sim_config.trials);
        }
    }
    Ok(())
}

fn cmd_run(config: &Path, out: &Path) -> Result<(), Failure> {
    let (file, sim) = load_experiment(config)?;
    let title = format!("Nt = {}, Nr = {}, Ntrx = {}", sim.nt, sim.nr, sim.ntrx);
    sweep(&file, &title, out)
}

fn cmd_quantization_report(config: &Path, out: &Path) -> Result<(), Failure> {
    let (file, text) = parse_file::<ReportFile>(config)?;
    file.validate().map_err(|e| Failure::from(validation_error(config, &text, &e)))?;
    let rows = report::report_rows(&file).map_err(|e| Failure::Simulation(e.to_string()))?;
    let csv = report::report_csv(&rows);
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(out, csv).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))
}

#[allow(clippy::too_many_arguments)]
fn cmd_figures(
    preset: Preset,
    out: &Path,
    scale: f64,
    trials: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
    caption_ntrx: bool,
    no_plot: bool,
) -> Result<(), Failure> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Failure::Config(format!("--scale must be in (0, 1], got {scale}")));
    }
    if caption_ntrx && preset != Preset::Fig4 {
        return Err(Failure::Config("--caption-ntrx only applies to fig4".into()));
    }
    if workers == Some(0) {
        return Err(Failure::Config("--workers must be at least 1".into()));
    }
    let mut file = presets::preset_file(preset, scale, caption_ntrx);
    if let Some(t) = trials {
        file.trials = t;
    }
    if let Some(s) = seed {
        file.master_seed = s;
    }
    file.workers = workers;
    file.plot = !no_plot;
    file.to_sim().validate().map_err(|e| Failure::Config(e.to_string()))?;
    sweep(&file, &preset.title(file.nt, file.nr, file.ntrx), out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run { config, out } => cmd_run(&config, &out),
        Command::QuantizationReport { config, out } => cmd_quantization_report(&config, &out),
        Command::Figures { preset, out, scale, trials, seed, workers, caption_ntrx, no_plot } => {
            cmd_figures(preset, &out, scale, trials, seed, workers, caption_ntrx, no_plot)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message());
            ExitCode::from(f.code())
        }
    }
}
