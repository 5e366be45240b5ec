// SPDX-License-Identifier: Apache-2.0

mod config;
mod error;
mod states;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use qdl_core::backprop::train_backprop_with;
use qdl_core::circuit::{train_circuit_rl, CircuitModel};
use qdl_core::report::{EpochLog, TraceLog};
use qdl_core::rl::train_rl_with;
use qdl_core::staging::stage_to;
use qdl_core::witness::{build_training_family, concurrence, evaluate_witness};
use qdl_core::ParameterSchedule64;
use serde::Serialize;

use crate::config::{load_raw, Mode, Overrides, RawConfig, RunConfig};
use crate::error::{CliError, CliResult};

/// Train and evaluate time-dependent qubit Hamiltonians as entanglement witnesses.
#[derive(Parser, Debug)]
#[command(name = "qdl", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a schedule and write schedule.json, epochs.csv, traces.csv and
    /// run-manifest.json into the output directory.
    Train {
        /// JSON run configuration; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Initialize a larger register from a trained schedule.
    Stage {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Target qubit count (default: one more than the input).
        #[arg(long)]
        qubits: Option<usize>,
    },
    /// Run states and the 21-point θ sweep through a schedule; writes a CSV
    /// report and prints the rank correlation.
    Eval {
        #[arg(long)]
        schedule: PathBuf,
        /// JSON array of labelled states.
        #[arg(long)]
        states: Option<PathBuf>,
        /// Run configuration supplying the time grid, observable and backend.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the concurrence of two-qubit states.
    Oracle {
        /// Comma-separated real amplitudes, e.g. 0.6,0,0,0.8
        #[arg(long, conflicts_with = "states", required_unless_present = "states")]
        amplitudes: Option<String>,
        #[arg(long)]
        states: Option<PathBuf>,
    },
    /// Sample the parameter values of a schedule into a CSV.
    Export {
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    created_unix_s: u64,
    seed: u64,
    final_rms: Option<f64>,
    config: &'a RunConfig,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Train {
            config,
            mode,
            out,
            seed,
            epochs,
        } => {
            let raw = match &config {
                Some(p) => load_raw(p)?,
                None => RawConfig::default(),
            };
            let cfg = RunConfig::resolve(raw, &Overrides { mode, seed, epochs })?;
            train(&cfg, &out)
        }
        Command::Stage { input, out, qubits } => stage(&input, &out, qubits),
        Command::Eval {
            schedule,
            states,
            config,
            out,
        } => eval(&schedule, states.as_deref(), config.as_deref(), &out),
        Command::Oracle { amplitudes, states } => oracle(amplitudes.as_deref(), states.as_deref()),
        Command::Export { schedule, out, samples } => {
            let s = load_schedule(&schedule)?;
            let mut log = TraceLog::new(s.num_qubits());
            log.record(0, &s, samples)?;
            log.save_csv(&out)?;
            Ok(())
        }
    }
}

fn load_schedule(path: &Path) -> CliResult<ParameterSchedule64> {
    if !path.is_file() {
        return Err(CliError::Usage(format!("schedule not found: {}", path.display())));
    }
    ParameterSchedule64::load(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn train(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    // Build everything first so bad settings fail before any output exists.
    let start = cfg.initial_schedule()?;
    let pairs = build_training_family::<f64>(cfg.num_qubits, cfg.output_map, cfg.training_family)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut model = cfg.continuum_model()?;
    let backend = match cfg.mode {
        Mode::Circuit => Some(cfg.shot_backend()?),
        _ => None,
    };
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;

    let mut traces = TraceLog::new(cfg.num_qubits);
    let last = cfg.epochs;
    let every = cfg.trace_every.max(1);
    let on_epoch = |epoch: usize, s: &ParameterSchedule64| {
        if epoch.is_multiple_of(every) || epoch == last {
            traces.record(epoch, s, cfg.trace_samples)?;
        }
        Ok(())
    };
    let (trained, log): (ParameterSchedule64, EpochLog) = match cfg.mode {
        Mode::Rl => train_rl_with(&mut model, &pairs, &start, &cfg.rl_config(), on_epoch)?,
        Mode::Backprop => train_backprop_with(&pairs, &start, &cfg.backprop_config(), &mut model, on_epoch)?,
        Mode::Circuit => {
            let backend = backend.expect("circuit backend");
            let [a, b] = cfg.observable_qubits;
            let mut circuit = CircuitModel::new(backend, (a, b), cfg.output_map);
            train_circuit_rl(&pairs, &start, &cfg.rl_config(), &mut circuit, on_epoch)?
        }
    };

    trained.save(out.join("schedule.json"))?;
    log.save_csv(out.join("epochs.csv"), cfg.record_wall_time)?;
    traces.save_csv(out.join("traces.csv"))?;
    let manifest = Manifest {
        tool: "qdl",
        version: env!("CARGO_PKG_VERSION"),
        created_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        seed: cfg.seed,
        final_rms: log.final_rms(),
        config: cfg,
    };
    let path = out.join("run-manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(qdl_core::Error::from)?;
    std::fs::write(&path, text + "\n").map_err(|e| CliError::io(path, e))?;
    if let (Some(first), Some(final_rms)) = (log.initial_rms(), log.final_rms()) {
        println!("{} epochs: rms {first:.6e} -> {final_rms:.6e}", cfg.epochs);
    }
    Ok(())
}

fn stage(input: &Path, out: &Path, qubits: Option<usize>) -> CliResult<()> {
    let s = load_schedule(input)?;
    let n = s.num_qubits();
    let target = qubits.unwrap_or(n + 1);
    if target <= n {
        return Err(CliError::Usage(format!("cannot stage {n} qubits to {target}; the target must be larger")));
    }
    let staged = stage_to(&s, target).map_err(|e| match e {
        qdl_core::Error::UnsupportedQubitCount(_) => CliError::Usage(e.to_string()),
        other => other.into(),
    })?;
    staged.save(out)?;
    println!("staged {n} -> {target} qubits");
    Ok(())
}

fn eval(schedule: &Path, states: Option<&Path>, config: Option<&Path>, out: &Path) -> CliResult<()> {
    let s = load_schedule(schedule)?;
    let mut raw = match config {
        Some(p) => load_raw(p)?,
        None => RawConfig::default(),
    };
    // The schedule file is authoritative for its own geometry.
    raw.num_qubits = Some(s.num_qubits());
    raw.t_ns = Some(s.t_final());
    let cfg = RunConfig::resolve(raw, &Overrides::default())?;
    let labelled = match states {
        Some(p) => states::load_states(p)?,
        None => Vec::new(),
    };
    let report = match cfg.mode {
        Mode::Circuit => {
            let [a, b] = cfg.observable_qubits;
            let mut model = CircuitModel::new(cfg.shot_backend()?, (a, b), cfg.output_map);
            evaluate_witness(&mut model, &s, &labelled)?
        }
        _ => evaluate_witness(&mut cfg.continuum_model()?, &s, &labelled)?,
    };
    report.write_csv(std::fs::File::create(out).map_err(|e| CliError::io(out, e))?)?;
    for row in &report.rows {
        println!("{}\t{:.6}", row.label, row.output);
    }
    match report.spearman {
        Some(rho) => println!("spearman {rho:.6}"),
        None => println!("spearman undefined"),
    }
    Ok(())
}

fn oracle(amplitudes: Option<&str>, states: Option<&Path>) -> CliResult<()> {
    let labelled = match (amplitudes, states) {
        (Some(a), _) => vec![("state".to_string(), states::parse_amplitudes(a)?)],
        (None, Some(p)) => states::load_states(p)?,
        (None, None) => return Err(CliError::Usage("give --amplitudes or --states".into())),
    };
    for (label, rho) in &labelled {
        if rho.num_qubits() != 2 {
            return Err(CliError::Usage(format!("{label}: concurrence needs a two-qubit state")));
        }
        println!("{label}\t{:.15}", concurrence(rho)?);
    }
    Ok(())
}
