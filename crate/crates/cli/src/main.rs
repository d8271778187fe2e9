// Copyright 2026 The isolator-qc Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use isolator_cli::{emit_report, parse_config, run_experiment, CliError, CliResult, ExperimentKind, OutputFormat};

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (record format 1)");

/// Run one experiment on the isolator-separated spin register.
#[derive(Debug, Parser)]
#[command(name = "isolator-qc", version = VERSION)]
struct Args {
    /// solve-params | simulate-cell | gate-report | sweep-strong | idle-check | crosstalk | cnot-check
    kind: ExperimentKind,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// json or csv; overrides the config file.
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Write here instead of stdout; overrides the config file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: Args) -> CliResult<()> {
    let io = |path: &PathBuf| {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    };
    let text = std::fs::read_to_string(&args.config).map_err(io(&args.config))?;
    let cfg = parse_config(&text)?.with_kind(args.kind)?;
    let record = run_experiment(&cfg)?;
    for w in &record.warnings {
        eprintln!("warning: {w}");
    }
    let format = args.format.or(cfg.experiment.format).unwrap_or_default();
    let bytes = emit_report(&record, format)?;
    match args.out.or(cfg.experiment.output.clone()) {
        Some(path) => std::fs::write(&path, bytes).map_err(io(&path)),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes).map_err(io(&PathBuf::from("<stdout>")))
        }
    }
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
