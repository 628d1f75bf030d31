use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rnl_lab::cli::{run, CliError, Command, Format};
use rnl_lab::config::parse_config;

/// Timing-dependent two-photon correlations for moving beam-splitters.
#[derive(Debug, Parser)]
#[command(name = "rnl-lab", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Write data here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn execute(args: &Args) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", args.config.display())))?;
    let config = parse_config(&text)?;
    // Buffer the data so a failing command leaves no partial output behind.
    let mut data = Vec::new();
    run(args.command, &config, args.format, &mut data)?;
    match &args.out {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            f.write_all(&data)?;
            f.flush()?;
        }
        None => io::stdout().lock().write_all(&data)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rnl-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
