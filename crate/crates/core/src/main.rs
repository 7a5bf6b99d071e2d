use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use shapejc::cli::config::{parse_config, Format};
use shapejc::cli::run::{run, Command};
use shapejc::cli::render_error;
use shapejc::Error;

/// Dressed spectra, evolution and population inversion for the
/// intensity-dependent Jaynes-Cummings model on shape-invariant ladders.
#[derive(Debug, Parser)]
#[command(name = "shapejc", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file; defaults to `output.path` or stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn emit(text: &str, path: Option<&PathBuf>) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let loaded = std::fs::read_to_string(&args.config).map_err(Error::from).and_then(|t| parse_config(&t));
    let config = match loaded {
        Ok(c) => c,
        Err(e) => {
            let format = args.format.unwrap_or_default();
            let _ = emit(&render_error(&e, format), args.out.as_ref());
            eprintln!("shapejc: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let format = args.format.unwrap_or(config.output.format);
    let out = args.out.clone().or_else(|| config.output.path.clone().map(PathBuf::from));
    match run(&config, args.command) {
        Ok(result) => {
            if let Err(e) = emit(&result.render(&config, format), out.as_ref()) {
                eprintln!("shapejc: {e}");
                return ExitCode::from(EXIT_ERROR);
            }
            if result.failed() {
                for r in result.reports.iter().filter(|r| r.failed()) {
                    eprintln!("FAIL {}: {:e} > {:e}", r.label, r.max_abs_deviation, r.tolerance);
                }
                return ExitCode::from(EXIT_CHECK_FAILED);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let _ = emit(&render_error(&e, format), out.as_ref());
            eprintln!("shapejc: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
