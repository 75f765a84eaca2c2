use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use prolate_calculus::commands::{
    cmd_export_operator, cmd_nystrom, cmd_pswf, cmd_verify, exit_code, ExportTarget, RunConfig,
    Suite,
};
use prolate_calculus::io::{self, Format, VerificationReport};
use prolate_calculus::transforms::Variant;
use prolate_calculus::{Error, Result};

/// Prolate spheroidal functions, the finite Fourier transform and the
/// sinc-kernel operator in a Legendre basis.
#[derive(Debug, Parser)]
#[command(name = "prolate", version)]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Opts {
    /// Bandwidth c.
    #[arg(long = "c", global = true, default_value_t = 1.0)]
    c: f64,
    /// Legendre truncation N; 0 picks max(64, ceil(2c) + 40).
    #[arg(long = "n-trunc", global = true, default_value_t = 0)]
    n_trunc: usize,
    /// Override for the headline tolerance of a suite.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Reconstruction variant: full or folded.
    #[arg(long, global = true, default_value = "folded")]
    variant: Variant,
    /// Output file; without it artifacts go to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format: json or csv.
    #[arg(long, global = true, default_value = "json")]
    format: Format,
    /// Seed for the randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Table of chi, lambda, mu and endpoint values for the certified modes.
    Pswf {
        /// Also compare against the Nyström oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// Run a verification suite.
    Verify {
        /// translation, fourier, sinc, limits-small, limits-large or commutation.
        suite: Option<Suite>,
        #[arg(long = "suite", conflicts_with = "suite")]
        suite_flag: Option<Suite>,
    },
    /// Write an operator matrix: T, Fc, Qc, Fc-reconstructed or Qc-reconstructed.
    Export { which: ExportTarget },
    /// Write the Nyström oracle fixture (mu, lambda, chi for the leading modes).
    Nystrom,
}

impl Opts {
    fn config(&self) -> RunConfig {
        RunConfig {
            c: self.c,
            n_trunc: self.n_trunc,
            tol: self.tol,
            variant: self.variant,
            out: self.out.clone(),
            format: self.format,
            seed: self.seed,
        }
    }
}

/// Writes `text` to `--out`, or to stdout when no path is given.
fn emit(config: &RunConfig, text: &str) -> Result<()> {
    match &config.out {
        Some(path) => io::write_text(path, text),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Summary goes to stdout unless stdout carries the artifact.
fn print_summary(config: &RunConfig, report: &VerificationReport) {
    if config.out.is_some() {
        print!("{}", report.summary());
    } else {
        eprint!("{}", report.summary());
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let config = cli.opts.config();
    let params = config.params();
    match &cli.command {
        Command::Pswf { oracle } => {
            let (report, table) = cmd_pswf(&config, *oracle)?;
            let text = match config.format {
                Format::Json => io::table_to_json(&table, params)?,
                Format::Csv => io::table_to_csv(&table)?,
            };
            emit(&config, &text)?;
            print_summary(&config, &report);
            Ok(report.passed())
        }
        Command::Verify { suite, suite_flag } => {
            let suite = suite
                .or(*suite_flag)
                .ok_or_else(|| Error::InvalidArgument("verify needs a suite name".into()))?;
            let report = cmd_verify(&config, suite)?;
            print!("{}", report.summary());
            if let Some(path) = &config.out {
                let text = match config.format {
                    Format::Json => io::report_to_json(&report, params)?,
                    Format::Csv => io::report_to_csv(&report)?,
                };
                io::write_text(path, &text)?;
            }
            Ok(report.passed())
        }
        Command::Export { which } => {
            let m = cmd_export_operator(&config, *which)?;
            let text = match config.format {
                Format::Json => io::operator_to_json(&m, params)?,
                Format::Csv => io::operator_to_csv(&m)?,
            };
            emit(&config, &text)?;
            Ok(true)
        }
        Command::Nystrom => {
            let table = cmd_nystrom(&config)?;
            let text = match config.format {
                Format::Json => io::table_to_json(&table, params)?,
                Format::Csv => io::table_to_csv(&table)?,
            };
            emit(&config, &text)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
