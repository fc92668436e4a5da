//! Argument parsing and dispatch.

use std::collections::BTreeMap;
use std::io::{ErrorKind, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{self, Menu, Overrides};
use crate::error::{exit, CliError};
use crate::output::{Body, Output};

#[derive(Debug, Parser)]
#[command(name = "hammerstein-kit", version, about = "Constants, existence criteria and solutions for perturbed Hammerstein equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Nyström nodes for spectral estimates and the solver.
    #[arg(long, global = true)]
    pub nodes: Option<usize>,

    /// Fixed-point tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Number of multi-start runs.
    #[arg(long, global = true)]
    pub starts: Option<usize>,

    /// Write the result as JSON to this path (`-` for standard output instead of the table).
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,

    /// Override a `[params]` entry, e.g. `--set lambda=0.9`.
    #[arg(long = "set", global = true, value_parser = parse_param)]
    pub set: Vec<(String, f64)>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cone constants, characteristic-value bounds and boundary scalars.
    Constants { file: String },
    /// Evaluate existence, multiplicity and nonexistence criteria.
    Check {
        file: String,
        /// Radii for the index conditions, e.g. `--rhos 0.1,2`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        rhos: Vec<f64>,
        /// Criteria to evaluate; all applicable ones by default.
        #[arg(long, value_enum, value_delimiter = ',')]
        menu: Vec<Menu>,
    },
    /// Multi-start fixed-point iteration.
    Solve { file: String },
    /// Reproduce a bundled scenario and diff it against pinned values.
    Example {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        n: u8,
    },
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Runs a parsed command line, returning the output and its exit status.
pub fn run(cli: &Cli) -> Result<(Output, u8), CliError> {
    let ov = Overrides {
        nodes: cli.nodes,
        tol: cli.tol,
        starts: cli.starts,
        params: cli.set.iter().cloned().collect::<BTreeMap<_, _>>(),
    };
    let out = match &cli.command {
        Command::Constants { file } => {
            let pf = ov.load(file)?;
            Output::new("constants", Some(file.clone()), Body::Constants(commands::constants(&pf)?))
        }
        Command::Check { file, rhos, menu } => {
            let pf = ov.load(file)?;
            Output::new("check", Some(file.clone()), Body::Check(commands::check(&pf, rhos, menu)?))
        }
        Command::Solve { file } => {
            let pf = ov.load(file)?;
            Output::new("solve", Some(file.clone()), Body::Solve(commands::solve(&pf)?))
        }
        Command::Example { n } => {
            let source = commands::EXAMPLE_FILES[usize::from(*n) - 1].0.to_string();
            Output::new("example", Some(source), Body::Example(commands::example(*n, &ov)?))
        }
    };
    let code = match &out.body {
        Body::Example(e) if !e.passed => exit::GOLDEN_MISMATCH,
        _ if out.has_undecided() => exit::UNDECIDED,
        _ => exit::SUCCESS,
    };
    Ok((out, code))
}

fn emit(cli: &Cli, out: &Output) -> Result<(), CliError> {
    let to_stdout = cli.json.as_deref().is_some_and(|p| p.as_os_str() == "-");
    if !to_stdout {
        stdout(&out.render())?;
    }
    if let Some(path) = &cli.json {
        let text = serde_json::to_string_pretty(out).map_err(|e| CliError::Io(e.to_string()))?;
        if to_stdout {
            stdout(&(text + "\n"))?;
        } else {
            std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
    }
    Ok(())
}

/// Writes to stdout, treating a closed pipe as success.
fn stdout(text: &str) -> Result<(), CliError> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(CliError::Io(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|(out, code)| emit(&cli, &out).map(|()| (out, code)));
    match result {
        Ok((out, code)) => {
            if let Body::Example(e) = &out.body {
                if !e.passed {
                    eprintln!("error: {}", CliError::GoldenMismatch(e.mismatches()));
                }
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
