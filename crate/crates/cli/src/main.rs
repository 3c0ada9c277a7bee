use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tvdual_cli::commands::{bounds_command, graph_info, render_sweep, sweep};
use tvdual_cli::{execute, CliError, CliResult, ExperimentConfig};

#[derive(Parser)]
#[command(name = "tvdual", version, about = "Decentralized optimization over time-varying graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write traces plus a summary.
    Run { config: PathBuf },
    /// Evaluate a closed-form bound from key=value constants.
    Bounds {
        name: String,
        constants: Vec<String>,
    },
    /// Print the spectra of a schedule file.
    GraphInfo { schedule: PathBuf },
    /// Run an alternating-schedule config over seeds and switching periods.
    Sweep {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        seeds: Vec<u64>,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        periods: Vec<usize>,
    },
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Run { config } => {
            let (cfg, base) = ExperimentConfig::load(&config)?;
            let out = execute(&cfg, &base)?;
            for p in &out.trace_paths {
                println!("wrote {}", p.display());
            }
            println!("wrote {}", out.summary_path.display());
            for w in &out.summary.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Bounds { name, constants } => {
            let (_, text) = bounds_command(&name, &constants)?;
            print!("{text}");
        }
        Command::GraphInfo { schedule } => {
            let (_, text) = graph_info(&schedule)?;
            print!("{text}");
        }
        Command::Sweep { config, seeds, periods } => {
            let (cfg, base) = ExperimentConfig::load(&config)?;
            let (summary, path) = sweep(&cfg, &base, &seeds, &periods)?;
            print!("{}", render_sweep(&summary));
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &CliError) -> u8 {
    e.exit_code() as u8
}
