use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qmem::commands::{self, CommandError, RouteRequest, SimulateOptions};
use qmem::{default_workers, ExperimentConfig};

#[derive(Parser)]
#[command(name = "qmem", version, about = "Autonomous quantum memory simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in codes.
    ListCodes,
    /// Print the single-qubit syndrome table of a code.
    Syndromes { code: String },
    /// Print the Hamiltonian and Lindblad terms of a model.
    DumpModel {
        #[arg(long, conflicts_with = "code", required_unless_present = "code")]
        config: Option<PathBuf>,
        /// Dump the lossless model of a catalog code instead of a config.
        #[arg(long)]
        code: Option<String>,
    },
    /// Score or optimize the probe order of one stabilizer.
    Route {
        code: String,
        /// 1-based stabilizer index.
        #[arg(long, default_value_t = 1)]
        generator: usize,
        /// exhaustive, greedy or naive.
        #[arg(long, default_value = "exhaustive", conflicts_with = "order")]
        strategy: String,
        /// Explicit order such as 8>7>4>5>2>1.
        #[arg(long)]
        order: Option<String>,
    },
    /// Run trajectory ensembles for every loss value in a config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute windowed fidelities from a trajectory CSV.
    Fstar {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated window widths.
        #[arg(long, value_delimiter = ',', required = true)]
        tau: Vec<f64>,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, CommandError> {
    ExperimentConfig::load(path).map_err(|e| CommandError::Usage(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<String, CommandError> {
    match cli.command {
        Command::ListCodes => Ok(commands::list_codes()),
        Command::Syndromes { code } => commands::syndromes(&code).map_err(usage_if_unknown_code),
        Command::DumpModel { config, code } => match (config, code) {
            (Some(path), _) => commands::dump_model(&load(&path)?),
            (None, Some(code)) => commands::dump_code(&code).map_err(usage_if_unknown_code),
            (None, None) => unreachable!("clap requires one of --config or --code"),
        },
        Command::Route {
            code,
            generator,
            strategy,
            order,
        } => {
            let request = match (order, strategy.as_str()) {
                (Some(order), _) => RouteRequest::Order(commands::parse_order(&order)?),
                (None, "naive") => RouteRequest::Naive,
                (None, s) => RouteRequest::Search(s.parse().map_err(|e: qmem_core::routing::RouteError| {
                    CommandError::Usage(e.to_string())
                })?),
            };
            commands::route(&code, generator, request).map_err(usage_if_unknown_code)
        }
        Command::Simulate {
            config,
            workers,
            seed,
            out,
        } => {
            let config = load(&config)?;
            let opts = SimulateOptions {
                workers: workers.unwrap_or_else(default_workers),
                seed,
                out,
            };
            commands::simulate_config(&config, &opts)
        }
        Command::Fstar { input, tau, out } => {
            let csv = commands::fstar(&input, &tau)?;
            match out {
                Some(path) => {
                    std::fs::write(&path, csv).map_err(|source| qmem::SimError::Io { path: path.clone(), source })?;
                    Ok(format!("wrote {}\n", path.display()))
                }
                None => Ok(csv),
            }
        }
    }
}

/// A misspelled code name is a usage error, not a runtime failure.
fn usage_if_unknown_code(e: CommandError) -> CommandError {
    match e {
        CommandError::Code(c) => CommandError::Usage(c.to_string()),
        other => other,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
