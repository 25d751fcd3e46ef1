use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qfrac::verify::output::{list_identities, list_scenarios, run, RunConfig, DEFAULT_SEED};
use qfrac::verify::load_catalog;

/// Numerical verification of quaternionic proportional fractional
/// Fueter-type operator identities.
#[derive(Parser, Debug)]
#[command(name = "qfrac", version)]
struct Cli {
    /// Directory holding the scenario catalog (*.json).
    #[arg(long, global = true, default_value = default_scenarios())]
    scenarios: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run identities over the scenario catalog and write reports.
    Run {
        /// Only this identity id.
        #[arg(long)]
        identity: Option<String>,
        /// Only this scenario id.
        #[arg(long)]
        scenario: Option<String>,
        /// Comma-separated refinement ladder replacing the defaults.
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
        /// Output directory.
        #[arg(long, default_value = "qfrac-out")]
        out: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        parallel: usize,
        /// Count skipped reports as failures.
        #[arg(long)]
        strict: bool,
        /// Seed of the randomized suites and random fields.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// List identities or scenarios.
    List {
        #[arg(value_enum)]
        what: ListKind,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ListKind {
    Identities,
    Scenarios,
    /// Conventions fixed where a formula admits competing readings (JSON).
    Conventions,
}

fn default_scenarios() -> &'static str {
    concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List { what } => {
            let text = match what {
                ListKind::Identities => list_identities(),
                ListKind::Conventions => match serde_json::to_string_pretty(qfrac::fueter::ERRATA) {
                    Ok(json) => json + "\n",
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                },
                ListKind::Scenarios => match load_catalog(&cli.scenarios) {
                    Ok(c) => list_scenarios(&c),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                },
            };
            print!("{text}");
            ExitCode::SUCCESS
        }
        Command::Run { identity, scenario, ladder, out, parallel, strict, seed } => {
            let cfg = RunConfig {
                scenarios_dir: cli.scenarios,
                out_dir: out,
                identity,
                scenario,
                ladder,
                parallel,
                strict,
                seed,
            };
            match run(&cfg) {
                Ok(summary) => {
                    print!("{}", qfrac::verify::output::summary_text(&summary));
                    ExitCode::from(summary.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
