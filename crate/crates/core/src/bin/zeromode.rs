use std::process::ExitCode;

use clap::{Parser, Subcommand};
use zeromode::scenario::{presets, run, RunConfig, Scenario};

#[derive(Parser)]
#[command(version, about = "Post-quench entanglement of compact and non-compact zero modes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write CSV, schema and summary files.
    ///
    /// Options after the scenario: --preset NAME, --config FILE.toml,
    /// --t [lin:|log:]start:stop:count, --output DIR, --seed N, --threads N,
    /// and --<parameter> VALUE for any scenario parameter.
    Run {
        scenario: String,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        args: Vec<String>,
    },
    /// List the named presets.
    Presets,
    /// List the parameters of a scenario.
    Params { scenario: String },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { scenario, args } => {
            let result = RunConfig::from_args(Some(&scenario), &args)
                .map_err(Into::into)
                .and_then(|c| run(&c));
            match result {
                Ok(report) => {
                    println!("{}", report.csv.display());
                    println!("{}", report.summary_path.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Command::Presets => {
            for p in presets() {
                let params: Vec<String> = p.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!("{:<11} {:<15} {}  ({})", p.name, p.scenario.name(), params.join(" "), p.description);
            }
            ExitCode::SUCCESS
        }
        Command::Params { scenario } => {
            let Some(s) = Scenario::parse(&scenario) else {
                eprintln!("error: unknown scenario {scenario:?}");
                return ExitCode::from(1);
            };
            for p in s.schema() {
                println!("{:<12} {:<18} {}", p.name, p.default, p.help);
            }
            ExitCode::SUCCESS
        }
    }
}
