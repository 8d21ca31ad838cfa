use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use algebroid_lab::report::render_text;
use algebroid_lab::scenario::{load_scenario, run_scenario, schema::Defaults, RunOptions};

#[derive(Parser)]
#[command(
    name = "algebroid-lab",
    version,
    about = "Verify Lie algebroid, Dirac and Morita identities on charts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check of a scenario file.
    Check {
        scenario: PathBuf,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "json")]
        report: ReportFormat,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall times; reports are then no longer reproducible.
        #[arg(long)]
        timings: bool,
    },
}

fn main() -> ExitCode {
    let Command::Check {
        scenario,
        tolerance,
        samples,
        seed,
        report,
        out,
        timings,
    } = Cli::parse().command;
    let s = match load_scenario(&scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("algebroid-lab: {}: {e}", scenario.display());
            return ExitCode::from(2);
        }
    };
    let run = RunOptions {
        overrides: Defaults {
            tolerance,
            samples,
            seed,
            ..Defaults::default()
        },
        timings,
    };
    let result = run_scenario(&s, &run);
    let text = match report {
        ReportFormat::Json => {
            let mut j = serde_json::to_string_pretty(&result).expect("reports serialize");
            j.push('\n');
            j
        }
        ReportFormat::Text => render_text(&result.scenario, &result.reports),
    };
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text) {
                eprintln!("algebroid-lab: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(result.exit_code() as u8)
}
