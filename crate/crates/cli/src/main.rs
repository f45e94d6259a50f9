use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qmwb_scenarios::{run_file, scenario_table};

/// Quantum mechanics workbench: run scenario configs, list scenarios.
#[derive(Parser)]
#[command(name = "qmwb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write report.json plus CSV tables.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Replaces the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Replaces every tolerance in the config.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Print the available scenarios.
    List {
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, out, seed, tol } => match run_file(&config, &out, seed, tol) {
            Ok(summary) => {
                println!("{}", summary.report.display());
                for t in &summary.tables {
                    println!("{}", t.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("qmwb: {e}");
                ExitCode::from(e.exit_code())
            }
        },
        Command::List { json } => {
            print!("{}", render_list(json));
            ExitCode::SUCCESS
        }
    }
}

fn render_list(json: bool) -> String {
    let table = scenario_table();
    if json {
        return serde_json::to_string_pretty(&table).expect("static table") + "\n";
    }
    let width = table.iter().map(|s| s.name.len()).max().unwrap_or(0);
    let mut text = String::new();
    for s in &table {
        let params = if s.params.is_empty() { "-".to_string() } else { s.params.join(", ") };
        text.push_str(&format!("{:width$}  {}  [{}]\n", s.name, s.description, params));
    }
    text
}
