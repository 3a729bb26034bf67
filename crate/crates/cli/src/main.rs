mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "algknow", version, about = "Check probabilistic algorithmic knowledge models")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, env = "ALGKNOW_OUTPUT", default_value = "text")]
    output: Format,
    /// Shorthand for `--output json`.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a formula: validity, or truth at a state and point.
    Check {
        model: PathBuf,
        formula: String,
        /// State id.
        #[arg(long)]
        state: Option<String>,
        /// Derandomizer point, by label or index. Needs --state.
        #[arg(long, requires = "state")]
        point: Option<String>,
    },
    /// Evidence spaces, weight sets and weight bounds per local state.
    Evidence { model: PathBuf, agent: String, formula: String },
    /// Reliability, negation behaviour and the evidence bounds they imply.
    Audit {
        model: PathBuf,
        agent: String,
        formula: String,
        /// Audit with this α instead of the tight one.
        #[arg(long, requires = "beta")]
        alpha: Option<String>,
        /// Audit with this β instead of the tight one.
        #[arg(long, requires = "alpha")]
        beta: Option<String>,
    },
    /// Dolev–Yao derivability, optionally with random key guessing.
    Dy(commands::DyArgs),
    /// Emit a built-in model file.
    Scenario(commands::ScenarioArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = if cli.json { Format::Json } else { cli.output };
    let result = match cli.command {
        Command::Check { model, formula, state, point } => commands::check(&model, &formula, state.as_deref(), point.as_deref()),
        Command::Evidence { model, agent, formula } => commands::evidence(&model, &agent, &formula),
        Command::Audit { model, agent, formula, alpha, beta } => {
            commands::audit(&model, &agent, &formula, alpha.as_deref().zip(beta.as_deref()))
        }
        Command::Dy(args) => commands::dy(&args),
        Command::Scenario(args) => {
            return match commands::scenario(&args) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(e),
            }
        }
    };
    match result {
        Ok(report) => {
            match format {
                Format::Text => print!("{report}"),
                Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
            }
            ExitCode::from(report.exit_code())
        }
        Err(e) => fail(e),
    }
}

fn fail(e: anyhow::Error) -> ExitCode {
    eprintln!("error: {e:#}");
    ExitCode::from(2)
}
