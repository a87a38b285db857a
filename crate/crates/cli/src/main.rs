use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use steerkit_cli::{
    parse_document, resolve, run, templates, Document, DocumentError, EXIT_INVALID_INPUT,
    EXIT_USAGE,
};

#[derive(Debug, Parser)]
#[command(name = "steerkit", version, about = "Entropic EPR-steering witnesses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and resolve a task document without running it.
    Validate { file: PathBuf },
    /// Run every task in a document.
    Run {
        file: PathBuf,
        /// Seed for sampling tasks that do not set their own.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a built-in demonstration.
    Demo {
        #[arg(value_enum)]
        which: Demo,
    },
    /// Random local-hidden-state search over computational/Fourier bases.
    LhsSearch {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        lambdas: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum Demo {
    Contradiction,
}

fn load(path: &PathBuf) -> Result<Document, (i32, String)> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        (
            EXIT_INVALID_INPUT,
            format!("cannot read {}: {e}", path.display()),
        )
    })?;
    parse_document(&text).map_err(|e| (EXIT_INVALID_INPUT, describe(&e)))
}

fn describe(e: &DocumentError) -> String {
    format!("{}: {e}", e.class())
}

fn execute(doc: &Document, seed: u64) -> i32 {
    let report = run(doc, seed);
    print!("{}", report.to_json());
    eprint!("{}", report.summary());
    report.exit_code()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Validate { file } => match load(&file) {
            Ok(doc) => {
                let out = json!({
                    "valid": true,
                    "states": doc.raw.states.len(),
                    "observables": doc.raw.observables.len(),
                    "tasks": doc.raw.tasks.len(),
                });
                println!(
                    "{}",
                    serde_json::to_string_pretty(&out).expect("serializes")
                );
                eprintln!(
                    "{}: valid ({} states, {} observables, {} tasks)",
                    file.display(),
                    doc.raw.states.len(),
                    doc.raw.observables.len(),
                    doc.raw.tasks.len()
                );
                0
            }
            Err((code, msg)) => {
                let out = json!({ "valid": false, "error": msg });
                println!(
                    "{}",
                    serde_json::to_string_pretty(&out).expect("serializes")
                );
                eprintln!("{}: {msg}", file.display());
                code
            }
        },
        Command::Run { file, seed } => match load(&file) {
            Ok(doc) => execute(&doc, seed),
            Err((code, msg)) => {
                eprintln!("{}: {msg}", file.display());
                code
            }
        },
        Command::Demo {
            which: Demo::Contradiction,
        } => {
            let doc = resolve(templates::contradiction()).expect("built-in document is valid");
            execute(&doc, 0)
        }
        Command::LhsSearch {
            dim,
            trials,
            seed,
            lambdas,
        } => match resolve(templates::lhs_search(dim, trials, seed, lambdas)) {
            Ok(doc) => execute(&doc, seed),
            Err(e) => {
                eprintln!("{}", describe(&e));
                EXIT_INVALID_INPUT
            }
        },
    };
    ExitCode::from(code as u8)
}
