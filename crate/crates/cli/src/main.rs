use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use simlab::perturbation::GALLERY_NAMES;
use simlab_cli::error::CliError;
use simlab_cli::execute;
use simlab_cli::report::{summary_text, write_reports};
use simlab_cli::schema::SpecDocument;
use simlab_cli::validate::{has_errors, validate};

#[derive(Parser)]
#[command(
    name = "simlab",
    version,
    about = "Finite-window lab for block operators [[T, X], [0, V]]"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a spec document without running any analysis.
    Validate {
        #[arg(long)]
        spec: PathBuf,
        /// Overrides the identity tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Overrides the document seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one job (or all jobs) of a spec document.
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        job: Option<String>,
        /// Directory for CSV and summary files.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the named gallery instances.
    ListGallery,
}

fn load(path: &Path) -> Result<SpecDocument, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    SpecDocument::parse(&text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { spec, tol, seed } => {
            let doc = match load(&spec) {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let diagnostics = validate(&doc, seed, tol);
            for d in &diagnostics {
                println!("{d}");
            }
            if has_errors(&diagnostics) {
                ExitCode::from(2)
            } else {
                println!("ok: {} operator(s), {} job(s)", doc.operators.len(), doc.jobs.len());
                ExitCode::SUCCESS
            }
        }
        Command::Run {
            spec,
            job,
            out,
            tol,
            seed,
        } => {
            let outcome = load(&spec).and_then(|doc| execute(&doc, job.as_deref(), seed, tol));
            let outcome = match outcome {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            for w in &outcome.warnings {
                eprintln!("{w}");
            }
            print!("{}", summary_text(&outcome.jobs));
            if let Some(dir) = out {
                if let Err(e) = write_reports(&dir, &outcome.jobs) {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            if outcome.failed() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::ListGallery => {
            for name in GALLERY_NAMES {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
    }
}
