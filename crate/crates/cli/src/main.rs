use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

use commands::{Outcome, Status};

#[derive(Parser)]
#[command(
    name = "nilstrat",
    version,
    about = "Stratum certificates for nilpotent Lie brackets and curvature of solvmanifolds"
)]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Add wall-clock timings to reports (makes output non-reproducible).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Antisymmetry, Jacobi, nilpotency and solvability of a bracket file.
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = nilstrat::DEFAULT_TOL)]
        tol: f64,
    },
    /// Flow to a critical point and certify the detected stratum label β.
    Stratum {
        file: PathBuf,
        #[command(flatten)]
        opts: StratumOpts,
    },
    /// Ricci curvature, Einstein and standardness verdicts of a metric solvable algebra.
    Einstein {
        file: PathBuf,
        #[command(flatten)]
        opts: EinsteinOpts,
    },
    /// Rank-one Einstein extension of a nilsoliton.
    Extend {
        file: PathBuf,
        #[command(flatten)]
        opts: ExtendOpts,
    },
    /// Minimal-norm point of the convex hull of a point file.
    Minnorm {
        file: PathBuf,
        /// Cross-check against exhaustive face enumeration (at most 12 points).
        #[arg(long)]
        check: bool,
    },
    /// Run the appropriate analysis on every JSON file in the given files/directories.
    Batch {
        paths: Vec<PathBuf>,
        /// Worker threads (results are reported in path order regardless).
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        stratum: StratumOpts,
    },
}

#[derive(Args, Clone)]
pub struct StratumOpts {
    /// Tolerance for float certificate predicates.
    #[arg(long, default_value_t = nilstrat::DEFAULT_TOL)]
    pub tol: f64,
    /// Stop the flow once the tangency residual drops below this.
    #[arg(long, default_value_t = 1e-10)]
    pub flow_tol: f64,
    #[arg(long, default_value_t = 200_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest denominator accepted when rationalizing the limit spectrum.
    #[arg(long, default_value_t = 64)]
    pub denom_bound: u64,
    /// Write the per-iteration flow trace (iter, ‖M‖², tangency) as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Also run the heuristic H_β-semistability probe at the certified limit.
    #[arg(long)]
    pub probe: bool,
}

#[derive(Args, Clone)]
pub struct EinsteinOpts {
    /// Relative tolerance of the Einstein test.
    #[arg(long, default_value_t = nilstrat::solv::EINSTEIN_TOL)]
    pub tol: f64,
    /// Add the term-by-term standardness audit.
    #[arg(long)]
    pub audit: bool,
    /// Take β from the moment-map flow instead of the convex-hull β of the given basis.
    #[arg(long)]
    pub beta_from_flow: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Clone)]
pub struct ExtendOpts {
    /// Where to write the extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flow to a critical point first and extend the limit.
    #[arg(long)]
    pub flow_first: bool,
    /// Einstein constant for an abelian input (default −dim).
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Relative tolerance of the derivation test.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn run(cmd: &Command) -> Result<Outcome, nilstrat::Error> {
    match cmd {
        Command::Validate { file, tol } => commands::validate(file, *tol),
        Command::Stratum { file, opts } => commands::stratum(file, opts),
        Command::Einstein { file, opts } => commands::einstein(file, opts),
        Command::Extend { file, opts } => commands::extend(file, opts),
        Command::Minnorm { file, check } => commands::minnorm(file, *check),
        Command::Batch {
            paths,
            jobs,
            stratum,
        } => commands::batch(paths, *jobs, stratum),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli.command) {
        Ok(mut outcome) => {
            if cli.timings {
                let ms = start.elapsed().as_secs_f64() * 1e3;
                outcome.report["timings_ms"] = serde_json::json!(ms);
                outcome.text.push_str(&format!("time: {ms:.1} ms\n"));
            }
            let body = match cli.format {
                Format::Json => {
                    serde_json::to_string_pretty(&outcome.report).expect("serializable") + "\n"
                }
                Format::Text => outcome.text,
            };
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            match outcome.status {
                Status::Pass => ExitCode::SUCCESS,
                Status::Fail => ExitCode::from(2),
                Status::InputError => ExitCode::from(3),
            }
        }
        Err(e) => {
            if cli.format == Format::Json {
                println!("{}", serde_json::json!({ "error": e.to_string() }));
            }
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
