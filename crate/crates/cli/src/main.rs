mod commands;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "hardy-lab", version, about = "Hardy constants on trees, cusp coverings and decompositions")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Input JSON file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, global = true, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, global = true, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, global = true, default_value_t = hardy_lab::hardy::DEFAULT_THETA_MAX)]
    pub theta_max: f64,
    #[arg(long, global = true, default_value_t = 6)]
    pub depth: u32,
    /// Resource cap: antichains for `hardy`, cubes for the covering commands.
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Sample count (`ineq`) or number of random functions (`decompose`).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, env = "HARDY_LAB_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Command {
    /// Generate a chain, star or random tree problem, or normalize one from --input.
    Tree(commands::TreeArgs),
    /// Full Hardy report for a problem file.
    Hardy,
    /// Build a cusp covering with its counting and tail profiles.
    Covering(commands::CoveringArgs),
    /// Decompose mean-zero cell functions on a covering and verify.
    Decompose(commands::CoveringArgs),
    /// Inequality ratio checkers and β sweeps.
    Ineq(commands::IneqArgs),
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Violation,
    BadInput,
    Cap,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Violation => 1,
            Status::BadInput => 2,
            Status::Cap => 3,
        }
    }
}

/// A failure before any report could be produced.
#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl ToString) -> Self {
        Self {
            status: Status::BadInput,
            message: message.to_string(),
        }
    }

    pub fn cap(message: impl ToString) -> Self {
        Self {
            status: Status::Cap,
            message: message.to_string(),
        }
    }
}

/// Output of a command: the report body, its status, and the items that
/// broke a hard invariant.
pub struct Outcome {
    pub body: String,
    pub status: Status,
    pub problems: Vec<String>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    config: &'a Cli,
    result: T,
}

/// Wraps a result in the config/version envelope.
pub fn json_report<T: Serialize>(cli: &Cli, result: T) -> String {
    let env = Envelope {
        tool: "hardy-lab",
        version: hardy_lab::VERSION,
        config: cli,
        result,
    };
    serde_json::to_string_pretty(&env).expect("reports serialize") + "\n"
}

/// CSV body preceded by the config as a comment line.
pub fn csv_report(cli: &Cli, body: &str) -> String {
    format!(
        "# hardy-lab {} {}\n{body}",
        hardy_lab::VERSION,
        serde_json::to_string(cli).expect("config serializes")
    )
}

fn write_atomic(path: &Path, body: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(body.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.workers {
        if n == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(Status::BadInput.code());
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(Status::BadInput.code());
        }
    }
    let outcome = match commands::run(&cli) {
        Ok(o) => o,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return ExitCode::from(f.status.code());
        }
    };
    let written = match &cli.common.out {
        Some(path) => write_atomic(path, &outcome.body),
        None => std::io::stdout().write_all(outcome.body.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(Status::BadInput.code());
    }
    for p in &outcome.problems {
        eprintln!("violation: {p}");
    }
    ExitCode::from(outcome.status.code())
}
