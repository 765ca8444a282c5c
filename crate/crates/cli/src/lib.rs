//! Library half of the `cvec` command-line tool. [`run`] parses arguments,
//! executes one command and returns its exit code and output without touching
//! the process, so the binary and the tests share one code path.

mod commands;
mod output;
pub mod record;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use record::{replay, RunRecord};

/// Exit code when every check passes or the computation succeeded.
pub const EXIT_OK: i32 = 0;
/// Exit code when a check failed or a search was inconclusive.
pub const EXIT_FINDING: i32 = 1;
/// Exit code for malformed or out-of-scope input.
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] cvec_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(cvec_core::Error::CurveNotFound { .. }) => EXIT_FINDING,
            CliError::Core(cvec_core::Error::ClassifierDisagreement(_)) => EXIT_FINDING,
            _ => EXIT_INPUT,
        }
    }
}

#[derive(Parser, Debug, Clone)]
#[command(name = "cvec", version, about = "Exact c-vector, GIM, reflection and curve computations")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Quiver: a built-in name (markov, q233, fork345) or a JSON file {"n", "b"}.
    #[arg(long, global = true)]
    pub quiver: Option<String>,
    /// Mutation sequence, 1-based and comma-separated, e.g. 1,2,3.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub seq: Option<String>,
    /// Linear ordering, 1-based, smallest first, e.g. 1,3,2.
    #[arg(long, global = true)]
    pub ordering: Option<String>,
    /// Seed for randomized commands; required when CI is set.
    #[arg(long, global = true)]
    pub rng_seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write the main output (or SVG) here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Append a JSON-line run record to this file.
    #[arg(long, global = true)]
    pub log: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum LMethod {
    Words,
    Recurrence,
    Both,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Theorem {
    Quadratic,
    SignInvariance,
    #[value(name = "l-c")]
    LC,
    Coxeter,
    Campaign,
    Cyclic,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Print [B^w | C^w] and the sign vector.
    Mutate,
    /// Print the L-matrix for an ordering.
    Lmatrix {
        #[arg(long, value_enum, default_value_t = LMethod::Both)]
        method: LMethod,
    },
    /// Print the reflection attached to each vertex.
    Reflections {
        /// Also print the reduced product in this vertex order, e.g. 2,3,1.
        #[arg(long)]
        product: Option<String>,
    },
    /// Print the GIM for an ordering after the sequence, with admissibility.
    Gim,
    /// Check a relation and emit a verification report.
    Verify {
        #[arg(long, value_enum, default_value_t = Theorem::Campaign)]
        theorem: Theorem,
        /// Two quivers for sign invariance, e.g. Q,M.
        #[arg(long)]
        pair: Option<String>,
        /// Maximum sequence length for the quadratic check.
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Ranks drawn by the campaign.
        #[arg(long, default_value = "3,4,5")]
        ns: String,
        #[arg(long, default_value_t = 7)]
        max_weight: u32,
        #[arg(long, default_value_t = 10)]
        walk_length: usize,
        /// Campaign checks to run (comma-separated); all by default.
        #[arg(long)]
        checks: Option<String>,
        /// Explicit left ordering for the Coxeter check.
        #[arg(long)]
        lambda: Option<String>,
        /// Explicit right ordering for the Coxeter check.
        #[arg(long)]
        rho: Option<String>,
    },
    /// Step through a walk, printing every intermediate state. Without
    /// --quiver a random fork is drawn; without --seq a random
    /// fork-preserving walk.
    Walk {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        max_weight: u32,
        #[arg(long, default_value_t = 6)]
        length: usize,
    },
    /// Find non-crossing curves for the reflections of a rank-3 quiver and
    /// draw them as SVG.
    Curves {
        /// Vertices labelling vertical, diagonal and horizontal lines.
        #[arg(long)]
        sigma: Option<String>,
        /// Shape attempts per start triangle and end point.
        #[arg(long, default_value_t = 8)]
        bound: usize,
    },
    /// Re-run a logged command and compare digests.
    Replay {
        /// Log file written with --log.
        #[arg(long)]
        record: PathBuf,
        /// 0-based line in the log; the last line by default.
        #[arg(long)]
        line: Option<usize>,
    },
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// What a command produced before routing to stdout or files.
pub(crate) struct Produced {
    pub code: i32,
    /// Main output in the requested format.
    pub body: String,
    /// Printed to stdout when the body or artifact goes to a file.
    pub summary: Option<String>,
    /// Binary output such as SVG; written to --out when given.
    pub artifact: Option<String>,
    /// Seed used by randomized commands.
    pub rng_seed: Option<u64>,
    pub passed: bool,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: EXIT_INPUT,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, &args) {
        Ok(o) => o,
        Err(e) => Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn execute(cli: &Cli, args: &[String]) -> Result<Outcome, CliError> {
    if let Command::Replay { record, line } = &cli.command {
        return record::replay_command(record, *line);
    }
    let produced = commands::dispatch(cli)?;
    let digest = record::digest(&produced.body, produced.artifact.as_deref());
    let mut stdout = String::new();
    match (&cli.common.out, &produced.artifact) {
        (Some(path), Some(artifact)) => {
            write_file(path, artifact)?;
            stdout.push_str(&produced.body);
        }
        (Some(path), None) => {
            write_file(path, &produced.body)?;
            if let Some(s) = &produced.summary {
                stdout.push_str(s);
            }
        }
        (None, _) => stdout.push_str(&produced.body),
    }
    if let Some(log) = &cli.common.log {
        let rec = RunRecord::new(cli, args, &produced, digest);
        rec.append(log)?;
    }
    Ok(Outcome {
        code: produced.code,
        stdout,
        stderr: String::new(),
    })
}

fn write_file(path: &std::path::Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
