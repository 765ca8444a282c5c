//! JSON-line run records and replay.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{commands, Cli, CliError, Outcome, Produced, EXIT_FINDING, EXIT_OK};

/// One line of a `--log` file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub command: String,
    /// Arguments after the program name, as given.
    pub args: Vec<String>,
    pub config: RunConfig,
    /// SHA-256 of the primary output, hex encoded.
    pub digest: String,
    pub exit_code: i32,
    pub summary: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub quiver: Option<String>,
    pub seq: Option<String>,
    pub ordering: Option<String>,
    pub rng_seed: Option<u64>,
    pub format: String,
}

/// Digest of the main output followed by the artifact, if any.
pub(crate) fn digest(body: &str, artifact: Option<&str>) -> String {
    let mut h = Sha256::new();
    h.update(body.as_bytes());
    if let Some(a) = artifact {
        h.update([0u8]);
        h.update(a.as_bytes());
    }
    hex::encode(h.finalize())
}

fn command_name(cli: &Cli) -> String {
    format!("{:?}", cli.command)
        .split([' ', '{', '('])
        .next()
        .unwrap_or_default()
        .to_ascii_lowercase()
}

impl RunRecord {
    pub(crate) fn new(cli: &Cli, args: &[String], p: &Produced, digest: String) -> Self {
        let c = &cli.common;
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        let summary = match &p.summary {
            Some(s) => s.trim().to_string(),
            None if p.passed => "ok".into(),
            None => "finding".into(),
        };
        Self {
            timestamp,
            command: command_name(cli),
            args: args.to_vec(),
            config: RunConfig {
                quiver: c.quiver.clone(),
                seq: c.seq.clone(),
                ordering: c.ordering.clone(),
                rng_seed: p.rng_seed.or(c.rng_seed),
                format: format!("{:?}", c.format).to_ascii_lowercase(),
            },
            digest,
            exit_code: p.code,
            summary,
        }
    }

    pub(crate) fn append(&self, path: &Path) -> Result<(), CliError> {
        let io = |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io)?;
        let line = serde_json::to_string(self).expect("serializable");
        writeln!(f, "{line}").map_err(io)
    }

    /// Arguments to re-run: without output redirection, and with the seed
    /// that was actually used.
    pub fn replay_args(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut it = self.args.iter();
        while let Some(a) = it.next() {
            if a == "--out" || a == "--log" {
                it.next();
                continue;
            }
            if a.starts_with("--out=") || a.starts_with("--log=") {
                continue;
            }
            out.push(a.clone());
        }
        let has_seed = out.iter().any(|a| a == "--rng-seed" || a.starts_with("--rng-seed="));
        if let (false, Some(s)) = (has_seed, self.config.rng_seed) {
            out.push("--rng-seed".into());
            out.push(s.to_string());
        }
        out
    }
}

/// Re-runs a record and returns the new digest.
pub fn replay(rec: &RunRecord) -> Result<String, CliError> {
    let argv = std::iter::once("cvec".to_string()).chain(rec.replay_args());
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Input(format!("recorded arguments: {e}")))?;
    let p = commands::dispatch(&cli)?;
    Ok(digest(&p.body, p.artifact.as_deref()))
}

pub(crate) fn replay_command(path: &Path, line: Option<usize>) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let idx = line.unwrap_or(lines.len().saturating_sub(1));
    let raw = lines
        .get(idx)
        .ok_or_else(|| CliError::Input(format!("{} has no record {idx}", path.display())))?;
    let rec: RunRecord =
        serde_json::from_str(raw).map_err(|e| CliError::Input(format!("record {idx}: {e}")))?;
    let again = replay(&rec)?;
    let same = again == rec.digest;
    let stdout = format!(
        "replayed {} {}\nrecorded {}\nreplayed {}\nmatch: {same}\n",
        rec.command,
        rec.replay_args().join(" "),
        rec.digest,
        again
    );
    Ok(Outcome {
        code: if same { EXIT_OK } else { EXIT_FINDING },
        stdout,
        stderr: String::new(),
    })
}
