use cvec_core::{IntMatrix, VerificationReport};
use serde::Serialize;

use crate::{CliError, Format};

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Writes a header and rows with the csv crate.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Input(format!("csv: {e}"));
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Input(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn row_strings(m: &IntMatrix, i: usize) -> Vec<String> {
    m.row(i).iter().map(ToString::to_string).collect()
}

/// Matrix rows as `i,c1,...,cn` CSV with the given column prefix.
pub fn matrix_csv(m: &IntMatrix, prefix: &str) -> Result<String, CliError> {
    let cols: Vec<String> = (1..=m.cols()).map(|j| format!("{prefix}{j}")).collect();
    let mut header = vec!["row"];
    header.extend(cols.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = (0..m.rows())
        .map(|i| {
            let mut r = vec![(i + 1).to_string()];
            r.extend(row_strings(m, i));
            r
        })
        .collect();
    csv_table(&header, &rows)
}

pub fn report(r: &VerificationReport, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(json(r)),
        Format::Csv => {
            let rows: Vec<Vec<String>> = r
                .checks
                .iter()
                .map(|c| vec![c.name.clone(), c.pass.to_string(), c.detail.clone()])
                .collect();
            csv_table(&["check", "pass", "detail"], &rows)
        }
        Format::Table => {
            let mut s = String::new();
            for c in &r.checks {
                let tag = if c.pass { "PASS" } else { "FAIL" };
                s.push_str(&format!("{tag} {}: {}\n", c.name, c.detail));
            }
            if r.checks.is_empty() {
                s.push_str("no checks run\n");
            }
            if let Some(cx) = &r.counterexample {
                s.push_str(&format!(
                    "counterexample [{}]: sequence {} on {}",
                    cx.check,
                    cx.sequence,
                    serde_json::to_string(&cx.quiver).expect("serializable")
                ));
                if let Some(seed) = cx.rng_seed {
                    s.push_str(&format!(", rng seed {seed}"));
                }
                if let Some(t) = cx.trial {
                    s.push_str(&format!(", trial {t}"));
                }
                s.push_str(&format!(": {}\n", cx.detail));
            }
            Ok(s)
        }
    }
}
