use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::cnf::Assignment;

/// Environment variable naming an external solver binary.
pub const EXTERNAL_SOLVER_ENV: &str = "TRSAT_EXTERNAL_SOLVER";

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("could not run {binary}: {source}")]
    Spawn { binary: String, source: std::io::Error },
    #[error("solver output has no status line")]
    NoStatus,
    #[error("bad value line: {0}")]
    BadValue(String),
    #[error("literal {literal} exceeds {num_variables} variables")]
    VariableRange { literal: i64, num_variables: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExternalStatus {
    Satisfiable,
    Unsatisfiable,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalOutcome {
    pub status: ExternalStatus,
    /// Present when the solver printed `v` lines; unmentioned variables are false.
    pub assignment: Option<Assignment>,
    pub elapsed: Duration,
}

/// Parses `s SATISFIABLE|UNSATISFIABLE|UNKNOWN` and `v ... 0` lines.
pub fn parse_solver_output(text: &str, num_variables: usize) -> Result<(ExternalStatus, Option<Assignment>), ExternalError> {
    let mut status = None;
    let mut values = vec![false; num_variables];
    let mut saw_values = false;
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            status = Some(match rest.trim() {
                "SATISFIABLE" => ExternalStatus::Satisfiable,
                "UNSATISFIABLE" => ExternalStatus::Unsatisfiable,
                _ => ExternalStatus::Unknown,
            });
        } else if let Some(rest) = line.strip_prefix("v ") {
            saw_values = true;
            for tok in rest.split_whitespace() {
                let lit: i64 = tok.parse().map_err(|_| ExternalError::BadValue(line.to_string()))?;
                if lit == 0 {
                    continue;
                }
                let var = lit.unsigned_abs() as usize;
                if var > num_variables {
                    return Err(ExternalError::VariableRange { literal: lit, num_variables });
                }
                values[var - 1] = lit > 0;
            }
        }
    }
    let status = status.ok_or(ExternalError::NoStatus)?;
    Ok((status, saw_values.then(|| Assignment::new(values))))
}

/// Runs `binary <cnf_path>` and parses its standard output.
pub fn run_external_solver(binary: &Path, cnf_path: &Path, num_variables: usize) -> Result<ExternalOutcome, ExternalError> {
    let start = Instant::now();
    let output = Command::new(binary)
        .arg(cnf_path)
        .output()
        .map_err(|source| ExternalError::Spawn { binary: binary.display().to_string(), source })?;
    let elapsed = start.elapsed();
    let (status, assignment) = parse_solver_output(&String::from_utf8_lossy(&output.stdout), num_variables)?;
    Ok(ExternalOutcome { status, assignment, elapsed })
}
