//! Exhaustive MaxSAT for small formulas.

use thiserror::Error;

use super::{Assignment, CnfFormula};

pub const DEFAULT_VAR_CAP: usize = 24;
const HARD_CAP: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("formula has {num_variables} variables, oracle cap is {cap}")]
    TooManyVariables { num_variables: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub best_count: usize,
    /// Lexicographically smallest assignment (false < true, v1 first) attaining `best_count`.
    pub witness: Assignment,
}

impl OracleResult {
    pub fn satisfiable(&self, f: &CnfFormula) -> bool {
        self.best_count == f.num_clauses()
    }
}

/// Enumerates all 2ⁿ assignments in lexicographic order.
#[derive(Debug, Clone, Copy)]
pub struct MaxSatOracle {
    var_cap: usize,
}

impl Default for MaxSatOracle {
    fn default() -> Self {
        MaxSatOracle { var_cap: DEFAULT_VAR_CAP }
    }
}

impl MaxSatOracle {
    /// `cap` is clamped to 40 variables.
    pub fn with_cap(cap: usize) -> Self {
        MaxSatOracle { var_cap: cap.min(HARD_CAP) }
    }

    pub fn cap(&self) -> usize {
        self.var_cap
    }

    pub fn solve(&self, f: &CnfFormula) -> Result<OracleResult, OracleError> {
        let n = f.num_variables();
        if n > self.var_cap {
            return Err(OracleError::TooManyVariables { num_variables: n, cap: self.var_cap });
        }
        // Bit (n-1-i) of the counter holds variable i, so counting upward
        // visits assignments in lexicographic order.
        let masks: Vec<(u64, u64)> = f
            .clauses()
            .iter()
            .map(|c| {
                c.literals().iter().fold((0u64, 0u64), |(pos, neg), l| {
                    let bit = 1u64 << (n - 1 - l.var());
                    if l.is_positive() {
                        (pos | bit, neg)
                    } else {
                        (pos, neg | bit)
                    }
                })
            })
            .collect();
        let m = masks.len();
        let mut best_count = 0usize;
        let mut best_x = 0u64;
        let mut first = true;
        let limit: u64 = 1u64 << n;
        let mut x = 0u64;
        while x < limit {
            let count = masks.iter().filter(|&&(pos, neg)| (x & pos) != 0 || (!x & neg) != 0).count();
            if first || count > best_count {
                best_count = count;
                best_x = x;
                first = false;
                if count == m {
                    break;
                }
            }
            x += 1;
        }
        let witness = Assignment::new((0..n).map(|i| best_x >> (n - 1 - i) & 1 == 1).collect());
        Ok(OracleResult { best_count, witness })
    }
}

/// [`MaxSatOracle`] with the default 24-variable cap.
pub fn brute_force_max_sat(f: &CnfFormula) -> Result<OracleResult, OracleError> {
    MaxSatOracle::default().solve(f)
}
