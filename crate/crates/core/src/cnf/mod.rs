//! CNF data model: literals, clauses, formulas and assignments.
//!
//! Variables are 0-based inside the crate. The DIMACS reader and writer are
//! the only places where the 1-based external numbering appears.

mod dimacs;
mod oracle;

pub use dimacs::{parse_dimacs, write_dimacs, DimacsError};
pub use oracle::{brute_force_max_sat, MaxSatOracle, OracleError, OracleResult, DEFAULT_VAR_CAP};

use std::fmt;

use thiserror::Error;

/// Errors raised while constructing CNF objects.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("clause is empty")]
    EmptyClause,
    #[error("clause is tautological: variable {} occurs with both polarities", .0 + 1)]
    Tautology(usize),
    #[error("formula has no clauses")]
    NoClauses,
    #[error("literal on variable {} exceeds declared variable count {num_variables}", .var + 1)]
    VariableOutOfRange { var: usize, num_variables: usize },
    #[error("assignment has {got} values but formula has {expected} variables")]
    AssignmentLength { expected: usize, got: usize },
}

/// A variable together with its sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    var: usize,
    positive: bool,
}

impl Literal {
    pub const fn new(var: usize, positive: bool) -> Self {
        Literal { var, positive }
    }

    pub const fn pos(var: usize) -> Self {
        Literal::new(var, true)
    }

    pub const fn neg(var: usize) -> Self {
        Literal::new(var, false)
    }

    /// Builds a literal from a signed, 1-based DIMACS integer. Returns `None` for 0.
    pub fn from_dimacs(value: i64) -> Option<Self> {
        if value == 0 {
            return None;
        }
        let var = usize::try_from(value.unsigned_abs() - 1).ok()?;
        Some(Literal::new(var, value > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }

    /// 0-based variable index.
    pub const fn var(self) -> usize {
        self.var
    }

    pub const fn is_positive(self) -> bool {
        self.positive
    }

    /// `+1` for a positive literal, `-1` for a negated one.
    pub const fn polarity(self) -> i8 {
        if self.positive {
            1
        } else {
            -1
        }
    }

    /// Truth value of the literal when its variable takes `value`.
    #[inline]
    pub const fn eval(self, value: bool) -> bool {
        value == self.positive
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        Literal::new(self.var, !self.positive)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A non-empty disjunction in which every variable occurs once.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    /// Builds a clause, keeping literal order. Repeated literals are dropped
    /// with a warning; a variable occurring with both signs is rejected.
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Result<Self, CnfError> {
        let mut out: Vec<Literal> = Vec::new();
        for lit in literals {
            match out.iter().find(|l| l.var == lit.var) {
                Some(prev) if prev.positive == lit.positive => {
                    log::warn!("dropping repeated literal {lit} in clause");
                }
                Some(_) => return Err(CnfError::Tautology(lit.var)),
                None => out.push(lit),
            }
        }
        if out.is_empty() {
            return Err(CnfError::EmptyClause);
        }
        Ok(Clause { literals: out })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.literals.iter().map(|l| l.var)
    }

    pub fn is_satisfied(&self, values: &[bool]) -> bool {
        self.literals.iter().any(|l| l.eval(values[l.var]))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for lit in &self.literals {
            write!(f, "{lit} ")?;
        }
        write!(f, "0")
    }
}

/// A conjunction of clauses over `num_variables` variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CnfFormula {
    num_variables: usize,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_variables: usize, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        if clauses.is_empty() {
            return Err(CnfError::NoClauses);
        }
        for clause in &clauses {
            for lit in clause.literals() {
                if lit.var >= num_variables {
                    return Err(CnfError::VariableOutOfRange { var: lit.var, num_variables });
                }
            }
        }
        Ok(CnfFormula { num_variables, clauses })
    }

    /// Convenience constructor from signed 1-based integers, one slice per clause.
    pub fn from_dimacs_clauses(num_variables: usize, clauses: &[&[i64]]) -> Result<Self, CnfError> {
        let clauses = clauses
            .iter()
            .map(|c| Clause::new(c.iter().filter_map(|&v| Literal::from_dimacs(v))))
            .collect::<Result<Vec<_>, _>>()?;
        CnfFormula::new(num_variables, clauses)
    }

    pub fn num_variables(&self) -> usize {
        self.num_variables
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Total number of literal occurrences.
    pub fn num_literals(&self) -> usize {
        self.clauses.iter().map(Clause::len).sum()
    }

    pub fn into_clauses(self) -> Vec<Clause> {
        self.clauses
    }
}

/// A complete truth assignment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment(values)
    }

    pub fn all(n: usize, value: bool) -> Self {
        Assignment(vec![value; n])
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [bool] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, var: usize) -> bool {
        self.0[var]
    }

    pub fn flip(&mut self, var: usize) {
        self.0[var] = !self.0[var];
    }

    /// The assignment as DIMACS literals, e.g. `1 -2 3`.
    pub fn to_dimacs_literals(&self) -> String {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &v)| Literal::new(i, v).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn into_inner(self) -> Vec<bool> {
        self.0
    }
}

impl From<Vec<bool>> for Assignment {
    fn from(values: Vec<bool>) -> Self {
        Assignment(values)
    }
}

/// Clause-satisfaction summary of an assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionStats {
    pub satisfied: usize,
    pub total: usize,
    pub completion_rate: f64,
    /// 0-based indices of unsatisfied clauses, ascending.
    pub unsat_clause_ids: Vec<usize>,
}

impl CompletionStats {
    pub fn all_satisfied(&self) -> bool {
        self.satisfied == self.total
    }
}

pub fn count_satisfied(f: &CnfFormula, a: &Assignment) -> Result<CompletionStats, CnfError> {
    if a.len() != f.num_variables() {
        return Err(CnfError::AssignmentLength { expected: f.num_variables(), got: a.len() });
    }
    let values = a.values();
    let unsat_clause_ids: Vec<usize> = f
        .clauses()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_satisfied(values))
        .map(|(j, _)| j)
        .collect();
    let total = f.num_clauses();
    let satisfied = total - unsat_clause_ids.len();
    Ok(CompletionStats {
        satisfied,
        total,
        completion_rate: satisfied as f64 / total as f64,
        unsat_clause_ids,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// (v1 ∨ v2 ∨ ¬v4)(¬v1 ∨ v2 ∨ ¬v3)(v3 ∨ v4)
    pub(crate) fn example() -> CnfFormula {
        CnfFormula::from_dimacs_clauses(4, &[&[1, 2, -4], &[-1, 2, -3], &[3, 4]]).unwrap()
    }

    fn bits(v: &[u8]) -> Assignment {
        Assignment::new(v.iter().map(|&b| b == 1).collect())
    }

    #[test]
    fn example_evaluation() {
        let f = example();
        let s = count_satisfied(&f, &bits(&[1, 0, 1, 0])).unwrap();
        assert_eq!(s.satisfied, 2);
        // 0-based id of the second clause
        assert_eq!(s.unsat_clause_ids, vec![1]);
        let s = count_satisfied(&f, &bits(&[0, 1, 1, 1])).unwrap();
        assert_eq!(s.satisfied, 3);
        assert!(s.all_satisfied());
        assert_eq!(s.completion_rate, 1.0);
    }

    #[test]
    fn first_literal_true_satisfies_clause() {
        let f = example();
        for clause in f.clauses() {
            let first = clause.literals()[0];
            let mut a = Assignment::all(4, false);
            a.values_mut()[first.var()] = first.is_positive();
            assert!(clause.is_satisfied(a.values()));
        }
    }

    #[test]
    fn length_mismatch() {
        let err = count_satisfied(&example(), &Assignment::all(3, true)).unwrap_err();
        assert_eq!(err, CnfError::AssignmentLength { expected: 4, got: 3 });
    }

    #[test]
    fn tautology_rejected_duplicates_dropped() {
        assert_eq!(Clause::new([Literal::pos(0), Literal::neg(0)]), Err(CnfError::Tautology(0)));
        let c = Clause::new([Literal::pos(1), Literal::neg(0), Literal::pos(1)]).unwrap();
        assert_eq!(c.literals(), &[Literal::pos(1), Literal::neg(0)]);
        assert_eq!(Clause::new([]), Err(CnfError::EmptyClause));
    }

    #[test]
    fn formula_invariants() {
        assert_eq!(CnfFormula::new(3, vec![]), Err(CnfError::NoClauses));
        let c = Clause::new([Literal::pos(3)]).unwrap();
        assert!(matches!(
            CnfFormula::new(3, vec![c]),
            Err(CnfError::VariableOutOfRange { var: 3, num_variables: 3 })
        ));
    }

    #[test]
    fn literal_dimacs_mapping() {
        assert_eq!(Literal::from_dimacs(-3), Some(Literal::neg(2)));
        assert_eq!(Literal::from_dimacs(0), None);
        assert_eq!(Literal::pos(0).to_dimacs(), 1);
        assert_eq!((!Literal::pos(4)).to_dimacs(), -5);
        assert_eq!(Literal::neg(1).polarity(), -1);
    }
}
