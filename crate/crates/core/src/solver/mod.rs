//! Inference-time solving: one-shot MaxSAT from a model, and the iterative
//! loop that removes solved clauses and their exclusive variables.
//!
//! Each pass assigns the current subproblem, collects the variables `V_u` of
//! the unsolved clauses, and fixes every other variable to its current value.
//! With [`RemovalRule::Substitute`] (the default) the fixed values are then
//! substituted: clauses they satisfy disappear and their false literals are
//! dropped, so the next subproblem ranges over `V_u` only and no removed
//! clause can be broken later. [`RemovalRule::AsPrinted`] removes every
//! satisfied clause that has a variable outside `V_u`, regardless of which
//! literal satisfies it; results obtained that way are re-verified and
//! reported as partial if a removed clause was broken afterwards.

use std::fmt::Write as _;

use thiserror::Error;

use crate::cnf::{count_satisfied, Assignment, Clause, CnfFormula, CompletionStats, Literal};
use crate::model::{ModelError, TrsatModel};

pub const DEFAULT_MAX_ITERS: usize = 20;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("max_iters must be at least 1")]
    ZeroIterations,
    #[error("assigner returned {got} values for {expected} variables")]
    AssignmentLength { expected: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Anything that proposes a full assignment for a formula in one shot.
pub trait OneShotAssigner {
    fn assign(&self, formula: &CnfFormula, seed: u64) -> Result<Assignment, SolveError>;
}

impl OneShotAssigner for TrsatModel {
    fn assign(&self, formula: &CnfFormula, seed: u64) -> Result<Assignment, SolveError> {
        let out = self.predict_formula(formula, seed)?;
        Ok(out.threshold(self.config().epsilon_threshold)?)
    }
}

/// Forward, threshold, count.
pub fn solve_max_sat(
    model: &impl OneShotAssigner,
    f: &CnfFormula,
    instance_seed: u64,
) -> Result<(Assignment, CompletionStats), SolveError> {
    let a = model.assign(f, instance_seed)?;
    let stats = count_satisfied(f, &a)
        .map_err(|_| SolveError::AssignmentLength { expected: f.num_variables(), got: a.len() })?;
    Ok((a, stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Satisfied,
    Partial,
    UnsolvableReported,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Satisfied => "satisfied",
            SolveStatus::Partial => "partial",
            SolveStatus::UnsolvableReported => "unsolvable_reported",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RemovalRule {
    #[default]
    Substitute,
    AsPrinted,
}

/// Why a run stopped without satisfying everything.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    AllSatisfied,
    NoFreeVariables,
    NoProgress,
    MaxIterations,
    /// A satisfied claim failed re-verification on the original formula.
    VerificationFailed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationTrace {
    pub iteration: usize,
    pub remaining_vars: usize,
    pub remaining_clauses: usize,
    pub unsolved_clauses: usize,
    pub newly_fixed_vars: usize,
    pub removed_clauses: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SatResult {
    pub status: SolveStatus,
    pub stop_reason: StopReason,
    /// Values for every original variable: fixed ones plus the last pass.
    pub assignment: Assignment,
    /// Satisfied clauses of the original formula under `assignment`.
    pub satisfied_count: usize,
    pub total_clauses: usize,
    pub iterations: usize,
    pub trace: Vec<IterationTrace>,
    /// Original variables fixed by the loop with the value they were fixed to, in fixing order.
    pub fixed: Vec<(usize, bool)>,
}

impl SatResult {
    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "status {}", self.status.as_str());
        let _ = writeln!(s, "satisfied {} of {}", self.satisfied_count, self.total_clauses);
        let _ = writeln!(s, "iterations {}", self.iterations);
        let _ = writeln!(s, "v {} 0", self.assignment.to_dimacs_literals());
        for t in &self.trace {
            let _ = writeln!(
                s,
                "iter {} vars {} clauses {} unsolved {} fixed {} removed {}",
                t.iteration, t.remaining_vars, t.remaining_clauses, t.unsolved_clauses, t.newly_fixed_vars, t.removed_clauses
            );
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub max_iters: usize,
    pub rule: RemovalRule,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_iters: DEFAULT_MAX_ITERS, rule: RemovalRule::Substitute }
    }
}

/// A reduced formula over a dense subset of the original variables.
struct Subproblem {
    formula: CnfFormula,
    /// `to_original[i]` is the original index of subproblem variable `i`.
    to_original: Vec<usize>,
}

pub fn solve_exact(model: &impl OneShotAssigner, f: &CnfFormula, max_iters: usize, seed: u64) -> Result<SatResult, SolveError> {
    solve_exact_with(model, f, SolveOptions { max_iters, ..SolveOptions::default() }, seed)
}

pub fn solve_exact_with(
    model: &impl OneShotAssigner,
    f: &CnfFormula,
    options: SolveOptions,
    seed: u64,
) -> Result<SatResult, SolveError> {
    if options.max_iters == 0 {
        return Err(SolveError::ZeroIterations);
    }
    let n = f.num_variables();
    let mut values = vec![false; n];
    let mut fixed = vec![false; n];
    let mut fixed_log = Vec::new();
    let mut trace = Vec::new();
    let mut sub = Subproblem { formula: f.clone(), to_original: (0..n).collect() };
    let mut stop = StopReason::MaxIterations;

    for iteration in 1..=options.max_iters {
        let a = model.assign(&sub.formula, seed.wrapping_add(iteration as u64 - 1))?;
        if a.len() != sub.formula.num_variables() {
            return Err(SolveError::AssignmentLength { expected: sub.formula.num_variables(), got: a.len() });
        }
        for (i, &orig) in sub.to_original.iter().enumerate() {
            values[orig] = a.get(i);
        }
        let unsolved: Vec<usize> =
            (0..sub.formula.num_clauses()).filter(|&c| !sub.formula.clauses()[c].is_satisfied(a.values())).collect();
        let mut entry = IterationTrace {
            iteration,
            remaining_vars: sub.formula.num_variables(),
            remaining_clauses: sub.formula.num_clauses(),
            unsolved_clauses: unsolved.len(),
            newly_fixed_vars: 0,
            removed_clauses: 0,
        };
        if unsolved.is_empty() {
            trace.push(entry);
            stop = StopReason::AllSatisfied;
            break;
        }
        let mut in_vu = vec![false; sub.formula.num_variables()];
        for &c in &unsolved {
            for v in sub.formula.clauses()[c].vars() {
                in_vu[v] = true;
            }
        }
        let free: Vec<usize> = (0..in_vu.len()).filter(|&v| !in_vu[v]).collect();
        if free.is_empty() {
            trace.push(entry);
            stop = StopReason::NoFreeVariables;
            break;
        }

        let kept: Vec<Vec<Literal>> = match options.rule {
            RemovalRule::Substitute => sub
                .formula
                .clauses()
                .iter()
                .filter(|c| !c.literals().iter().any(|l| !in_vu[l.var()] && l.eval(a.get(l.var()))))
                .map(|c| c.literals().iter().copied().filter(|l| in_vu[l.var()]).collect())
                .collect(),
            RemovalRule::AsPrinted => sub
                .formula
                .clauses()
                .iter()
                .filter(|c| !(c.is_satisfied(a.values()) && c.vars().any(|v| !in_vu[v])))
                .map(|c| c.literals().to_vec())
                .collect(),
        };
        entry.removed_clauses = sub.formula.num_clauses() - kept.len();
        if entry.removed_clauses == 0 {
            trace.push(entry);
            stop = StopReason::NoProgress;
            break;
        }
        for &v in &free {
            let orig = sub.to_original[v];
            debug_assert!(!fixed[orig]);
            fixed[orig] = true;
            fixed_log.push((orig, values[orig]));
        }
        entry.newly_fixed_vars = free.len();
        trace.push(entry);
        sub = reindex(&sub, &in_vu, kept);
    }

    let assignment = Assignment::new(values);
    let stats = count_satisfied(f, &assignment).expect("assignment covers every variable");
    let mut status = match stop {
        StopReason::AllSatisfied => SolveStatus::Satisfied,
        StopReason::NoFreeVariables => SolveStatus::UnsolvableReported,
        _ => SolveStatus::Partial,
    };
    if status == SolveStatus::Satisfied && !stats.all_satisfied() {
        status = SolveStatus::Partial;
        stop = StopReason::VerificationFailed;
    }
    Ok(SatResult {
        status,
        stop_reason: stop,
        assignment,
        satisfied_count: stats.satisfied,
        total_clauses: stats.total,
        iterations: trace.len(),
        trace,
        fixed: fixed_log,
    })
}

/// Keeps the subproblem variables marked in `keep`, renumbered densely.
fn reindex(sub: &Subproblem, keep: &[bool], clauses: Vec<Vec<Literal>>) -> Subproblem {
    let mut new_index = vec![usize::MAX; keep.len()];
    let mut to_original = Vec::new();
    for (v, &k) in keep.iter().enumerate() {
        if k {
            new_index[v] = to_original.len();
            to_original.push(sub.to_original[v]);
        }
    }
    let clauses = clauses
        .into_iter()
        .map(|lits| {
            Clause::new(lits.into_iter().map(|l| Literal::new(new_index[l.var()], l.is_positive())))
                .expect("kept clauses are non-empty and tautology-free")
        })
        .collect();
    Subproblem { formula: CnfFormula::new(to_original.len(), clauses).expect("variables in range"), to_original }
}

/// True unless the result claims satisfaction that does not hold on `f`.
pub fn verify_result(f: &CnfFormula, r: &SatResult) -> bool {
    if r.status != SolveStatus::Satisfied {
        return true;
    }
    match count_satisfied(f, &r.assignment) {
        Ok(stats) => stats.all_satisfied(),
        Err(_) => false,
    }
}
