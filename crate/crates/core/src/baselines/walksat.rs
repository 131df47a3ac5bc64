use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cnf::{Assignment, CnfFormula};

#[derive(Debug, Error, PartialEq)]
pub enum WalkSatError {
    #[error("noise_p must be in [0, 1], got {0}")]
    BadNoise(f64),
    #[error("max_flips must be at least 1")]
    ZeroFlips,
    #[error("restarts must be at least 1")]
    ZeroRestarts,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkSatConfig {
    /// Flip budget per restart.
    pub max_flips: u64,
    pub noise_p: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for WalkSatConfig {
    fn default() -> Self {
        WalkSatConfig { max_flips: 100_000, noise_p: 0.5, restarts: 1, seed: 0 }
    }
}

impl WalkSatConfig {
    pub fn validate(&self) -> Result<(), WalkSatError> {
        if !(0.0..=1.0).contains(&self.noise_p) {
            return Err(WalkSatError::BadNoise(self.noise_p));
        }
        if self.max_flips == 0 {
            return Err(WalkSatError::ZeroFlips);
        }
        if self.restarts == 0 {
            return Err(WalkSatError::ZeroRestarts);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkSatOutcome {
    pub assignment: Option<Assignment>,
    /// Flips across all restarts run.
    pub flips: u64,
    /// Restart that found the assignment.
    pub restart: Option<usize>,
}

impl WalkSatOutcome {
    pub fn solved(&self) -> bool {
        self.assignment.is_some()
    }
}

/// WalkSAT/SKC. Each step picks a uniformly random unsatisfied clause; with
/// probability `noise_p` it flips a random variable of that clause, otherwise
/// the variable whose flip breaks the fewest satisfied clauses, lowest index
/// first on ties. Restart `r` draws from its own stream seeded by `(seed, r)`,
/// so a run with a larger `max_flips` replays every shorter run as a prefix.
pub fn walksat(f: &CnfFormula, cfg: &WalkSatConfig) -> Result<WalkSatOutcome, WalkSatError> {
    cfg.validate()?;
    let mut state = State::new(f);
    let mut flips = 0;
    for restart in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(cfg.seed, restart));
        let init: Vec<bool> = (0..f.num_variables()).map(|_| rng.random_bool(0.5)).collect();
        state.reset(f, init);
        let mut used = 0;
        loop {
            if state.unsat.is_empty() {
                debug_assert!(f.clauses().iter().all(|c| c.is_satisfied(&state.values)));
                return Ok(WalkSatOutcome {
                    assignment: Some(Assignment::new(state.values.clone())),
                    flips: flips + used,
                    restart: Some(restart),
                });
            }
            if used == cfg.max_flips {
                break;
            }
            let clause = state.unsat[rng.random_range(0..state.unsat.len())];
            let lits = f.clauses()[clause].literals();
            let var = if rng.random_bool(cfg.noise_p) {
                lits[rng.random_range(0..lits.len())].var()
            } else {
                lits.iter()
                    .map(|l| (state.break_count(l.var()), l.var()))
                    .min()
                    .expect("clauses are non-empty")
                    .1
            };
            state.flip(var);
            used += 1;
        }
        flips += used;
    }
    Ok(WalkSatOutcome { assignment: None, flips, restart: None })
}

fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed ^ (restart as u64).wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

struct State {
    values: Vec<bool>,
    /// Clause indices where each variable occurs, split by the literal's sign.
    occ_pos: Vec<Vec<usize>>,
    occ_neg: Vec<Vec<usize>>,
    true_count: Vec<u32>,
    unsat: Vec<usize>,
    /// Position of each clause in `unsat`, or `usize::MAX`.
    unsat_pos: Vec<usize>,
}

impl State {
    fn new(f: &CnfFormula) -> Self {
        let n = f.num_variables();
        let (mut occ_pos, mut occ_neg) = (vec![Vec::new(); n], vec![Vec::new(); n]);
        for (c, clause) in f.clauses().iter().enumerate() {
            for l in clause.literals() {
                let occ = if l.is_positive() { &mut occ_pos } else { &mut occ_neg };
                occ[l.var()].push(c);
            }
        }
        let m = f.num_clauses();
        State {
            values: vec![false; n],
            occ_pos,
            occ_neg,
            true_count: vec![0; m],
            unsat: Vec::with_capacity(m),
            unsat_pos: vec![usize::MAX; m],
        }
    }

    fn reset(&mut self, f: &CnfFormula, values: Vec<bool>) {
        self.values = values;
        self.unsat.clear();
        for (c, clause) in f.clauses().iter().enumerate() {
            let t = clause.literals().iter().filter(|l| l.eval(self.values[l.var()])).count() as u32;
            self.true_count[c] = t;
            self.unsat_pos[c] = usize::MAX;
            if t == 0 {
                self.push_unsat(c);
            }
        }
    }

    /// Clauses whose only true literal is on `var`.
    fn break_count(&self, var: usize) -> usize {
        let occ = if self.values[var] { &self.occ_pos[var] } else { &self.occ_neg[var] };
        occ.iter().filter(|&&c| self.true_count[c] == 1).count()
    }

    fn flip(&mut self, var: usize) {
        let now_true = !self.values[var];
        self.values[var] = now_true;
        let (gained, lost) = if now_true { (&self.occ_pos[var], &self.occ_neg[var]) } else { (&self.occ_neg[var], &self.occ_pos[var]) };
        for &c in gained {
            self.true_count[c] += 1;
            if self.true_count[c] == 1 {
                remove_unsat(&mut self.unsat, &mut self.unsat_pos, c);
            }
        }
        for &c in lost {
            self.true_count[c] -= 1;
            if self.true_count[c] == 0 {
                self.unsat_pos[c] = self.unsat.len();
                self.unsat.push(c);
            }
        }
    }

    fn push_unsat(&mut self, c: usize) {
        self.unsat_pos[c] = self.unsat.len();
        self.unsat.push(c);
    }
}

fn remove_unsat(unsat: &mut Vec<usize>, unsat_pos: &mut [usize], c: usize) {
    let pos = unsat_pos[c];
    let last = unsat.pop().expect("clause is listed");
    if last != c {
        unsat[pos] = last;
        unsat_pos[last] = pos;
    }
    unsat_pos[c] = usize::MAX;
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::cnf::{brute_force_max_sat, count_satisfied};
    use crate::generators::gen_random_3sat;

    fn cfg(max_flips: u64, seed: u64) -> WalkSatConfig {
        WalkSatConfig { max_flips, seed, ..WalkSatConfig::default() }
    }

    #[test]
    fn near_trivial_instance() {
        let f = CnfFormula::from_dimacs_clauses(2, &[&[1], &[1, 2]]).unwrap();
        let out = walksat(&f, &cfg(10, 0)).unwrap();
        let a = out.assignment.unwrap();
        assert!(a.get(0));
        assert!(out.flips <= 10);
    }

    #[test]
    fn contradiction_exhausts_budget() {
        let f = CnfFormula::from_dimacs_clauses(1, &[&[1], &[-1]]).unwrap();
        let out = walksat(&f, &WalkSatConfig { max_flips: 50, restarts: 3, ..WalkSatConfig::default() }).unwrap();
        assert_eq!(out, WalkSatOutcome { assignment: None, flips: 150, restart: None });
    }

    #[test]
    fn config_validation() {
        let f = CnfFormula::from_dimacs_clauses(1, &[&[1]]).unwrap();
        assert_eq!(walksat(&f, &WalkSatConfig { noise_p: 1.5, ..WalkSatConfig::default() }), Err(WalkSatError::BadNoise(1.5)));
        assert_eq!(walksat(&f, &cfg(0, 0)), Err(WalkSatError::ZeroFlips));
        assert_eq!(walksat(&f, &WalkSatConfig { restarts: 0, ..WalkSatConfig::default() }), Err(WalkSatError::ZeroRestarts));
    }

    #[test]
    fn greedy_prefers_lowest_break_then_lowest_index() {
        // all false: only clause 0 is unsat, and flipping v1 would break (¬v1 ∨ v4)
        let f = CnfFormula::from_dimacs_clauses(4, &[&[1, 2, 3], &[-1, 4]]).unwrap();
        let mut s = State::new(&f);
        s.reset(&f, vec![false; 4]);
        assert_eq!(s.unsat, vec![0]);
        let breaks: Vec<usize> = (0..3).map(|v| s.break_count(v)).collect();
        assert_eq!(breaks, vec![1, 0, 0]);
        let out = walksat(&f, &WalkSatConfig { noise_p: 0.0, max_flips: 1, ..WalkSatConfig::default() }).unwrap();
        assert!(out.solved());
    }

    #[test]
    fn incremental_counts_match_recount() {
        let f = gen_random_3sat(15, 60, 2).unwrap();
        let mut s = State::new(&f);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        s.reset(&f, (0..15).map(|_| rng.random_bool(0.5)).collect());
        for _ in 0..500 {
            s.flip(rng.random_range(0..15));
            let stats = count_satisfied(&f, &Assignment::new(s.values.clone())).unwrap();
            let mut unsat = s.unsat.clone();
            unsat.sort_unstable();
            assert_eq!(unsat, stats.unsat_clause_ids);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sound_deterministic_and_budget_monotone(seed in 0u64..5_000, budget in 1u64..400) {
            let f = gen_random_3sat(12, 48, seed).unwrap();
            let c = WalkSatConfig { max_flips: budget, restarts: 2, seed, ..WalkSatConfig::default() };
            let out = walksat(&f, &c).unwrap();
            prop_assert_eq!(&out, &walksat(&f, &c).unwrap());
            if let Some(a) = &out.assignment {
                prop_assert!(count_satisfied(&f, a).unwrap().all_satisfied());
                let longer = walksat(&f, &WalkSatConfig { max_flips: budget * 3, ..c }).unwrap();
                prop_assert!(longer.solved());
                if out.restart == Some(0) {
                    prop_assert_eq!(&longer, &out);
                }
            }
            if out.solved() {
                prop_assert_eq!(brute_force_max_sat(&f).unwrap().best_count, f.num_clauses());
            }
        }
    }
}
