//! MaxSAT solving with a transformer over the signed bipartite graph of a CNF.
//!
//! A formula is turned into positive/negative variable–clause incidence
//! matrices and their 2-hop meta-path products. An encoder stack runs sparse
//! self-attention along meta-paths, a decoder stack runs cross-attention along
//! the incidences, and a sigmoid readout gives each variable a soft value.
//! Training minimizes a smoothmax relaxation of the clause count; solving
//! thresholds the soft values and can iterate by removing solved clauses.

pub mod baselines;
pub mod cnf;
pub mod generators;
pub mod graph;
pub mod loss;
pub mod model;
pub mod numeric;
pub mod solver;
pub mod training;

pub use cnf::{
    brute_force_max_sat, count_satisfied, parse_dimacs, write_dimacs, Assignment, Clause, CnfError, CnfFormula,
    CompletionStats, DimacsError, Literal, MaxSatOracle, OracleError, OracleResult, DEFAULT_VAR_CAP,
};
pub use graph::{build_biadjacency, meta_paths, InstanceGraph, MetaPathSet, PathType, SignedBiAdjacency, SparseMatrix};
pub use numeric::{DenseMatrix, ParamStore, Parameter, Tape};
pub use baselines::{walksat, WalkSatConfig, WalkSatOutcome};
pub use generators::{GenError, GateNetlist, RandomGraph};
pub use model::{load_checkpoint, save_checkpoint, ModelConfig, ModelError, TrsatModel, VariableOutputs};
pub use solver::{solve_exact, solve_max_sat, verify_result, OneShotAssigner, SatResult, SolveStatus};
pub use training::{evaluate, train, EvalSummary, TrainConfig, TrainError, TrainHistory};
