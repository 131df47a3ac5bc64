//! Reference solvers: WalkSAT local search and an adapter for external
//! binaries that speak the SAT-competition output format.

mod external;
mod walksat;

pub use external::{parse_solver_output, run_external_solver, ExternalError, ExternalOutcome, ExternalStatus, EXTERNAL_SOLVER_ENV};
pub use walksat::{walksat, WalkSatConfig, WalkSatError, WalkSatOutcome};
