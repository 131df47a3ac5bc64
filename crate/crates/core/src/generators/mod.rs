//! Instance generators: random k-SAT, graph problems encoded as CNF, and
//! gate-level circuits.

mod circuit;
mod graph_problems;
mod random;

use thiserror::Error;

pub use circuit::{
    constraints_reachable, encode_circuit, gen_random_circuit, ripple_adder, simulated_output_target, Gate, GateKind,
    GateNetlist,
};
pub use graph_problems::{
    clique_var, coloring_var, cover_register_var, encode_k_clique, encode_k_coloring, encode_k_cover, reference,
};
pub use random::{gen_random_3sat, gen_random_graph, gen_random_ksat, RandomGraph};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("need at least {needed} variables, got {got}")]
    TooFewVariables { needed: usize, got: usize },
    #[error("generator would produce no clauses")]
    NoClauses,
    #[error("edge probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("vertex {vertex} out of range for {num_vertices} vertices")]
    VertexOutOfRange { vertex: usize, num_vertices: usize },
    #[error("k = {k}: {reason}")]
    BadK { k: usize, reason: &'static str },
    #[error("unknown wire `{0}`")]
    UnknownWire(String),
    #[error("wire `{0}` declared twice")]
    DuplicateWire(String),
    #[error("netlist has a cycle through `{0}`")]
    CyclicNetlist(String),
    #[error("unknown gate kind `{0}`")]
    UnknownGate(String),
    #[error("gate `{gate}` takes {expected} inputs, got {got}")]
    GateArity { gate: String, expected: usize, got: usize },
    #[error("gate `{0}` reads the same wire twice")]
    RepeatedGateInput(String),
    #[error("line {line}: {reason}")]
    NetlistSyntax { line: usize, reason: String },
    #[error("{got} input values for {expected} primary inputs")]
    InputCount { expected: usize, got: usize },
}
