use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::GenError;
use crate::cnf::{Clause, CnfFormula, Literal};

/// Uniform random 3-SAT: `m` clauses over three distinct variables each,
/// signs by fair coin. Literals within a clause are ordered by variable.
pub fn gen_random_3sat(n: usize, m: usize, seed: u64) -> Result<CnfFormula, GenError> {
    gen_random_ksat(3, n, m, seed)
}

pub fn gen_random_ksat(k: usize, n: usize, m: usize, seed: u64) -> Result<CnfFormula, GenError> {
    if k == 0 || n < k {
        return Err(GenError::TooFewVariables { needed: k.max(1), got: n });
    }
    if m == 0 {
        return Err(GenError::NoClauses);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clauses = (0..m)
        .map(|_| {
            let mut vars = sample(&mut rng, n, k).into_vec();
            vars.sort_unstable();
            let lits: Vec<Literal> = vars.into_iter().map(|v| Literal::new(v, rng.random_bool(0.5))).collect();
            Clause::new(lits).expect("distinct variables")
        })
        .collect();
    Ok(CnfFormula::new(n, clauses).expect("variables in range"))
}

/// Undirected simple graph on vertices `0..num_vertices`; edges stored as `(u, v)` with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomGraph {
    num_vertices: usize,
    edges: BTreeSet<(usize, usize)>,
    seed: Option<u64>,
}

impl RandomGraph {
    pub fn new(num_vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GenError> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(GenError::SelfLoop(a));
            }
            if a >= num_vertices || b >= num_vertices {
                return Err(GenError::VertexOutOfRange { vertex: a.max(b), num_vertices });
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(GenError::DuplicateEdge(a.min(b), a.max(b)));
            }
        }
        Ok(RandomGraph { num_vertices, edges: set, seed: None })
    }

    pub fn complete(n: usize) -> Self {
        RandomGraph::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)))).expect("simple graph")
    }

    pub fn path(n: usize) -> Self {
        RandomGraph::new(n, (1..n).map(|b| (b - 1, b))).expect("simple graph")
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

/// Erdős–Rényi graph: each of the N(N−1)/2 pairs is an edge with probability `p`.
pub fn gen_random_graph(num_vertices: usize, p: f64, seed: u64) -> Result<RandomGraph, GenError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GenError::BadProbability(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = BTreeSet::new();
    for a in 0..num_vertices {
        for b in a + 1..num_vertices {
            if rng.random_bool(p) {
                edges.insert((a, b));
            }
        }
    }
    Ok(RandomGraph { num_vertices, edges, seed: Some(seed) })
}
