//! CNF encodings of coloring, vertex cover and clique over a [`RandomGraph`].

use super::{GenError, RandomGraph};
use crate::cnf::{Clause, CnfFormula, Literal};

fn clause(lits: impl IntoIterator<Item = Literal>) -> Clause {
    Clause::new(lits).expect("encoder clauses use distinct variables")
}

fn finish(n: usize, clauses: Vec<Clause>) -> CnfFormula {
    CnfFormula::new(n, clauses).expect("encoder variables are in range")
}

/// Variable of "vertex `v` takes color `c`".
pub fn coloring_var(k: usize, v: usize, c: usize) -> usize {
    v * k + c
}

/// `k·N` variables. Every vertex gets at least one and at most one color,
/// adjacent vertices never share one.
pub fn encode_k_coloring(g: &RandomGraph, k: usize) -> Result<CnfFormula, GenError> {
    if k == 0 {
        return Err(GenError::BadK { k, reason: "need at least one color" });
    }
    let n = g.num_vertices();
    if n == 0 {
        return Err(GenError::NoClauses);
    }
    let x = |v, c| coloring_var(k, v, c);
    let mut clauses = Vec::new();
    for v in 0..n {
        clauses.push(clause((0..k).map(|c| Literal::pos(x(v, c)))));
        for c1 in 0..k {
            for c2 in c1 + 1..k {
                clauses.push(clause([Literal::neg(x(v, c1)), Literal::neg(x(v, c2))]));
            }
        }
    }
    for (a, b) in g.edges() {
        for c in 0..k {
            clauses.push(clause([Literal::neg(x(a, c)), Literal::neg(x(b, c))]));
        }
    }
    Ok(finish(k * n, clauses))
}

/// Register `r_{i,j}`: "at least `j+1` of `s_0..=s_i` are selected".
pub fn cover_register_var(n: usize, k: usize, i: usize, j: usize) -> usize {
    n + i * k + j
}

/// `(k+1)·N` variables: selections `s_v = v`, then a sequential counter with
/// `k` registers per vertex bounding the selection count by `k`.
pub fn encode_k_cover(g: &RandomGraph, k: usize) -> Result<CnfFormula, GenError> {
    let n = g.num_vertices();
    if k == 0 || k >= n {
        return Err(GenError::BadK { k, reason: "vertex cover needs 1 <= k < N" });
    }
    let r = |i, j| cover_register_var(n, k, i, j);
    let mut clauses = Vec::new();
    for (a, b) in g.edges() {
        clauses.push(clause([Literal::pos(a), Literal::pos(b)]));
    }
    clauses.push(clause([Literal::neg(0), Literal::pos(r(0, 0))]));
    for j in 1..k {
        clauses.push(clause([Literal::neg(r(0, j))]));
    }
    for i in 1..n {
        clauses.push(clause([Literal::neg(i), Literal::pos(r(i, 0))]));
        for j in 0..k {
            clauses.push(clause([Literal::neg(r(i - 1, j)), Literal::pos(r(i, j))]));
        }
        for j in 1..k {
            clauses.push(clause([Literal::neg(i), Literal::neg(r(i - 1, j - 1)), Literal::pos(r(i, j))]));
        }
        clauses.push(clause([Literal::neg(i), Literal::neg(r(i - 1, k - 1))]));
    }
    Ok(finish((k + 1) * n, clauses))
}

/// Variable of "slot `i` holds vertex `v`".
pub fn clique_var(n: usize, i: usize, v: usize) -> usize {
    i * n + v
}

/// `k·N` variables: `k` slots, each holding exactly one vertex, no vertex in
/// two slots, and no two slots holding a non-adjacent pair.
pub fn encode_k_clique(g: &RandomGraph, k: usize) -> Result<CnfFormula, GenError> {
    let n = g.num_vertices();
    if k == 0 || k > n {
        return Err(GenError::BadK { k, reason: "clique needs 1 <= k <= N" });
    }
    let y = |i, v| clique_var(n, i, v);
    let mut clauses = Vec::new();
    for i in 0..k {
        clauses.push(clause((0..n).map(|v| Literal::pos(y(i, v)))));
        for u in 0..n {
            for v in u + 1..n {
                clauses.push(clause([Literal::neg(y(i, u)), Literal::neg(y(i, v))]));
            }
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            for v in 0..n {
                clauses.push(clause([Literal::neg(y(i, v)), Literal::neg(y(j, v))]));
            }
            for u in 0..n {
                for v in 0..n {
                    if u != v && !g.has_edge(u, v) {
                        clauses.push(clause([Literal::neg(y(i, u)), Literal::neg(y(j, v))]));
                    }
                }
            }
        }
    }
    Ok(finish(k * n, clauses))
}

/// Brute-force reference checks over the graph itself.
pub mod reference {
    use super::RandomGraph;

    pub fn is_k_colorable(g: &RandomGraph, k: usize) -> bool {
        let n = g.num_vertices();
        if k == 0 {
            return n == 0;
        }
        let mut colors = vec![0usize; n];
        loop {
            if g.edges().all(|(a, b)| colors[a] != colors[b]) {
                return true;
            }
            let mut i = 0;
            loop {
                if i == n {
                    return false;
                }
                colors[i] += 1;
                if colors[i] < k {
                    break;
                }
                colors[i] = 0;
                i += 1;
            }
        }
    }

    pub fn has_vertex_cover(g: &RandomGraph, k: usize) -> bool {
        let n = g.num_vertices();
        (0u64..1 << n).any(|mask| {
            mask.count_ones() as usize <= k && g.edges().all(|(a, b)| mask >> a & 1 == 1 || mask >> b & 1 == 1)
        })
    }

    pub fn has_clique(g: &RandomGraph, k: usize) -> bool {
        let n = g.num_vertices();
        (0u64..1 << n).any(|mask| {
            mask.count_ones() as usize == k
                && (0..n).all(|a| {
                    (a + 1..n).all(|b| mask >> a & 1 == 0 || mask >> b & 1 == 0 || g.has_edge(a, b))
                })
        })
    }
}
