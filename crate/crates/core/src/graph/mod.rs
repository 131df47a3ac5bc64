//! Signed bipartite view of a CNF and its 2-hop meta-path adjacencies.

mod sparse;

pub use sparse::{SparseError, SparseMatrix};

use crate::cnf::CnfFormula;

/// Polarity pair of a 2-hop path: sign of the first edge, then of the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathType {
    PosPos,
    PosNeg,
    NegPos,
    NegNeg,
}

impl PathType {
    pub const ALL: [PathType; 4] = [PathType::PosPos, PathType::PosNeg, PathType::NegPos, PathType::NegNeg];

    pub fn index(self) -> usize {
        self as usize
    }

    /// `(first_positive, second_positive)`
    pub fn signs(self) -> (bool, bool) {
        match self {
            PathType::PosPos => (true, true),
            PathType::PosNeg => (true, false),
            PathType::NegPos => (false, true),
            PathType::NegNeg => (false, false),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PathType::PosPos => "pp",
            PathType::PosNeg => "pn",
            PathType::NegPos => "np",
            PathType::NegNeg => "nn",
        }
    }
}

/// The (A+, A−) pair of n×m 0/1 incidence matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedBiAdjacency {
    pub a_plus: SparseMatrix,
    pub a_minus: SparseMatrix,
}

impl SignedBiAdjacency {
    pub fn get(&self, positive: bool) -> &SparseMatrix {
        if positive {
            &self.a_plus
        } else {
            &self.a_minus
        }
    }

    pub fn num_variables(&self) -> usize {
        self.a_plus.rows()
    }

    pub fn num_clauses(&self) -> usize {
        self.a_plus.cols()
    }
}

pub fn build_biadjacency(f: &CnfFormula) -> SignedBiAdjacency {
    let (n, m) = (f.num_variables(), f.num_clauses());
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (j, clause) in f.clauses().iter().enumerate() {
        for lit in clause.literals() {
            let entry = (lit.var(), j, 1.0);
            if lit.is_positive() {
                plus.push(entry);
            } else {
                minus.push(entry);
            }
        }
    }
    // clauses never repeat a variable, so no duplicate coordinates
    SignedBiAdjacency {
        a_plus: SparseMatrix::from_triplets(n, m, plus).expect("valid formula"),
        a_minus: SparseMatrix::from_triplets(n, m, minus).expect("valid formula"),
    }
}

/// Four matrices indexed by [`PathType`].
#[derive(Debug, Clone, PartialEq)]
pub struct PathMatrices([SparseMatrix; 4]);

impl PathMatrices {
    pub fn get(&self, t: PathType) -> &SparseMatrix {
        &self.0[t.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (PathType, &SparseMatrix)> {
        PathType::ALL.into_iter().zip(self.0.iter())
    }

    fn map(&self, f: impl Fn(&SparseMatrix) -> SparseMatrix) -> PathMatrices {
        PathMatrices(std::array::from_fn(|i| f(&self.0[i])))
    }
}

impl std::ops::Index<PathType> for PathMatrices {
    type Output = SparseMatrix;

    fn index(&self, t: PathType) -> &SparseMatrix {
        self.get(t)
    }
}

/// Meta-path products before binarization. Entry `var_side[(s,t)](i,k)` counts
/// the clauses that contain `v_i` with sign `s` and `v_k` with sign `t`; on the
/// clause side, `(j,k)` counts shared variables with the given signs.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaPathCounts {
    pub var_side: PathMatrices,
    pub clause_side: PathMatrices,
}

/// Binarized meta-path topologies (self-connections kept).
#[derive(Debug, Clone, PartialEq)]
pub struct MetaPathSet {
    pub var_side: PathMatrices,
    pub clause_side: PathMatrices,
}

pub fn meta_path_counts(b: &SignedBiAdjacency) -> MetaPathCounts {
    let plus_t = b.a_plus.transpose();
    let minus_t = b.a_minus.transpose();
    let transposed = |positive: bool| if positive { &plus_t } else { &minus_t };
    let var_side = PathMatrices(PathType::ALL.map(|t| {
        let (s, u) = t.signs();
        b.get(s).matmul(transposed(u)).expect("n×m by m×n")
    }));
    let clause_side = PathMatrices(PathType::ALL.map(|t| {
        let (s, u) = t.signs();
        transposed(s).matmul(b.get(u)).expect("m×n by n×m")
    }));
    MetaPathCounts { var_side, clause_side }
}

pub fn meta_paths(b: &SignedBiAdjacency) -> MetaPathSet {
    meta_path_counts(b).binarize()
}

impl MetaPathCounts {
    pub fn binarize(&self) -> MetaPathSet {
        MetaPathSet {
            var_side: self.var_side.map(SparseMatrix::binarize),
            clause_side: self.clause_side.map(SparseMatrix::binarize),
        }
    }
}

/// Everything the model needs about one formula, computed once.
#[derive(Debug, Clone)]
pub struct InstanceGraph {
    pub formula: CnfFormula,
    pub biadjacency: SignedBiAdjacency,
    /// A+ᵀ, m×n: clause j attends to the variables occurring positively in it.
    pub a_plus_t: SparseMatrix,
    /// A−ᵀ, m×n.
    pub a_minus_t: SparseMatrix,
    pub meta_paths: MetaPathSet,
}

impl InstanceGraph {
    pub fn build(formula: CnfFormula) -> Self {
        let biadjacency = build_biadjacency(&formula);
        let meta_paths = meta_paths(&biadjacency);
        InstanceGraph {
            a_plus_t: biadjacency.a_plus.transpose(),
            a_minus_t: biadjacency.a_minus.transpose(),
            biadjacency,
            meta_paths,
            formula,
        }
    }

    pub fn num_variables(&self) -> usize {
        self.formula.num_variables()
    }

    pub fn num_clauses(&self) -> usize {
        self.formula.num_clauses()
    }

    /// Total stored entries over every topology the model attends over.
    pub fn total_edges(&self) -> usize {
        let mp: usize = self.meta_paths.var_side.iter().chain(self.meta_paths.clause_side.iter()).map(|(_, m)| m.nnz()).sum();
        mp + 2 * (self.biadjacency.a_plus.nnz() + self.biadjacency.a_minus.nnz())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::tests::example;

    fn rows(m: &SparseMatrix) -> Vec<Vec<f64>> {
        m.to_dense_rows()
    }

    #[test]
    fn example_biadjacency() {
        let b = build_biadjacency(&example());
        assert_eq!(
            rows(&b.a_plus),
            vec![vec![1., 0., 0.], vec![1., 1., 0.], vec![0., 0., 1.], vec![0., 0., 1.]]
        );
        assert_eq!(
            rows(&b.a_minus),
            vec![vec![0., 1., 0.], vec![0., 0., 0.], vec![0., 1., 0.], vec![1., 0., 0.]]
        );
        assert_eq!(b.a_plus.nnz() + b.a_minus.nnz(), example().num_literals());
    }

    #[test]
    fn trivial_biadjacencies() {
        let b = build_biadjacency(&CnfFormula::from_dimacs_clauses(1, &[&[1]]).unwrap());
        assert_eq!(rows(&b.a_plus), vec![vec![1.]]);
        assert_eq!(rows(&b.a_minus), vec![vec![0.]]);
        let b = build_biadjacency(&CnfFormula::from_dimacs_clauses(2, &[&[-1, -2]]).unwrap());
        assert_eq!(b.a_plus.nnz(), 0);
        assert_eq!(rows(&b.a_minus), vec![vec![1.], vec![1.]]);
    }

    #[test]
    fn example_pos_pos_product() {
        let b = build_biadjacency(&example());
        let product = b.a_plus.matmul(&b.a_plus.transpose()).unwrap();
        assert_eq!(
            rows(&product),
            vec![vec![1., 1., 0., 0.], vec![1., 2., 0., 0.], vec![0., 0., 1., 1.], vec![0., 0., 1., 1.]]
        );
        let mp = meta_paths(&b);
        assert_eq!(
            rows(&mp.var_side[PathType::PosPos]),
            vec![vec![1., 1., 0., 0.], vec![1., 1., 0., 0.], vec![0., 0., 1., 1.], vec![0., 0., 1., 1.]]
        );
    }

    #[test]
    fn example_pos_neg_path_v1_to_v4() {
        let mp = meta_paths(&build_biadjacency(&example()));
        // v1 ∈ u1 and ¬v4 ∈ u1
        assert_eq!(mp.var_side[PathType::PosNeg].get(0, 3), 1.0);
        assert_eq!(mp.var_side[PathType::NegPos].get(3, 0), 1.0);
    }

    #[test]
    fn unit_clause_has_only_self_paths() {
        let mp = meta_paths(&build_biadjacency(&CnfFormula::from_dimacs_clauses(3, &[&[2]]).unwrap()));
        for (_, m) in mp.var_side.iter().chain(mp.clause_side.iter()) {
            assert!(m.iter().all(|(r, c, _)| r == c));
        }
    }
}
