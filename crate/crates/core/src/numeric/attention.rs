//! Multi-head dot-product attention restricted to the entries of a sparse topology.
//!
//! For query row `i`, head `h` and stored entry `(i, j)`:
//! `α_ij = exp(⟨q_i, k_j⟩/√d) / Σ_{n ∈ N(i)} exp(⟨q_i, k_n⟩/√d)` and
//! `out_i = Σ_j α_ij v_j`. Only the pattern of the topology is used; stored
//! values are ignored. Rows without entries produce zeros.

use super::{dense::dot, DenseMatrix, NumericError};
use crate::graph::SparseMatrix;

/// Attention result plus the coefficients, laid out as `alpha[edge * heads + head]`
/// with edges in CSR order.
#[derive(Debug, Clone)]
pub struct AttentionOutput {
    pub output: DenseMatrix,
    pub alpha: Vec<f64>,
    /// Multiply-adds spent on scores and weighted sums.
    pub flops: u64,
}

pub(crate) fn check_shapes(
    q: &DenseMatrix,
    k: &DenseMatrix,
    v: &DenseMatrix,
    topology: &SparseMatrix,
    heads: usize,
) -> Result<(), NumericError> {
    let fail = |detail: String| Err(NumericError::ShapeMismatch { op: "sparse_attention", detail });
    if heads == 0 {
        return fail("zero heads".into());
    }
    if q.cols() != k.cols() {
        return fail(format!("query width {} != key width {}", q.cols(), k.cols()));
    }
    if k.rows() != v.rows() {
        return fail(format!("{} keys but {} values", k.rows(), v.rows()));
    }
    if q.cols() % heads != 0 || v.cols() % heads != 0 {
        return fail(format!("widths {}/{} not divisible by {heads} heads", q.cols(), v.cols()));
    }
    if topology.rows() != q.rows() || topology.cols() != k.rows() {
        return fail(format!(
            "topology {}x{} for {} queries and {} keys",
            topology.rows(),
            topology.cols(),
            q.rows(),
            k.rows()
        ));
    }
    Ok(())
}

pub fn sparse_attention(
    q: &DenseMatrix,
    k: &DenseMatrix,
    v: &DenseMatrix,
    topology: &SparseMatrix,
    heads: usize,
) -> Result<AttentionOutput, NumericError> {
    check_shapes(q, k, v, topology, heads)?;
    if !(q.all_finite() && k.all_finite() && v.all_finite()) {
        return Err(NumericError::NonFinite { op: "sparse_attention" });
    }
    let dk = q.cols() / heads;
    let dv = v.cols() / heads;
    let scale = 1.0 / (dk as f64).sqrt();
    let row_ptr = topology.row_ptr();
    let cols = topology.col_indices();
    let mut alpha = vec![0.0; topology.nnz() * heads];
    let mut output = DenseMatrix::zeros(q.rows(), v.cols());

    for i in 0..q.rows() {
        let span = row_ptr[i]..row_ptr[i + 1];
        if span.is_empty() {
            continue;
        }
        let qi = q.row(i);
        for h in 0..heads {
            let qh = &qi[h * dk..(h + 1) * dk];
            let mut max = f64::NEG_INFINITY;
            for e in span.clone() {
                let kh = &k.row(cols[e])[h * dk..(h + 1) * dk];
                let s = dot(qh, kh) * scale;
                alpha[e * heads + h] = s;
                max = max.max(s);
            }
            let mut total = 0.0;
            for e in span.clone() {
                let w = (alpha[e * heads + h] - max).exp();
                alpha[e * heads + h] = w;
                total += w;
            }
            let out_h = &mut output.row_mut(i)[h * dv..(h + 1) * dv];
            for e in span.clone() {
                let a = alpha[e * heads + h] / total;
                alpha[e * heads + h] = a;
                let vh = &v.row(cols[e])[h * dv..(h + 1) * dv];
                for (o, &x) in out_h.iter_mut().zip(vh) {
                    *o += a * x;
                }
            }
        }
    }
    let flops = (topology.nnz() * (q.cols() + v.cols())) as u64;
    Ok(AttentionOutput { output, alpha, flops })
}

/// Gradients of a scalar loss with respect to `q`, `k` and `v`, given the
/// gradient `d_out` with respect to the attention output.
#[allow(clippy::too_many_arguments)]
pub fn sparse_attention_backward(
    q: &DenseMatrix,
    k: &DenseMatrix,
    v: &DenseMatrix,
    topology: &SparseMatrix,
    heads: usize,
    alpha: &[f64],
    d_out: &DenseMatrix,
) -> (DenseMatrix, DenseMatrix, DenseMatrix) {
    let dk = q.cols() / heads;
    let dv = v.cols() / heads;
    let scale = 1.0 / (dk as f64).sqrt();
    let row_ptr = topology.row_ptr();
    let cols = topology.col_indices();
    let mut dq = DenseMatrix::zeros(q.rows(), q.cols());
    let mut dkm = DenseMatrix::zeros(k.rows(), k.cols());
    let mut dvm = DenseMatrix::zeros(v.rows(), v.cols());
    let mut d_alpha: Vec<f64> = Vec::new();

    for i in 0..q.rows() {
        let span = row_ptr[i]..row_ptr[i + 1];
        if span.is_empty() {
            continue;
        }
        for h in 0..heads {
            let go = &d_out.row(i)[h * dv..(h + 1) * dv];
            d_alpha.clear();
            let mut weighted = 0.0;
            for e in span.clone() {
                let j = cols[e];
                let a = alpha[e * heads + h];
                let da = dot(go, &v.row(j)[h * dv..(h + 1) * dv]);
                weighted += a * da;
                d_alpha.push(da);
                for (g, &x) in dvm.row_mut(j)[h * dv..(h + 1) * dv].iter_mut().zip(go) {
                    *g += a * x;
                }
            }
            for (t, e) in span.clone().enumerate() {
                let j = cols[e];
                let ds = alpha[e * heads + h] * (d_alpha[t] - weighted) * scale;
                if ds == 0.0 {
                    continue;
                }
                let kh = &k.row(j)[h * dk..(h + 1) * dk];
                for (g, &x) in dq.row_mut(i)[h * dk..(h + 1) * dk].iter_mut().zip(kh) {
                    *g += ds * x;
                }
                let qh = &q.row(i)[h * dk..(h + 1) * dk];
                for (g, &x) in dkm.row_mut(j)[h * dk..(h + 1) * dk].iter_mut().zip(qh) {
                    *g += ds * x;
                }
            }
        }
    }
    (dq, dkm, dvm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_neighbor_copies_value() {
        let q = DenseMatrix::from_rows(&[&[0.3, -1.0], &[2.0, 0.5]]);
        let k = DenseMatrix::from_rows(&[&[1.0, 1.0], &[-3.0, 0.2]]);
        let v = DenseMatrix::from_rows(&[&[5.0, 6.0], &[7.0, 8.0]]);
        let topo = SparseMatrix::from_triplets(2, 2, [(0, 1, 1.0)]).unwrap();
        let out = sparse_attention(&q, &k, &v, &topo, 1).unwrap();
        assert_eq!(out.alpha, vec![1.0]);
        assert_eq!(out.output.row(0), &[7.0, 8.0]);
        // second query has no neighbors
        assert_eq!(out.output.row(1), &[0.0, 0.0]);
    }

    #[test]
    fn identical_keys_split_evenly() {
        let q = DenseMatrix::from_rows(&[&[0.7, -0.2]]);
        let k = DenseMatrix::from_rows(&[&[1.0, 2.0], &[1.0, 2.0]]);
        let v = DenseMatrix::from_rows(&[&[1.0, 0.0], &[3.0, 4.0]]);
        let topo = SparseMatrix::from_triplets(1, 2, [(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        let out = sparse_attention(&q, &k, &v, &topo, 2).unwrap();
        assert!(out.alpha.iter().all(|&a| a == 0.5));
        assert_eq!(out.output.row(0), &[2.0, 2.0]);
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        let q = DenseMatrix::zeros(2, 4);
        let topo = SparseMatrix::zeros(2, 2);
        assert!(matches!(
            sparse_attention(&q, &q, &q, &topo, 3),
            Err(NumericError::ShapeMismatch { .. })
        ));
        assert!(matches!(
            sparse_attention(&q, &q, &q, &SparseMatrix::zeros(3, 2), 2),
            Err(NumericError::ShapeMismatch { .. })
        ));
        let mut bad = q.clone();
        bad.set(0, 0, f64::NAN);
        assert!(matches!(sparse_attention(&bad, &q, &q, &topo, 2), Err(NumericError::NonFinite { .. })));
    }
}
