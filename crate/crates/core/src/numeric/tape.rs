//! Record of executed primitives with reverse-mode replay.
//!
//! The tape is scoped to the primitives the model uses. Nodes are appended in
//! execution order, so the node list is already topologically ordered and the
//! backward pass simply walks it in reverse.

use std::collections::HashMap;

use super::attention::{sparse_attention, sparse_attention_backward};
use super::{DenseMatrix, Gradients, NumericError, ParamId, ParamStore};
use crate::graph::SparseMatrix;

const LAYER_NORM_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

enum Value {
    Owned(DenseMatrix),
    Param(ParamId),
}

enum Op<'a> {
    Input,
    Param(ParamId),
    Affine { x: NodeId, w: NodeId, b: Option<NodeId> },
    Add(NodeId, NodeId),
    Concat(Vec<NodeId>),
    Relu(NodeId),
    Sigmoid(NodeId),
    LayerNorm { x: NodeId, gain: NodeId, bias: NodeId, x_hat: DenseMatrix, inv_std: Vec<f64> },
    Attention { q: NodeId, k: NodeId, v: NodeId, topology: &'a SparseMatrix, heads: usize, alpha: Vec<f64> },
    Sum(NodeId),
    ScalarFn { x: NodeId, grad: DenseMatrix },
}

impl Op<'_> {
    fn name(&self) -> &'static str {
        match self {
            Op::Input => "input",
            Op::Param(_) => "param",
            Op::Affine { .. } => "affine",
            Op::Add(..) => "add",
            Op::Concat(_) => "concat",
            Op::Relu(_) => "relu",
            Op::Sigmoid(_) => "sigmoid",
            Op::LayerNorm { .. } => "layer_norm",
            Op::Attention { .. } => "sparse_attention",
            Op::Sum(_) => "sum",
            Op::ScalarFn { .. } => "scalar_fn",
        }
    }
}

struct Node<'a> {
    value: Value,
    op: Op<'a>,
}

/// A computation record over parameters borrowed from a [`ParamStore`].
pub struct Tape<'a> {
    params: &'a ParamStore,
    nodes: Vec<Node<'a>>,
    param_nodes: HashMap<ParamId, NodeId>,
    markers: Vec<(usize, &'static str)>,
    flops: u64,
    replayed: bool,
}

fn shape_err(op: &'static str, detail: String) -> NumericError {
    NumericError::ShapeMismatch { op, detail }
}

impl<'a> Tape<'a> {
    pub fn new(params: &'a ParamStore) -> Self {
        Tape { params, nodes: Vec::new(), param_nodes: HashMap::new(), markers: Vec::new(), flops: 0, replayed: false }
    }

    pub fn value(&self, id: NodeId) -> &DenseMatrix {
        match &self.nodes[id.0].value {
            Value::Owned(m) => m,
            Value::Param(p) => self.params.value(*p),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Multiply-adds executed so far by affine and attention primitives.
    pub fn flops(&self) -> u64 {
        self.flops
    }

    /// Number of recorded nodes of the given primitive (`"affine"`, `"sparse_attention"`, ...).
    pub fn count_ops(&self, name: &str) -> usize {
        self.nodes.iter().filter(|n| n.op.name() == name).count()
    }

    /// Tags the current position of the record.
    pub fn mark(&mut self, label: &'static str) {
        self.markers.push((self.nodes.len(), label));
    }

    pub fn markers(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.markers.iter().map(|&(_, l)| l)
    }

    fn push(&mut self, value: DenseMatrix, op: Op<'a>) -> NodeId {
        self.nodes.push(Node { value: Value::Owned(value), op });
        NodeId(self.nodes.len() - 1)
    }

    pub fn input(&mut self, value: DenseMatrix) -> NodeId {
        self.push(value, Op::Input)
    }

    /// Leaf for a stored parameter; repeated calls return the same node.
    pub fn param(&mut self, id: ParamId) -> NodeId {
        if let Some(&node) = self.param_nodes.get(&id) {
            return node;
        }
        self.nodes.push(Node { value: Value::Param(id), op: Op::Param(id) });
        let node = NodeId(self.nodes.len() - 1);
        self.param_nodes.insert(id, node);
        node
    }

    /// `x·w (+ b)` with `b` a 1×cols row broadcast over rows.
    pub fn affine(&mut self, x: NodeId, w: NodeId, b: Option<NodeId>) -> Result<NodeId, NumericError> {
        let (xv, wv) = (self.value(x), self.value(w));
        if xv.cols() != wv.rows() {
            return Err(shape_err("affine", format!("{:?} times {:?}", xv.shape(), wv.shape())));
        }
        let mut out = xv.matmul(wv);
        let flops = (xv.rows() * xv.cols() * wv.cols()) as u64;
        if let Some(b) = b {
            let bv = self.value(b);
            if bv.shape() != (1, out.cols()) {
                return Err(shape_err("affine", format!("bias {:?} for {} columns", bv.shape(), out.cols())));
            }
            let bias = bv.row(0);
            for r in 0..out.rows() {
                for (o, &bb) in out.row_mut(r).iter_mut().zip(bias) {
                    *o += bb;
                }
            }
        }
        self.flops += flops;
        Ok(self.push(out, Op::Affine { x, w, b }))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, NumericError> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.shape() != bv.shape() {
            return Err(shape_err("add", format!("{:?} + {:?}", av.shape(), bv.shape())));
        }
        let mut out = av.clone();
        out.add_assign(bv);
        Ok(self.push(out, Op::Add(a, b)))
    }

    /// Column-wise concatenation.
    pub fn concat(&mut self, parts: &[NodeId]) -> Result<NodeId, NumericError> {
        let rows = parts.first().map(|&p| self.value(p).rows()).ok_or_else(|| shape_err("concat", "no parts".into()))?;
        if parts.iter().any(|&p| self.value(p).rows() != rows) {
            return Err(shape_err("concat", "row counts differ".into()));
        }
        let cols: usize = parts.iter().map(|&p| self.value(p).cols()).sum();
        let mut out = DenseMatrix::zeros(rows, cols);
        for r in 0..rows {
            let mut offset = 0;
            for &p in parts {
                let src = self.value(p).row(r);
                out.row_mut(r)[offset..offset + src.len()].copy_from_slice(src);
                offset += src.len();
            }
        }
        Ok(self.push(out, Op::Concat(parts.to_vec())))
    }

    pub fn relu(&mut self, x: NodeId) -> NodeId {
        let mut out = self.value(x).clone();
        for v in out.data_mut() {
            *v = v.max(0.0);
        }
        self.push(out, Op::Relu(x))
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        let mut out = self.value(x).clone();
        for v in out.data_mut() {
            *v = logistic(*v);
        }
        self.push(out, Op::Sigmoid(x))
    }

    /// Per-row standardization followed by `gain ⊙ x̂ + bias`; gain and bias are 1×cols.
    pub fn layer_norm(&mut self, x: NodeId, gain: NodeId, bias: NodeId) -> Result<NodeId, NumericError> {
        let xv = self.value(x);
        let cols = xv.cols();
        let (gv, bv) = (self.value(gain), self.value(bias));
        if gv.shape() != (1, cols) || bv.shape() != (1, cols) {
            return Err(shape_err(
                "layer_norm",
                format!("gain {:?} / bias {:?} for {cols} columns", gv.shape(), bv.shape()),
            ));
        }
        let mut x_hat = DenseMatrix::zeros(xv.rows(), cols);
        let mut out = DenseMatrix::zeros(xv.rows(), cols);
        let mut inv_std = Vec::with_capacity(xv.rows());
        for r in 0..xv.rows() {
            let row = xv.row(r);
            let mean = row.iter().sum::<f64>() / cols as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / cols as f64;
            let is = 1.0 / (var + LAYER_NORM_EPS).sqrt();
            inv_std.push(is);
            for c in 0..cols {
                let h = (row[c] - mean) * is;
                x_hat.set(r, c, h);
                out.set(r, c, gv.get(0, c) * h + bv.get(0, c));
            }
        }
        Ok(self.push(out, Op::LayerNorm { x, gain, bias, x_hat, inv_std }))
    }

    /// See [`super::attention`].
    pub fn sparse_attention(
        &mut self,
        q: NodeId,
        k: NodeId,
        v: NodeId,
        topology: &'a SparseMatrix,
        heads: usize,
    ) -> Result<NodeId, NumericError> {
        let res = sparse_attention(self.value(q), self.value(k), self.value(v), topology, heads)?;
        self.flops += res.flops;
        Ok(self.push(res.output, Op::Attention { q, k, v, topology, heads, alpha: res.alpha }))
    }

    /// Sum of all entries, as a 1×1 node.
    pub fn sum(&mut self, x: NodeId) -> NodeId {
        let s = self.value(x).sum();
        self.push(DenseMatrix::filled(1, 1, s), Op::Sum(x))
    }

    /// A scalar function of `x` evaluated outside the tape, recorded with its
    /// gradient `d value / d x` (same shape as `x`).
    pub fn scalar_fn(&mut self, x: NodeId, value: f64, grad: DenseMatrix) -> Result<NodeId, NumericError> {
        if grad.shape() != self.value(x).shape() {
            return Err(shape_err("scalar_fn", format!("gradient {:?} for input {:?}", grad.shape(), self.value(x).shape())));
        }
        if !value.is_finite() {
            return Err(NumericError::NonFinite { op: "scalar_fn" });
        }
        Ok(self.push(DenseMatrix::filled(1, 1, value), Op::ScalarFn { x, grad }))
    }

    /// Reverse-mode pass from the 1×1 node `loss`, seeded with `seed`.
    /// A record can be replayed only once.
    pub fn backward(&mut self, loss: NodeId, seed: f64) -> Result<Gradients, NumericError> {
        if self.replayed {
            return Err(NumericError::BackwardTwice);
        }
        let shape = self.value(loss).shape();
        if shape != (1, 1) {
            return Err(NumericError::NotScalar { rows: shape.0, cols: shape.1 });
        }
        self.replayed = true;

        let mut grads: Vec<Option<DenseMatrix>> = (0..self.nodes.len()).map(|_| None).collect();
        let mut out: Vec<Option<DenseMatrix>> = (0..self.params.len()).map(|_| None).collect();
        grads[loss.0] = Some(DenseMatrix::filled(1, 1, seed));

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            match &self.nodes[idx].op {
                Op::Input => {}
                Op::Param(p) => accumulate(&mut out, p.0, g),
                Op::Affine { x, w, b } => {
                    let (xv, wv) = (self.value(*x), self.value(*w));
                    let dx = g.matmul_nt(wv);
                    let dw = xv.matmul_tn(&g);
                    if let Some(b) = b {
                        let mut db = DenseMatrix::zeros(1, g.cols());
                        for r in 0..g.rows() {
                            for (d, &v) in db.row_mut(0).iter_mut().zip(g.row(r)) {
                                *d += v;
                            }
                        }
                        accumulate(&mut grads, b.0, db);
                    }
                    accumulate(&mut grads, w.0, dw);
                    accumulate(&mut grads, x.0, dx);
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, b.0, g.clone());
                    accumulate(&mut grads, a.0, g);
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let width = self.value(p).cols();
                        let mut part = DenseMatrix::zeros(g.rows(), width);
                        for r in 0..g.rows() {
                            part.row_mut(r).copy_from_slice(&g.row(r)[offset..offset + width]);
                        }
                        offset += width;
                        accumulate(&mut grads, p.0, part);
                    }
                }
                Op::Relu(x) => {
                    let mut dx = g;
                    for (d, &v) in dx.data_mut().iter_mut().zip(self.value(*x).data()) {
                        if v <= 0.0 {
                            *d = 0.0;
                        }
                    }
                    accumulate(&mut grads, x.0, dx);
                }
                Op::Sigmoid(x) => {
                    let y = self.value(NodeId(idx));
                    let mut dx = g;
                    for (d, &s) in dx.data_mut().iter_mut().zip(y.data()) {
                        *d *= s * (1.0 - s);
                    }
                    accumulate(&mut grads, x.0, dx);
                }
                Op::LayerNorm { x, gain, bias, x_hat, inv_std } => {
                    let gv = self.value(*gain);
                    let cols = g.cols();
                    let mut dx = DenseMatrix::zeros(g.rows(), cols);
                    let mut dgain = DenseMatrix::zeros(1, cols);
                    let mut dbias = DenseMatrix::zeros(1, cols);
                    let mut dh = vec![0.0; cols];
                    for r in 0..g.rows() {
                        let (gr, hr) = (g.row(r), x_hat.row(r));
                        let mut mean_dh = 0.0;
                        let mut mean_dh_h = 0.0;
                        for c in 0..cols {
                            dh[c] = gr[c] * gv.get(0, c);
                            mean_dh += dh[c];
                            mean_dh_h += dh[c] * hr[c];
                            dgain.data_mut()[c] += gr[c] * hr[c];
                            dbias.data_mut()[c] += gr[c];
                        }
                        mean_dh /= cols as f64;
                        mean_dh_h /= cols as f64;
                        let row = dx.row_mut(r);
                        for c in 0..cols {
                            row[c] = inv_std[r] * (dh[c] - mean_dh - hr[c] * mean_dh_h);
                        }
                    }
                    accumulate(&mut grads, bias.0, dbias);
                    accumulate(&mut grads, gain.0, dgain);
                    accumulate(&mut grads, x.0, dx);
                }
                Op::Attention { q, k, v, topology, heads, alpha } => {
                    let (dq, dk, dv) = sparse_attention_backward(
                        self.value(*q),
                        self.value(*k),
                        self.value(*v),
                        topology,
                        *heads,
                        alpha,
                        &g,
                    );
                    accumulate(&mut grads, v.0, dv);
                    accumulate(&mut grads, k.0, dk);
                    accumulate(&mut grads, q.0, dq);
                }
                Op::Sum(x) => {
                    let (r, c) = self.value(*x).shape();
                    accumulate(&mut grads, x.0, DenseMatrix::filled(r, c, g.get(0, 0)));
                }
                Op::ScalarFn { x, grad } => {
                    let mut dx = grad.clone();
                    dx.scale(g.get(0, 0));
                    accumulate(&mut grads, x.0, dx);
                }
            }
        }
        Ok(Gradients(out))
    }
}

fn accumulate(slots: &mut [Option<DenseMatrix>], idx: usize, g: DenseMatrix) {
    match &mut slots[idx] {
        Some(existing) => existing.add_assign(&g),
        slot @ None => *slot = Some(g),
    }
}

#[inline]
pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
