//! Dense/sparse numerics with a reverse-mode record for the model's primitives.

pub mod attention;
mod dense;
mod gradcheck;
mod param;
mod tape;

pub use attention::{sparse_attention, sparse_attention_backward, AttentionOutput};
pub use dense::{dot, DenseMatrix};
pub use gradcheck::{grad_check, GradCheckReport, ParamCheck};
pub use param::{Gradients, ParamId, ParamStore, Parameter};
pub use tape::{NodeId, Tape};

#[allow(unused_imports)]
pub(crate) use tape::logistic;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("{op}: shape mismatch: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },
    #[error("{op}: non-finite value")]
    NonFinite { op: &'static str },
    #[error("backward already replayed on this record")]
    BackwardTwice,
    #[error("backward needs a 1x1 loss, got {rows}x{cols}")]
    NotScalar { rows: usize, cols: usize },
}
