//! The transformer over signed variable/clause graphs.
//!
//! Every node starts from a learned type embedding plus a projection of a
//! seeded noise vector. Encoder layers let each node attend to nodes of its
//! own kind along the four signed meta-paths; decoder layers pass messages
//! across the positive and negative incidences, first into clauses, then back
//! into variables, followed by a feed-forward block on both sides. A sigmoid
//! readout turns the final variable features into soft values in `[0, 1]`.

mod checkpoint;
mod config;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use thiserror::Error;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_VERSION};
pub use config::ModelConfig;

use crate::cnf::{Assignment, CnfFormula};
use crate::graph::{InstanceGraph, PathType};
use crate::loss::{neg_log_loss_with_grad, LossError};
use crate::numeric::{DenseMatrix, Gradients, NodeId, NumericError, ParamId, ParamStore, Tape};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("threshold epsilon {0} outside (0, 0.5)")]
    BadEpsilon(f64),
    #[error("output {value} at position {index} is not in [0, 1]")]
    OutputRange { index: usize, value: f64 },
    #[error("noise is {got:?} but the instance needs {expected:?}")]
    NoiseShape { expected: (usize, usize), got: (usize, usize) },
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("checkpoint version {found}, expected {expected}")]
    CheckpointVersion { found: u32, expected: u32 },
    #[error("checkpoint I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// Soft per-variable values, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableOutputs {
    pub x: Vec<f64>,
}

impl VariableOutputs {
    pub fn threshold(&self, eps: f64) -> Result<Assignment, ModelError> {
        threshold(&self.x, eps)
    }
}

/// `v_i = ⌊x_i / (0.5 + eps)⌋`.
pub fn threshold(x: &[f64], eps: f64) -> Result<Assignment, ModelError> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(ModelError::BadEpsilon(eps));
    }
    x.iter()
        .enumerate()
        .map(|(index, &value)| {
            if !(0.0..=1.0).contains(&value) {
                return Err(ModelError::OutputRange { index, value });
            }
            Ok((value / (0.5 + eps)).floor() >= 1.0)
        })
        .collect::<Result<Vec<bool>, _>>()
        .map(Assignment::new)
}

/// Per-node noise vectors fed through the input projection.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeNoise {
    pub var: DenseMatrix,
    pub clause: DenseMatrix,
}

impl NodeNoise {
    /// Unit-normal entries scaled by `scale`, deterministic in `seed`.
    pub fn sample(num_variables: usize, num_clauses: usize, channels: usize, scale: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |rows: usize| {
            let data = (0..rows * channels).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); scale * z }).collect::<Vec<f64>>();
            DenseMatrix::from_vec(rows, channels, data)
        };
        let var = draw(num_variables);
        let clause = draw(num_clauses);
        NodeNoise { var, clause }
    }

    pub fn for_instance(graph: &InstanceGraph, config: &ModelConfig, seed: u64) -> Self {
        NodeNoise::sample(graph.num_variables(), graph.num_clauses(), config.channels, config.noise_scale, seed)
    }
}

#[derive(Debug, Clone, Copy)]
struct AttnIds {
    q: ParamId,
    k: ParamId,
    v: ParamId,
}

#[derive(Debug, Clone, Copy)]
struct NormIds {
    gain: ParamId,
    bias: ParamId,
}

#[derive(Debug, Clone, Copy)]
struct AffineIds {
    w: ParamId,
    b: ParamId,
}

#[derive(Debug, Clone)]
struct EncoderSide {
    paths: [AttnIds; 4],
    merge: AffineIds,
    norm: NormIds,
}

#[derive(Debug, Clone)]
struct EncoderLayer {
    var: EncoderSide,
    clause: EncoderSide,
}

#[derive(Debug, Clone)]
struct DecoderSide {
    pos: AttnIds,
    neg: AttnIds,
    merge: AffineIds,
    norm1: NormIds,
    ffn1: AffineIds,
    ffn2: AffineIds,
    norm2: NormIds,
}

#[derive(Debug, Clone)]
struct DecoderLayer {
    clause: DecoderSide,
    var: DecoderSide,
}

#[derive(Debug, Clone)]
struct Layout {
    var_embedding: ParamId,
    clause_embedding: ParamId,
    input_projection: ParamId,
    encoders: Vec<EncoderLayer>,
    decoders: Vec<DecoderLayer>,
    readout: AffineIds,
}

/// How fresh parameter values are produced while laying out the model.
enum Init<'r> {
    Glorot(&'r mut ChaCha8Rng),
    Zeros,
}

struct Builder<'r> {
    store: ParamStore,
    init: Init<'r>,
}

impl Builder<'_> {
    fn weight(&mut self, name: String, fan_in: usize, fan_out: usize) -> ParamId {
        let value = match &mut self.init {
            Init::Glorot(rng) => {
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
                DenseMatrix::from_vec(fan_in, fan_out, (0..fan_in * fan_out).map(|_| dist.sample(&mut **rng)).collect())
            }
            Init::Zeros => DenseMatrix::zeros(fan_in, fan_out),
        };
        self.store.add(name, value)
    }

    fn bias(&mut self, name: String, width: usize) -> ParamId {
        self.store.add(name, DenseMatrix::zeros(1, width))
    }

    fn affine(&mut self, prefix: &str, fan_in: usize, fan_out: usize) -> AffineIds {
        AffineIds { w: self.weight(format!("{prefix}.w"), fan_in, fan_out), b: self.bias(format!("{prefix}.b"), fan_out) }
    }

    fn norm(&mut self, prefix: &str, width: usize) -> NormIds {
        let gain = match self.init {
            Init::Glorot(_) => DenseMatrix::filled(1, width, 1.0),
            Init::Zeros => DenseMatrix::zeros(1, width),
        };
        NormIds { gain: self.store.add(format!("{prefix}.gain"), gain), bias: self.bias(format!("{prefix}.bias"), width) }
    }

    fn attention(&mut self, prefix: &str, f: usize) -> AttnIds {
        AttnIds {
            q: self.weight(format!("{prefix}.q"), f, f),
            k: self.weight(format!("{prefix}.k"), f, f),
            v: self.weight(format!("{prefix}.v"), f, f),
        }
    }

    fn encoder_side(&mut self, prefix: &str, f: usize) -> EncoderSide {
        let paths = PathType::ALL.map(|t| self.attention(&format!("{prefix}.{}", t.label()), f));
        EncoderSide { paths, merge: self.affine(&format!("{prefix}.merge"), 4 * f, f), norm: self.norm(&format!("{prefix}.norm"), f) }
    }

    fn decoder_side(&mut self, prefix: &str, f: usize, hidden: usize) -> DecoderSide {
        DecoderSide {
            pos: self.attention(&format!("{prefix}.pos"), f),
            neg: self.attention(&format!("{prefix}.neg"), f),
            merge: self.affine(&format!("{prefix}.merge"), 2 * f, f),
            norm1: self.norm(&format!("{prefix}.norm1"), f),
            ffn1: self.affine(&format!("{prefix}.ffn1"), f, hidden),
            ffn2: self.affine(&format!("{prefix}.ffn2"), hidden, f),
            norm2: self.norm(&format!("{prefix}.norm2"), f),
        }
    }

    fn build(mut self, cfg: &ModelConfig) -> (ParamStore, Layout) {
        let f = cfg.channels;
        let var_embedding = self.weight("embed.var".into(), 1, f);
        let clause_embedding = self.weight("embed.clause".into(), 1, f);
        let input_projection = self.weight("input_projection".into(), f, f);
        let encoders = (0..cfg.num_encoder_layers)
            .map(|l| EncoderLayer {
                var: self.encoder_side(&format!("enc{l}.var"), f),
                clause: self.encoder_side(&format!("enc{l}.clause"), f),
            })
            .collect();
        // Decoder sides are named after the node kind they update.
        let decoders = (0..cfg.num_decoder_layers)
            .map(|l| DecoderLayer {
                clause: self.decoder_side(&format!("dec{l}.clause"), f, cfg.ffn_hidden),
                var: self.decoder_side(&format!("dec{l}.var"), f, cfg.ffn_hidden),
            })
            .collect();
        let readout = self.affine("readout", f, 1);
        (self.store, Layout { var_embedding, clause_embedding, input_projection, encoders, decoders, readout })
    }
}

/// Loss, soft outputs and parameter gradients from one forward/backward pass.
#[derive(Debug, Clone)]
pub struct Objective {
    pub loss: f64,
    pub outputs: VariableOutputs,
    pub gradients: Gradients,
}

#[derive(Debug, Clone)]
pub struct TrsatModel {
    config: ModelConfig,
    params: ParamStore,
    layout: Layout,
}

impl TrsatModel {
    pub fn new(config: ModelConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.init_seed);
        let (params, layout) = Builder { store: ParamStore::new(), init: Init::Glorot(&mut rng) }.build(&config);
        Ok(TrsatModel { config, params, layout })
    }

    /// Model with the given config and every parameter set to zero; used to
    /// obtain the expected names and shapes when loading.
    pub(crate) fn zeroed(config: ModelConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let (params, layout) = Builder { store: ParamStore::new(), init: Init::Zeros }.build(&config);
        Ok(TrsatModel { config, params, layout })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn num_parameters(&self) -> usize {
        self.params.num_scalars()
    }

    pub fn noise_for(&self, graph: &InstanceGraph, instance_seed: u64) -> NodeNoise {
        NodeNoise::for_instance(graph, &self.config, instance_seed)
    }

    /// Initial variable and clause features as tape nodes.
    pub fn initial_embeddings(
        &self,
        tape: &mut Tape<'_>,
        graph: &InstanceGraph,
        noise: &NodeNoise,
    ) -> Result<(NodeId, NodeId), ModelError> {
        let f = self.config.channels;
        for (expected, got) in [
            ((graph.num_variables(), f), noise.var.shape()),
            ((graph.num_clauses(), f), noise.clause.shape()),
        ] {
            if expected != got {
                return Err(ModelError::NoiseShape { expected, got });
            }
        }
        let proj = tape.param(self.layout.input_projection);
        let var_noise = tape.input(noise.var.clone());
        let clause_noise = tape.input(noise.clause.clone());
        let var_embedding = tape.param(self.layout.var_embedding);
        let clause_embedding = tape.param(self.layout.clause_embedding);
        let var = tape.affine(var_noise, proj, Some(var_embedding))?;
        let clause = tape.affine(clause_noise, proj, Some(clause_embedding))?;
        Ok((var, clause))
    }

    /// Records the forward pass onto `tape` (which must be built over a store
    /// laid out like this model's) and returns the n×1 output node.
    pub fn record<'a>(
        &self,
        tape: &mut Tape<'a>,
        graph: &'a InstanceGraph,
        noise: &NodeNoise,
    ) -> Result<NodeId, ModelError> {
        let heads = self.config.heads;
        let (mut var, mut clause) = self.initial_embeddings(tape, graph, noise)?;

        for layer in &self.layout.encoders {
            tape.mark("encoder");
            let v = encoder_side(tape, &layer.var, var, |t| graph.meta_paths.var_side.get(t), heads)?;
            let c = encoder_side(tape, &layer.clause, clause, |t| graph.meta_paths.clause_side.get(t), heads)?;
            var = v;
            clause = c;
        }

        let b = &graph.biadjacency;
        for layer in &self.layout.decoders {
            tape.mark("decoder");
            clause = cross_update(tape, &layer.clause, clause, var, [&graph.a_plus_t, &graph.a_minus_t], heads)?;
            var = cross_update(tape, &layer.var, var, clause, [&b.a_plus, &b.a_minus], heads)?;
            clause = feed_forward(tape, &layer.clause, clause)?;
            var = feed_forward(tape, &layer.var, var)?;
        }

        let w = tape.param(self.layout.readout.w);
        let bias = tape.param(self.layout.readout.b);
        let logits = tape.affine(var, w, Some(bias))?;
        Ok(tape.sigmoid(logits))
    }

    pub fn predict(&self, graph: &InstanceGraph, noise: &NodeNoise) -> Result<VariableOutputs, ModelError> {
        let mut tape = Tape::new(&self.params);
        let out = self.record(&mut tape, graph, noise)?;
        Ok(VariableOutputs { x: tape.value(out).data().to_vec() })
    }

    /// Builds the instance graph and noise, then predicts.
    pub fn predict_formula(&self, formula: &CnfFormula, instance_seed: u64) -> Result<VariableOutputs, ModelError> {
        let graph = InstanceGraph::build(formula.clone());
        let noise = self.noise_for(&graph, instance_seed);
        self.predict(&graph, &noise)
    }

    /// Smoothmax log-loss of the outputs computed with `params`.
    pub fn loss_with(&self, params: &ParamStore, graph: &InstanceGraph, noise: &NodeNoise) -> Result<f64, ModelError> {
        let mut tape = Tape::new(params);
        let out = self.record(&mut tape, graph, noise)?;
        let (loss, _) = neg_log_loss_with_grad(tape.value(out).data(), &graph.formula, self.config.tau)?;
        Ok(loss)
    }

    /// Forward and backward pass with `params` (laid out like this model's).
    pub fn objective_with(
        &self,
        params: &ParamStore,
        graph: &InstanceGraph,
        noise: &NodeNoise,
    ) -> Result<Objective, ModelError> {
        let mut tape = Tape::new(params);
        let out = self.record(&mut tape, graph, noise)?;
        let x = tape.value(out).data().to_vec();
        let (loss, grad) = neg_log_loss_with_grad(&x, &graph.formula, self.config.tau)?;
        let node = tape.scalar_fn(out, loss, DenseMatrix::from_vec(x.len(), 1, grad))?;
        let gradients = tape.backward(node, 1.0)?;
        Ok(Objective { loss, outputs: VariableOutputs { x }, gradients })
    }

    pub fn objective(&self, graph: &InstanceGraph, noise: &NodeNoise) -> Result<Objective, ModelError> {
        self.objective_with(&self.params, graph, noise)
    }

    pub(crate) fn from_parts(config: ModelConfig, params: ParamStore) -> Result<Self, ModelError> {
        let template = TrsatModel::zeroed(config)?;
        if params.len() != template.params.len() {
            return Err(ModelError::Checkpoint(format!(
                "{} parameters stored, config needs {}",
                params.len(),
                template.params.len()
            )));
        }
        for ((_, expected), (_, got)) in template.params.iter().zip(params.iter()) {
            if expected.name != got.name || expected.value.shape() != got.value.shape() {
                return Err(ModelError::Checkpoint(format!(
                    "parameter {} {:?} does not match expected {} {:?}",
                    got.name,
                    got.value.shape(),
                    expected.name,
                    expected.value.shape()
                )));
            }
        }
        Ok(TrsatModel { config: template.config, params, layout: template.layout })
    }
}

fn attend<'a>(
    tape: &mut Tape<'a>,
    ids: &AttnIds,
    queries: NodeId,
    sources: NodeId,
    topology: &'a crate::graph::SparseMatrix,
    heads: usize,
) -> Result<NodeId, NumericError> {
    let (wq, wk, wv) = (tape.param(ids.q), tape.param(ids.k), tape.param(ids.v));
    let q = tape.affine(queries, wq, None)?;
    let k = tape.affine(sources, wk, None)?;
    let v = tape.affine(sources, wv, None)?;
    tape.sparse_attention(q, k, v, topology, heads)
}

fn merge_residual_norm(
    tape: &mut Tape<'_>,
    merge: &AffineIds,
    norm: &NormIds,
    branches: &[NodeId],
    residual: NodeId,
) -> Result<NodeId, NumericError> {
    let cat = tape.concat(branches)?;
    let (w, b) = (tape.param(merge.w), tape.param(merge.b));
    let merged = tape.affine(cat, w, Some(b))?;
    let sum = tape.add(merged, residual)?;
    let (g, bias) = (tape.param(norm.gain), tape.param(norm.bias));
    tape.layer_norm(sum, g, bias)
}

fn encoder_side<'a>(
    tape: &mut Tape<'a>,
    side: &EncoderSide,
    h: NodeId,
    topology: impl Fn(PathType) -> &'a crate::graph::SparseMatrix,
    heads: usize,
) -> Result<NodeId, NumericError> {
    let mut branches = [h; 4];
    for (slot, (t, ids)) in branches.iter_mut().zip(PathType::ALL.iter().zip(&side.paths)) {
        *slot = attend(tape, ids, h, h, topology(*t), heads)?;
    }
    merge_residual_norm(tape, &side.merge, &side.norm, &branches, h)
}

fn cross_update<'a>(
    tape: &mut Tape<'a>,
    side: &DecoderSide,
    target: NodeId,
    source: NodeId,
    [pos, neg]: [&'a crate::graph::SparseMatrix; 2],
    heads: usize,
) -> Result<NodeId, NumericError> {
    let p = attend(tape, &side.pos, target, source, pos, heads)?;
    let n = attend(tape, &side.neg, target, source, neg, heads)?;
    merge_residual_norm(tape, &side.merge, &side.norm1, &[p, n], target)
}

fn feed_forward(tape: &mut Tape<'_>, side: &DecoderSide, h: NodeId) -> Result<NodeId, NumericError> {
    let (w1, b1) = (tape.param(side.ffn1.w), tape.param(side.ffn1.b));
    let hidden = tape.affine(h, w1, Some(b1))?;
    let hidden = tape.relu(hidden);
    let (w2, b2) = (tape.param(side.ffn2.w), tape.param(side.ffn2.b));
    let out = tape.affine(hidden, w2, Some(b2))?;
    let sum = tape.add(out, h)?;
    let (g, b) = (tape.param(side.norm2.gain), tape.param(side.norm2.bias));
    tape.layer_norm(sum, g, b)
}
