//! Self-supervised training: one Adam step per instance on the smoothmax
//! log-loss, with a warmup/inverse-square-root learning rate.

mod adam;
mod dataset;

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use adam::{AdamState, ADAM_EPS, BETA1, BETA2};
pub use dataset::{load_dataset, write_dataset, DatasetError};

use crate::cnf::{count_satisfied, CnfFormula};
use crate::graph::InstanceGraph;
use crate::model::{save_checkpoint, ModelConfig, ModelError, NodeNoise, TrsatModel};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("non-finite gradient for parameter {param} at step {step}")]
    NonFiniteGradient { param: String, step: u64 },
    #[error("gradient shape does not match parameter {param}")]
    GradientShape { param: String },
    #[error("non-finite loss at epoch {epoch}, instance {instance}")]
    NonFiniteLoss { epoch: usize, instance: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// `d^-0.5 · min(step^-0.5, step · warmup^-1.5)`, peaking at `step = warmup`.
///
/// # Panics
/// If `step` or `warmup` is zero.
pub fn noam_lr(step: u64, d: usize, warmup: u64) -> f64 {
    assert!(step >= 1 && warmup >= 1, "step and warmup start at 1");
    let s = step as f64;
    (d as f64).powf(-0.5) * s.powf(-0.5).min(s * (warmup as f64).powf(-1.5))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub warmup_steps: u64,
    /// Multiplier on the schedule.
    pub lr_factor: f64,
    pub shuffle_seed: u64,
    /// Base seed of the per-instance noise; instance `i` uses `noise_seed + i`.
    pub noise_seed: u64,
    /// Draw fresh noise every epoch instead of keeping one draw per instance.
    pub resample_noise: bool,
    /// Write `epoch_NNNN.ckpt` into `checkpoint_dir` every this many epochs.
    pub checkpoint_every: Option<usize>,
    pub checkpoint_dir: Option<PathBuf>,
    /// Fraction held out for validation when no explicit split is given.
    pub validation_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 500,
            warmup_steps: 400,
            lr_factor: 1.0,
            shuffle_seed: 0,
            noise_seed: 0,
            resample_noise: false,
            checkpoint_every: None,
            checkpoint_dir: None,
            validation_fraction: 0.2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.warmup_steps == 0 {
            return bad("warmup_steps must be at least 1");
        }
        if !(self.lr_factor > 0.0 && self.lr_factor.is_finite()) {
            return bad("lr_factor must be positive");
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad("validation_fraction must be in [0, 1)");
        }
        if self.checkpoint_every == Some(0) {
            return bad("checkpoint_every must be at least 1");
        }
        if self.checkpoint_every.is_some() && self.checkpoint_dir.is_none() {
            return bad("checkpoint_every needs checkpoint_dir");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub train_rate: f64,
    pub val_rate: Option<f64>,
    pub lr: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
}

impl TrainHistory {
    /// `epoch,loss,train_rate,val_rate,lr`; `val_rate` is empty without a validation set.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,loss,train_rate,val_rate,lr\n");
        for r in &self.records {
            let val = r.val_rate.map(|v| format!("{v:.6}")).unwrap_or_default();
            let _ = writeln!(s, "{},{:.9},{:.6},{},{:.9e}", r.epoch, r.loss, r.train_rate, val, r.lr);
        }
        s
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }
}

/// Per-instance completion rates with their mean and population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    pub rates: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub fully_satisfied: usize,
}

impl EvalSummary {
    pub fn from_rates(rates: Vec<f64>) -> Self {
        let n = rates.len().max(1) as f64;
        let mean = rates.iter().sum::<f64>() / n;
        let var = rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
        let fully_satisfied = rates.iter().filter(|&&r| r == 1.0).count();
        EvalSummary { rates, mean, std: var.sqrt(), fully_satisfied }
    }
}

/// A formula with its cached graph and noise seed.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: InstanceGraph,
    pub seed: u64,
}

impl Instance {
    pub fn new(formula: CnfFormula, seed: u64) -> Self {
        Instance { graph: InstanceGraph::build(formula), seed }
    }

    /// Instances seeded `base, base + 1, ...` in order.
    pub fn many(formulas: &[CnfFormula], base: u64) -> Vec<Instance> {
        formulas.iter().enumerate().map(|(i, f)| Instance::new(f.clone(), base.wrapping_add(i as u64))).collect()
    }
}

/// Completion rate of the thresholded output for one instance.
pub fn completion_rate(model: &TrsatModel, instance: &Instance) -> Result<f64, TrainError> {
    let noise = model.noise_for(&instance.graph, instance.seed);
    let out = model.predict(&instance.graph, &noise)?;
    rate_of(model, &instance.graph.formula, &out.x)
}

fn rate_of(model: &TrsatModel, f: &CnfFormula, x: &[f64]) -> Result<f64, TrainError> {
    let assignment = crate::model::threshold(x, model.config().epsilon_threshold)?;
    Ok(count_satisfied(f, &assignment).expect("output length matches the formula").completion_rate)
}

pub fn evaluate_instances(model: &TrsatModel, instances: &[Instance]) -> Result<EvalSummary, TrainError> {
    if instances.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let rates = instances.iter().map(|i| completion_rate(model, i)).collect::<Result<Vec<_>, _>>()?;
    Ok(EvalSummary::from_rates(rates))
}

/// Evaluates formulas with noise seeds `seed_base + i`.
pub fn evaluate(model: &TrsatModel, formulas: &[CnfFormula], seed_base: u64) -> Result<EvalSummary, TrainError> {
    evaluate_instances(model, &Instance::many(formulas, seed_base))
}

/// Splits off a seeded `validation_fraction` of the instances, then trains.
pub fn train(
    dataset: &[CnfFormula],
    cfg: &TrainConfig,
    model_cfg: ModelConfig,
) -> Result<(TrsatModel, TrainHistory), TrainError> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.shuffle_seed ^ SPLIT_SALT));
    let n_val = ((dataset.len() as f64) * cfg.validation_fraction).floor() as usize;
    let n_val = n_val.min(dataset.len() - 1);
    let (val_idx, train_idx) = order.split_at(n_val);
    let pick = |idx: &[usize]| idx.iter().map(|&i| dataset[i].clone()).collect::<Vec<_>>();
    train_with_validation(&pick(train_idx), &pick(val_idx), cfg, model_cfg)
}

/// Keeps the split permutation independent of the per-epoch shuffle stream.
const SPLIT_SALT: u64 = 0x5eed_0517;

pub fn train_with_validation(
    train_set: &[CnfFormula],
    validation: &[CnfFormula],
    cfg: &TrainConfig,
    model_cfg: ModelConfig,
) -> Result<(TrsatModel, TrainHistory), TrainError> {
    let mut model = TrsatModel::new(model_cfg)?;
    let history = train_model(&mut model, train_set, validation, cfg)?;
    Ok((model, history))
}

/// Trains an existing model in place.
pub fn train_model(
    model: &mut TrsatModel,
    train_set: &[CnfFormula],
    validation: &[CnfFormula],
    cfg: &TrainConfig,
) -> Result<TrainHistory, TrainError> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let train_instances = Instance::many(train_set, cfg.noise_seed);
    let val_instances = Instance::many(validation, cfg.noise_seed.wrapping_add(train_set.len() as u64));
    let fixed_noise: Vec<NodeNoise> =
        if cfg.resample_noise { Vec::new() } else { train_instances.iter().map(|i| model.noise_for(&i.graph, i.seed)).collect() };
    let mut adam = AdamState::new(model.params());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.shuffle_seed);
    let mut order: Vec<usize> = (0..train_instances.len()).collect();
    let mut history = TrainHistory::default();
    let d = model.config().channels;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let (mut loss_sum, mut rate_sum, mut lr) = (0.0, 0.0, 0.0);
        for &i in &order {
            let inst = &train_instances[i];
            let resampled;
            let noise = if cfg.resample_noise {
                let seed = inst.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(epoch as u64);
                resampled = model.noise_for(&inst.graph, seed);
                &resampled
            } else {
                &fixed_noise[i]
            };
            let obj = model.objective(&inst.graph, noise)?;
            if !obj.loss.is_finite() {
                return Err(TrainError::NonFiniteLoss { epoch, instance: i });
            }
            loss_sum += obj.loss;
            rate_sum += rate_of(model, &inst.graph.formula, &obj.outputs.x)?;
            lr = cfg.lr_factor * noam_lr(adam.step_count() + 1, d, cfg.warmup_steps);
            adam.step(model.params_mut(), &obj.gradients, lr)?;
        }
        let n = train_instances.len() as f64;
        let val_rate = if val_instances.is_empty() { None } else { Some(evaluate_instances(model, &val_instances)?.mean) };
        let record = EpochRecord { epoch, loss: loss_sum / n, train_rate: rate_sum / n, val_rate, lr };
        log::info!(
            "epoch {epoch}: loss {:.4} train {:.4} val {} lr {:.3e}",
            record.loss,
            record.train_rate,
            val_rate.map_or("-".to_string(), |v| format!("{v:.4}")),
            lr
        );
        history.records.push(record);
        if let (Some(every), Some(dir)) = (cfg.checkpoint_every, &cfg.checkpoint_dir) {
            if epoch % every == 0 || epoch == cfg.epochs {
                std::fs::create_dir_all(dir)?;
                save_checkpoint(model, dir.join(format!("epoch_{epoch:04}.ckpt")))?;
            }
        }
    }
    Ok(history)
}
