//! Shared fixtures for the criterion benches.

use trsat_core::generators::gen_random_3sat;
use trsat_core::{CnfFormula, ModelConfig};

/// Random 3-SAT at a clause/variable ratio of 4.3.
pub fn rand3(n: usize, seed: u64) -> CnfFormula {
    let m = (n as f64 * 4.3).round() as usize;
    gen_random_3sat(n, m, seed).expect("valid sizes")
}

/// A narrow model that keeps forward-pass benches short.
pub fn small_model_config() -> ModelConfig {
    ModelConfig {
        num_encoder_layers: 2,
        num_decoder_layers: 2,
        channels: 32,
        heads: 4,
        ffn_hidden: 64,
        ..ModelConfig::default()
    }
}
