use std::fmt::Write as _;

use super::ModelError;

/// Architecture and objective hyper-parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub num_encoder_layers: usize,
    pub num_decoder_layers: usize,
    pub channels: usize,
    pub heads: usize,
    pub ffn_hidden: usize,
    /// Smoothmax temperature.
    pub tau: f64,
    pub epsilon_threshold: f64,
    /// Standard deviation of the per-node input noise.
    pub noise_scale: f64,
    pub init_seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            num_encoder_layers: 4,
            num_decoder_layers: 4,
            channels: 64,
            heads: 4,
            ffn_hidden: 256,
            tau: 5.0,
            epsilon_threshold: 0.01,
            noise_scale: 1.0,
            init_seed: 0,
        }
    }
}

const KEYS: [&str; 9] = [
    "num_encoder_layers",
    "num_decoder_layers",
    "channels",
    "heads",
    "ffn_hidden",
    "tau",
    "epsilon_threshold",
    "noise_scale",
    "init_seed",
];

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidConfig(msg));
        for (name, v) in [
            ("num_encoder_layers", self.num_encoder_layers),
            ("num_decoder_layers", self.num_decoder_layers),
            ("channels", self.channels),
            ("heads", self.heads),
            ("ffn_hidden", self.ffn_hidden),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        if self.channels % self.heads != 0 {
            return bad(format!("channels {} not divisible by heads {}", self.channels, self.heads));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau {} must be positive", self.tau));
        }
        if !(self.epsilon_threshold > 0.0 && self.epsilon_threshold < 0.5) {
            return bad(format!("epsilon_threshold {} outside (0, 0.5)", self.epsilon_threshold));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return bad(format!("noise_scale {} must be non-negative", self.noise_scale));
        }
        Ok(())
    }

    /// `key = value` lines, one per field.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            let _ = writeln!(s, "{key} = {}", self.get(key).expect("known key"));
        }
        s
    }

    /// Parses `key = value` lines over the defaults. Blank lines and `#`
    /// comments are ignored; unknown keys are errors.
    pub fn from_text(text: &str) -> Result<Self, ModelError> {
        let mut cfg = ModelConfig::default();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ModelError::InvalidConfig(format!("expected key = value, got `{line}`")))?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "num_encoder_layers" => self.num_encoder_layers.to_string(),
            "num_decoder_layers" => self.num_decoder_layers.to_string(),
            "channels" => self.channels.to_string(),
            "heads" => self.heads.to_string(),
            "ffn_hidden" => self.ffn_hidden.to_string(),
            "tau" => format!("{:?}", self.tau),
            "epsilon_threshold" => format!("{:?}", self.epsilon_threshold),
            "noise_scale" => format!("{:?}", self.noise_scale),
            "init_seed" => self.init_seed.to_string(),
            _ => return None,
        })
    }

    /// Sets one field from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ModelError> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ModelError> {
            value.parse().map_err(|_| ModelError::InvalidConfig(format!("bad value `{value}` for {key}")))
        }
        match key {
            "num_encoder_layers" => self.num_encoder_layers = parse(key, value)?,
            "num_decoder_layers" => self.num_decoder_layers = parse(key, value)?,
            "channels" => self.channels = parse(key, value)?,
            "heads" => self.heads = parse(key, value)?,
            "ffn_hidden" => self.ffn_hidden = parse(key, value)?,
            "tau" => self.tau = parse(key, value)?,
            "epsilon_threshold" => self.epsilon_threshold = parse(key, value)?,
            "noise_scale" => self.noise_scale = parse(key, value)?,
            "init_seed" => self.init_seed = parse(key, value)?,
            _ => return Err(ModelError::InvalidConfig(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Whether `key` names a field of this config.
    pub fn has_key(key: &str) -> bool {
        KEYS.contains(&key)
    }
}
