use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormStyle {
    /// LayerNorm after each residual addition (original BERT).
    Post,
    /// LayerNorm before each sublayer, plus a final LayerNorm.
    Pre,
}

/// Arithmetic mode for parameters. `F32` rounds every parameter to the
/// nearest 32-bit float after initialization and after every update, so
/// checkpoints (stored as f32) round-trip exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    F64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub layers: usize,
    pub hidden_dim: usize,
    pub heads: usize,
    pub ffn_dim: usize,
    pub max_len: usize,
    pub vocab_size: usize,
    pub dd_classes: usize,
    pub dropout: f64,
    pub seed: u64,
    pub norm: NormStyle,
    pub precision: Precision,
    /// Width of the fine-tuning classifier head; 0 when absent.
    #[serde(default)]
    pub classifier_classes: usize,
    #[serde(default = "default_init_std")]
    pub init_std: f64,
}

fn default_init_std() -> f64 {
    0.02
}

impl EncoderConfig {
    /// Named presets: `tiny` (gradient checks), `desk` (synthetic corpora),
    /// `base` (BERT-base shape; kept for reference).
    pub fn preset(name: &str, vocab_size: usize, dd_classes: usize) -> Result<Self> {
        let (layers, hidden_dim, heads, ffn_dim, max_len) = match name {
            "tiny" => (2, 32, 2, 64, 64),
            "small" => (2, 64, 4, 128, 64),
            "desk" => (2, 128, 4, 512, 128),
            "base" => (12, 768, 12, 3072, 512),
            other => return Err(Error::Config(format!("unknown encoder preset {other:?}"))),
        };
        let cfg = EncoderConfig {
            layers,
            hidden_dim,
            heads,
            ffn_dim,
            max_len,
            vocab_size,
            dd_classes,
            dropout: 0.1,
            seed: 0,
            norm: NormStyle::Post,
            precision: Precision::F32,
            classifier_classes: 0,
            init_std: default_init_std(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.heads == 0 || self.hidden_dim == 0 || self.hidden_dim % self.heads != 0 {
            return fail(format!("hidden_dim {} must be a positive multiple of heads {}", self.hidden_dim, self.heads));
        }
        if !(2..=512).contains(&self.max_len) {
            return fail(format!("max_len {} must lie in 2..=512", self.max_len));
        }
        if self.vocab_size == 0 || self.ffn_dim == 0 {
            return fail("vocab_size and ffn_dim must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout {} must lie in [0, 1)", self.dropout));
        }
        if !(self.init_std > 0.0) {
            return fail("init_std must be positive".into());
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.hidden_dim / self.heads
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for p in ["tiny", "small", "desk", "base"] {
            EncoderConfig::preset(p, 300, 12).unwrap();
        }
        assert!(EncoderConfig::preset("huge", 300, 12).is_err());
    }

    #[test]
    fn rejects_bad_shapes() {
        let mut c = EncoderConfig::preset("tiny", 300, 12).unwrap();
        c.heads = 3;
        assert!(c.validate().is_err());
        c.heads = 2;
        c.max_len = 1;
        assert!(c.validate().is_err());
        c.max_len = 513;
        assert!(c.validate().is_err());
    }
}
