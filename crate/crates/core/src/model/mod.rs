//! Vocabulary, transformer encoder, task heads, optimizer and checkpoints.

mod checkpoint;
mod config;
mod encoder;
mod heads;
mod optim;
mod params;
mod train;
mod vocab;


pub use checkpoint::{EncoderCheckpoint, FORMAT_VERSION, MAGIC};
pub use config::{EncoderConfig, NormStyle, Precision};
pub use encoder::{softmax, Encoder, ForwardCache};
pub use heads::{joint_loss, HeadOutputs, LossBreakdown, Sample, Supervision};
pub use optim::{batch_gradient, train_step, AdamW, AdamWConfig};
pub use params::{init_params, LayerIx, Layout, LinearIx, NormIx, ParamSet};
pub use train::{pretrain, PretrainConfig, StepLog};
pub use vocab::{SpecialIds, VocabData, Vocabulary, CLS, MASK, PAD, SEP, SPECIAL_TOKENS, UNK};
