//! Time-aware encoder pre-training pipeline.
//!
//! Documents flow through [`annotate`] (temporal tagging), [`corpus`]
//! (refinement, entity calendars, time labels), [`objectives`] (masked and
//! replacement training examples), [`model`] (vocabulary, encoder, training)
//! and [`eval`] (fine-tuning, metrics and analysis tools).

pub mod annotate;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod model;
pub mod objectives;
pub mod rng;
pub mod synth;
pub mod timepoint;

pub use error::{Error, Result};
pub use timepoint::{Granularity, TimePoint};
