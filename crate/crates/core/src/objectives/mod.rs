//! Training-example construction: span-first masking, entity and signal
//! replacement, and document-dating labels.

mod encoded;
mod example;
mod replace;
mod sampling;
#[cfg(test)]
mod tests;

pub use encoded::{Edit, EncodedDoc};
pub use example::{
    build_examples, build_training_example, ExampleConfig, ExampleContext, ExampleTrace, Objective, ObjectiveSet,
    SpanTarget, TrainingExample,
};
pub use replace::{apply_trwr, apply_tser, ReplacementDecision, ReplacementLabel};
pub use sampling::{
    apply_mask_policy, ceil_count, sample_etamlm, sample_masks, sample_tsemlm, ChosenSpans, MaskAction, MaskDecision,
    MaskRates, MaskSource,
};
