//! Fine-tuning, metrics, semantic change, zero-shot similarity, time-scope
//! estimation and retrieval.

mod baseline;
pub mod bm25;
mod dataset;
mod finetune;
mod metrics;
mod semantic;
mod similarity;
mod timescope;

#[cfg(test)]
mod tests;

pub use baseline::{random_guess_baseline, uniform_golds};
pub use bm25::Bm25Index;
pub use dataset::{encode_input, load_shift_gold, load_task, task_span, Context, LabeledInstance, TaskRecord};
pub use finetune::{
    class_probabilities, evaluate_classifier, finetune_classifier, predict, FinetuneConfig, FinetuneGrid, FinetuneOutcome,
    GridPoint,
};
pub use metrics::{
    accuracy, average_precision, average_ranks, first_relevant_rank, mean_absolute_error, mean_average_precision,
    mean_reciprocal_rank, pearson, spearman, welch_ttest, MetricReport, TTest,
};
pub use semantic::{correlate_with_gold, cosine, semantic_change_score, word_representation};
pub use similarity::{cls_state, rank_by_cosine, year_vocabulary, zero_shot_similarity};
pub use timescope::{estimate_time_scope, scope_from_probabilities, scope_indices};

/// Attach the top BM25 document of `corpus` (by `(timestamp, text)`) to
/// every instance as context.
pub fn attach_retrieved_context(instances: &mut [LabeledInstance], corpus: &[(String, String)]) {
    let index = Bm25Index::new(corpus.iter().map(|(_, t)| t.as_str()));
    for x in instances.iter_mut() {
        if let Some(&(i, _)) = index.top_k(&x.text, 1).first() {
            x.context = Some(Context { timestamp: corpus[i].0.clone(), text: corpus[i].1.clone() });
        }
    }
}
