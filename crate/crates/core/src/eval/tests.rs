use super::*;
use crate::corpus::CorpusSpan;
use crate::error::Error;
use crate::model::{Encoder, EncoderConfig, NormStyle, Precision, Vocabulary};
use crate::synth::{leakage_task, semantic_change_corpus};
use crate::timepoint::{Granularity, TimePoint};

fn toy_encoder(vocab: &Vocabulary, classes: usize) -> Encoder {
    Encoder::new(EncoderConfig {
        layers: 1,
        hidden_dim: 32,
        heads: 2,
        ffn_dim: 64,
        max_len: 32,
        vocab_size: vocab.len(),
        dd_classes: classes,
        dropout: 0.0,
        seed: 5,
        norm: NormStyle::Pre,
        precision: Precision::F32,
        classifier_classes: 0,
        init_std: 0.1,
    })
    .unwrap()
}

fn leakage(n: usize, seed: u64) -> (Vec<LabeledInstance>, CorpusSpan) {
    let span = CorpusSpan::from_years(1987, 2007).unwrap();
    let data = leakage_task(n, 1987, 2007, seed)
        .iter()
        .map(|r| LabeledInstance::from_record(r, &span, Granularity::Year).unwrap())
        .collect();
    (data, span)
}

#[test]
fn single_class_is_trivially_perfect() {
    let (data, _) = leakage(20, 1);
    let data: Vec<_> = data.into_iter().map(|mut x| {
        x.gold.index = 0;
        x
    }).collect();
    let vocab = Vocabulary::build(data.iter().map(|x| x.text.as_str()), 60).unwrap();
    let cfg = FinetuneConfig { grid: FinetuneGrid { batch_sizes: vec![8], learning_rates: vec![1e-3], epochs: vec![1] }, ..Default::default() };
    let out = finetune_classifier(&toy_encoder(&vocab, 1), &vocab, &data, &data, 1, &cfg).unwrap();
    assert_eq!(out.best.val_acc, 100.0);
    assert!(matches!(finetune_classifier(&toy_encoder(&vocab, 1), &vocab, &[], &data, 1, &cfg), Err(Error::Config(_))));
}

#[test]
fn finetuning_is_deterministic_and_learns_leakage() {
    let (data, span) = leakage(240, 2);
    let (train, val) = data.split_at(200);
    let texts: Vec<String> = data.iter().map(|x| x.text.clone()).chain((1987..=2007).map(|y| y.to_string())).collect();
    let vocab = Vocabulary::build(texts.iter().map(String::as_str), 120).unwrap();
    let classes = span.class_count(Granularity::Year);
    let cfg = FinetuneConfig {
        grid: FinetuneGrid { batch_sizes: vec![16], learning_rates: vec![3e-3, 1e-3], epochs: vec![4, 8] },
        max_len: 32,
        seed: 3,
        ..Default::default()
    };
    let base = toy_encoder(&vocab, 4);
    let a = finetune_classifier(&base, &vocab, train, val, classes, &cfg).unwrap();
    let b = finetune_classifier(&base, &vocab, train, val, classes, &cfg).unwrap();
    assert_eq!(a.best, b.best);
    assert_eq!(a.trials.len(), 4);
    assert_eq!(a.encoder.params, b.encoder.params);
    assert!(a.best.val_acc > 90.0, "{:?}", a.trials);
    let report = evaluate_classifier(&a.encoder, &vocab, val, 32).unwrap();
    assert_eq!(report.acc, a.best.val_acc);

    // zero-shot similarity with the tuned encoder returns a full ranking
    let years = year_vocabulary(1987, 2007);
    let ranking = zero_shot_similarity(&a.encoder, &vocab, &val[0].text, &years, 32).unwrap();
    assert_eq!(ranking.len(), 21);
    assert!(matches!(zero_shot_similarity(&a.encoder, &vocab, "x", &[], 32), Err(Error::Config(_))));

    // time scope contract on a month classifier
    let months = CorpusSpan::from_months((1994, 1), (1994, 12)).unwrap();
    let month_model = base.with_classifier(12).unwrap();
    let (s, e) = estimate_time_scope(&month_model, &vocab, "when was the strike", None, &months, 32).unwrap();
    assert!(s.to_date() <= e.to_date());
    assert!(estimate_time_scope(&a.encoder, &vocab, "x", None, &months, 32).is_err());
}

#[test]
fn zero_shot_self_similarity_is_maximal() {
    let vocab = Vocabulary::build(["1990 1991 1992 1993 1994 1995"], 40).unwrap();
    let enc = toy_encoder(&vocab, 2);
    let years = year_vocabulary(1990, 1995);
    let ranking = zero_shot_similarity(&enc, &vocab, "1994", &years, 16).unwrap();
    assert_eq!(ranking[0].0, TimePoint::year(1994));
    assert!((ranking[0].1 - 1.0).abs() < 1e-9);
}

#[test]
fn semantic_change_orders_words() {
    let (t1, t2, gold) = semantic_change_corpus(4);
    let vocab = Vocabulary::build(t1.iter().chain(&t2).map(String::as_str), 120).unwrap();
    let enc = toy_encoder(&vocab, 2);
    let score = |w: &str| semantic_change_score(&enc, &vocab, w, &t1, &t2, 32).unwrap();
    let plane = score("plane");
    let chairman = score("chairman");
    assert!(chairman.abs() < 1e-12);
    assert!(plane > chairman);
    for (w, _) in &gold {
        let s = score(w);
        assert!((0.0..=2.0).contains(&s));
    }
    assert_eq!(semantic_change_score(&enc, &vocab, "plane", &t1, &t1, 32).unwrap().abs() < 1e-12, true);
    assert!(matches!(
        semantic_change_score(&enc, &vocab, "zebra", &t1, &t2, 32),
        Err(Error::MissingOccurrences { period: 1, .. })
    ));
    let scores: Vec<f64> = gold.iter().map(|(w, _)| score(w)).collect();
    let golds: Vec<f64> = gold.iter().map(|g| g.1).collect();
    let (p, s) = correlate_with_gold(&scores, &golds).unwrap();
    assert!((-1.0..=1.0).contains(&p) && (-1.0..=1.0).contains(&s));
}

#[test]
fn retrieval_attaches_best_document() {
    let span = CorpusSpan::from_years(1990, 1999).unwrap();
    let rec = TaskRecord { text: "the harbor strike".into(), time: "1994".into(), context_timestamp: None, context_text: None };
    let mut xs = vec![LabeledInstance::from_record(&rec, &span, Granularity::Year).unwrap()];
    let corpus = vec![
        ("1990-01-01".to_string(), "a festival in the valley".to_string()),
        ("1994-03-02".to_string(), "dock workers strike at the harbor".to_string()),
    ];
    attach_retrieved_context(&mut xs, &corpus);
    assert_eq!(xs[0].context.as_ref().unwrap().timestamp, "1994-03-02");
}
