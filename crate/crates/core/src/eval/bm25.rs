use std::collections::HashMap;

use crate::annotate::tokenize_raw;

pub const K1: f64 = 1.2;
pub const B: f64 = 0.75;

/// Okapi BM25 over lower-cased word tokens.
#[derive(Debug, Clone)]
pub struct Bm25Index {
    docs: Vec<HashMap<String, usize>>,
    lengths: Vec<f64>,
    avg_len: f64,
    df: HashMap<String, usize>,
}

fn terms(text: &str) -> Vec<String> {
    tokenize_raw(text)
        .into_iter()
        .filter(|t| t.text.chars().any(char::is_alphanumeric))
        .map(|t| t.text.to_lowercase())
        .collect()
}

impl Bm25Index {
    pub fn new<'a>(docs: impl IntoIterator<Item = &'a str>) -> Self {
        let mut index = Bm25Index { docs: Vec::new(), lengths: Vec::new(), avg_len: 0.0, df: HashMap::new() };
        for text in docs {
            let ts = terms(text);
            let mut tf: HashMap<String, usize> = HashMap::new();
            for t in &ts {
                *tf.entry(t.clone()).or_default() += 1;
            }
            for t in tf.keys() {
                *index.df.entry(t.clone()).or_default() += 1;
            }
            index.lengths.push(ts.len() as f64);
            index.docs.push(tf);
        }
        let n = index.docs.len().max(1) as f64;
        index.avg_len = index.lengths.iter().sum::<f64>() / n;
        index
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    fn idf(&self, term: &str) -> f64 {
        let n = self.docs.len() as f64;
        let df = *self.df.get(term).unwrap_or(&0) as f64;
        ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
    }

    pub fn scores(&self, query: &str) -> Vec<f64> {
        let q = terms(query);
        let avg = if self.avg_len > 0.0 { self.avg_len } else { 1.0 };
        self.docs
            .iter()
            .zip(&self.lengths)
            .map(|(tf, &len)| {
                q.iter()
                    .map(|t| {
                        let f = *tf.get(t).unwrap_or(&0) as f64;
                        if f == 0.0 {
                            return 0.0;
                        }
                        self.idf(t) * f * (K1 + 1.0) / (f + K1 * (1.0 - B + B * len / avg))
                    })
                    .sum()
            })
            .collect()
    }

    /// Best `k` documents by score; ties go to the lower index.
    pub fn top_k(&self, query: &str, k: usize) -> Vec<(usize, f64)> {
        let mut ranked: Vec<(usize, f64)> = self.scores(query).into_iter().enumerate().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(k);
        ranked
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_hand_computed_score() {
        let idx = Bm25Index::new(["the cat sat", "the dog sat down today", "birds"]);
        let s = idx.scores("cat");
        // N=3, df=1: idf = ln(2.5/1.5 + 1); avg len 3, len 3
        let idf = (2.5f64 / 1.5 + 1.0).ln();
        let expect = idf * 2.2 / (1.0 + 1.2);
        assert!((s[0] - expect).abs() < 1e-12);
        assert_eq!(s[1], 0.0);
        assert_eq!(idx.top_k("sat", 2).iter().map(|x| x.0).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn ties_prefer_earlier_documents() {
        let idx = Bm25Index::new(["same words", "same words"]);
        assert_eq!(idx.top_k("words", 1)[0].0, 0);
        assert_eq!(idx.top_k("zzz", 2).iter().map(|x| x.0).collect::<Vec<_>>(), vec![0, 1]);
    }
}
