use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Evaluation summary. `acc` is a percentage; `mae` is in label units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub acc: f64,
    pub mae: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pearson: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spearman: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mrr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
}

fn paired<T>(a: &[T], b: &[T]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::Config(format!("{} predictions for {} gold labels", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::EmptyEval);
    }
    Ok(a.len())
}

/// Percentage of exact matches.
pub fn accuracy(preds: &[usize], golds: &[usize]) -> Result<f64> {
    let n = paired(preds, golds)?;
    let hits = preds.iter().zip(golds).filter(|(p, g)| p == g).count();
    Ok(100.0 * hits as f64 / n as f64)
}

/// Mean absolute difference of class indices.
pub fn mean_absolute_error(preds: &[usize], golds: &[usize]) -> Result<f64> {
    let n = paired(preds, golds)?;
    let total: f64 = preds.iter().zip(golds).map(|(&p, &g)| (p as f64 - g as f64).abs()).sum();
    Ok(total / n as f64)
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = paired(x, y)?;
    if n < 2 {
        return Err(Error::DegenerateInput("correlation needs at least two points".into()));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateInput("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of their ranks.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    paired(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Mean reciprocal rank from the 1-based rank of the first relevant item of
/// each query; `None` marks a query with no relevant item.
pub fn mean_reciprocal_rank(ranks: &[Option<usize>]) -> Result<f64> {
    if ranks.is_empty() {
        return Err(Error::EmptyEval);
    }
    let mut total = 0.0;
    for (q, r) in ranks.iter().enumerate() {
        match r {
            Some(r) if *r >= 1 => total += 1.0 / *r as f64,
            _ => return Err(Error::UndefinedMetric(format!("query {q} has no relevant item"))),
        }
    }
    Ok(total / ranks.len() as f64)
}

/// Rank of the first relevant entry of a ranked relevance list.
pub fn first_relevant_rank(relevance: &[bool]) -> Option<usize> {
    relevance.iter().position(|&r| r).map(|i| i + 1)
}

/// Average precision of one ranked relevance list.
pub fn average_precision(relevance: &[bool]) -> Result<f64> {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, &rel) in relevance.iter().enumerate() {
        if rel {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    if hits == 0 {
        return Err(Error::UndefinedMetric("ranking has no relevant item".into()));
    }
    Ok(sum / hits as f64)
}

pub fn mean_average_precision(lists: &[Vec<bool>]) -> Result<f64> {
    if lists.is_empty() {
        return Err(Error::EmptyEval);
    }
    let mut total = 0.0;
    for l in lists {
        total += average_precision(l)?;
    }
    Ok(total / lists.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0))
}

/// Two-sided Welch (unequal variance) t-test.
pub fn welch_ttest(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::DegenerateInput("t-test needs at least two samples per group".into()));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / a.len() as f64, vb / b.len() as f64);
    let se2 = sa + sb;
    if se2 == 0.0 {
        return Ok(if ma == mb {
            TTest { t: 0.0, df: f64::INFINITY, p_value: 1.0 }
        } else {
            TTest { t: (ma - mb).signum() * f64::INFINITY, df: f64::INFINITY, p_value: 0.0 }
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::DegenerateInput(e.to_string()))?;
    let p_value = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(TTest { t, df, p_value })
}
