use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::encoder::{softmax, Encoder};
use super::params::{LinearIx, ParamSet};
use crate::error::{Error, Result};
use crate::objectives::{SpanTarget, TrainingExample};

/// Targets attached to one input sequence. Absent tasks contribute no loss.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Supervision {
    pub mlm: Vec<(usize, u32)>,
    pub dd: Option<usize>,
    pub tser: Vec<SpanTarget>,
    pub trwr: Vec<SpanTarget>,
    /// Fine-tuning class over position 0.
    pub label: Option<usize>,
}

/// An input sequence with its targets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub ids: Vec<u32>,
    pub targets: Supervision,
}

impl From<&TrainingExample> for Sample {
    fn from(e: &TrainingExample) -> Self {
        Sample {
            ids: e.input_ids.clone(),
            targets: Supervision {
                mlm: e.mlm_targets.clone(),
                dd: e.dd_index,
                tser: e.tser.clone(),
                trwr: e.trwr.clone(),
                label: None,
            },
        }
    }
}

/// Raw logits of every head that has targets.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadOutputs {
    /// `[|mlm targets| × vocab]`
    pub mlm: Array2<f64>,
    pub dd: Option<Array1<f64>>,
    /// `[|tser spans| × 2]`
    pub tser: Array2<f64>,
    pub trwr: Array2<f64>,
    pub classifier: Option<Array1<f64>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub mlm: f64,
    pub dd: f64,
    pub tser: f64,
    pub trwr: f64,
    pub classifier: f64,
}

impl LossBreakdown {
    pub fn total(&self) -> f64 {
        self.mlm + self.dd + self.tser + self.trwr + self.classifier
    }

    pub(crate) fn add(&mut self, o: &LossBreakdown) {
        self.mlm += o.mlm;
        self.dd += o.dd;
        self.tser += o.tser;
        self.trwr += o.trwr;
        self.classifier += o.classifier;
    }

    pub(crate) fn scaled(&self, k: f64) -> LossBreakdown {
        LossBreakdown { mlm: self.mlm * k, dd: self.dd * k, tser: self.tser * k, trwr: self.trwr * k, classifier: self.classifier * k }
    }
}

/// Mean cross-entropy over rows and its gradient w.r.t. the logits.
fn cross_entropy(logits: &Array2<f64>, gold: &[usize]) -> (f64, Array2<f64>) {
    let m = gold.len();
    let mut grad = Array2::zeros(logits.raw_dim());
    if m == 0 {
        return (0.0, grad);
    }
    let mut loss = 0.0;
    for (r, &y) in gold.iter().enumerate() {
        let p = softmax(logits.row(r).as_slice().expect("logit rows are contiguous"));
        loss -= p[y].max(f64::MIN_POSITIVE).ln();
        for (c, &pc) in p.iter().enumerate() {
            grad[[r, c]] = (pc - f64::from(u8::from(c == y))) / m as f64;
        }
    }
    (loss / m as f64, grad)
}

fn span_rows(hidden: &Array2<f64>, spans: &[SpanTarget]) -> Result<Array2<f64>> {
    let (n, h) = hidden.dim();
    let mut x = Array2::zeros((spans.len(), 2 * h));
    for (r, t) in spans.iter().enumerate() {
        if t.start >= t.end || t.end > n {
            return Err(Error::SpanBounds { start: t.start, end: t.end, len: n });
        }
        x.row_mut(r).slice_mut(ndarray::s![..h]).assign(&hidden.row(t.start));
        x.row_mut(r).slice_mut(ndarray::s![h..]).assign(&hidden.row(t.end - 1));
    }
    Ok(x)
}

impl Encoder {
    fn head(&self, x: &Array2<f64>, ix: LinearIx) -> Array2<f64> {
        x.dot(self.params.get(ix.w)) + self.params.get(ix.b)
    }

    /// Logits of every head with targets in `sup`. Span heads read the
    /// concatenated states of a span's first and last piece.
    pub fn multitask_heads(&self, hidden: &Array2<f64>, sup: &Supervision) -> Result<HeadOutputs> {
        let (n, h) = hidden.dim();
        let mut mlm_in = Array2::zeros((sup.mlm.len(), h));
        for (r, &(p, _)) in sup.mlm.iter().enumerate() {
            if p >= n {
                return Err(Error::SpanBounds { start: p, end: p + 1, len: n });
            }
            mlm_in.row_mut(r).assign(&hidden.row(p));
        }
        let cls = hidden.row(0).to_owned().insert_axis(Axis(0));
        let dd = sup.dd.map(|_| self.head(&cls, self.layout.dd).row(0).to_owned());
        let classifier = match (sup.label, self.layout.classifier) {
            (Some(_), Some(ix)) => Some(self.head(&cls, ix).row(0).to_owned()),
            (Some(_), None) => return Err(Error::Config("encoder has no classifier head".into())),
            _ => None,
        };
        Ok(HeadOutputs {
            mlm: self.head(&mlm_in, self.layout.mlm),
            dd,
            tser: self.head(&span_rows(hidden, &sup.tser)?, self.layout.tser),
            trwr: self.head(&span_rows(hidden, &sup.trwr)?, self.layout.trwr),
            classifier,
        })
    }

    /// Loss and gradient for one sample; the gradient is multiplied by
    /// `scale`. Dropout is active only when `rng` is given.
    pub fn loss_and_grad<R: Rng>(&self, sample: &Sample, scale: f64, rng: Option<&mut R>) -> Result<(LossBreakdown, ParamSet)> {
        let sup = &sample.targets;
        let (hidden, cache) = self.forward(&sample.ids, rng)?;
        let out = self.multitask_heads(&hidden, sup)?;
        let mut g = self.params.zeros_like();
        let mut dhidden = Array2::zeros(hidden.raw_dim());
        let mut loss = LossBreakdown::default();

        let backprop = |x: &Array2<f64>, dlogits: Array2<f64>, ix: LinearIx, g: &mut ParamSet| -> Array2<f64> {
            let d = dlogits * scale;
            *g.get_mut(ix.w) += &x.t().dot(&d);
            *g.get_mut(ix.b) += &d.sum_axis(Axis(0)).insert_axis(Axis(0));
            d.dot(&self.params.get(ix.w).t())
        };

        if !sup.mlm.is_empty() {
            let gold: Vec<usize> = sup.mlm.iter().map(|&(_, id)| id as usize).collect();
            let (l, d) = cross_entropy(&out.mlm, &gold);
            loss.mlm = l;
            let x = Array2::from_shape_fn((sup.mlm.len(), hidden.ncols()), |(r, c)| hidden[[sup.mlm[r].0, c]]);
            let dx = backprop(&x, d, self.layout.mlm, &mut g);
            for (r, &(p, _)) in sup.mlm.iter().enumerate() {
                let mut row = dhidden.row_mut(p);
                row += &dx.row(r);
            }
        }
        let cls = hidden.row(0).to_owned().insert_axis(Axis(0));
        let mut cls_head = |logits: &Option<Array1<f64>>, gold: Option<usize>, ix: Option<LinearIx>, g: &mut ParamSet| -> f64 {
            let (Some(z), Some(y), Some(ix)) = (logits, gold, ix) else { return 0.0 };
            let (l, d) = cross_entropy(&z.clone().insert_axis(Axis(0)), &[y]);
            let dx = backprop(&cls, d, ix, g);
            let mut row = dhidden.row_mut(0);
            row += &dx.row(0);
            l
        };
        loss.dd = cls_head(&out.dd, sup.dd, Some(self.layout.dd), &mut g);
        loss.classifier = cls_head(&out.classifier, sup.label, self.layout.classifier, &mut g);

        for (spans, logits, ix, slot) in [
            (&sup.tser, &out.tser, self.layout.tser, &mut loss.tser),
            (&sup.trwr, &out.trwr, self.layout.trwr, &mut loss.trwr),
        ] {
            if spans.is_empty() {
                continue;
            }
            let gold: Vec<usize> = spans.iter().map(SpanTarget::class_index).collect();
            let (l, d) = cross_entropy(logits, &gold);
            *slot = l;
            let x = span_rows(&hidden, spans)?;
            let dx = backprop(&x, d, ix, &mut g);
            let h = hidden.ncols();
            for (r, t) in spans.iter().enumerate() {
                let mut first = dhidden.row_mut(t.start);
                first += &dx.row(r).slice(ndarray::s![..h]);
                let mut last = dhidden.row_mut(t.end - 1);
                last += &dx.row(r).slice(ndarray::s![h..]);
            }
        }

        self.backward(&cache, dhidden, &mut g);
        Ok((loss, g))
    }

    /// Evaluation-mode loss of one sample.
    pub fn loss(&self, sample: &Sample) -> Result<LossBreakdown> {
        let hidden = self.encode(&sample.ids)?;
        Ok(joint_loss(&self.multitask_heads(&hidden, &sample.targets)?, &sample.targets))
    }
}

/// Unweighted sum of per-task cross-entropies: MLM and span tasks are
/// averaged over their targets, DD and the classifier are single terms.
pub fn joint_loss(out: &HeadOutputs, sup: &Supervision) -> LossBreakdown {
    let single = |z: &Option<Array1<f64>>, y: Option<usize>| match (z, y) {
        (Some(z), Some(y)) => cross_entropy(&z.clone().insert_axis(Axis(0)), &[y]).0,
        _ => 0.0,
    };
    let spans = |z: &Array2<f64>, t: &[SpanTarget]| cross_entropy(z, &t.iter().map(SpanTarget::class_index).collect::<Vec<_>>()).0;
    LossBreakdown {
        mlm: cross_entropy(&out.mlm, &sup.mlm.iter().map(|&(_, id)| id as usize).collect::<Vec<_>>()).0,
        dd: single(&out.dd, sup.dd),
        tser: spans(&out.tser, &sup.tser),
        trwr: spans(&out.trwr, &sup.trwr),
        classifier: single(&out.classifier, sup.label),
    }
}
