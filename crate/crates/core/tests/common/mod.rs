//! Reference metric implementations written straight from the definitions,
//! sharing no code with the library.

#![allow(dead_code)]

use rand::Rng;
use regret_transfer::metric::{LogBase, MetricKind, MetricSpec};

/// Item `i` outranks `j` when its score is larger, ties broken by index.
pub fn outranks(scores: &[f64], i: usize, j: usize) -> bool {
    scores[i] > scores[j] || (scores[i] == scores[j] && i < j)
}

/// 1-based rank of every item: one plus the number of items above it.
pub fn ranks(scores: &[f64]) -> Vec<usize> {
    (0..scores.len())
        .map(|i| 1 + (0..scores.len()).filter(|&j| j != i && outranks(scores, j, i)).count())
        .collect()
}

/// Label of the item at each rank.
pub fn labels_in_rank_order(labels: &[bool], scores: &[f64]) -> Vec<bool> {
    let r = ranks(scores);
    let mut out = vec![false; labels.len()];
    for i in 0..labels.len() {
        out[r[i] - 1] = labels[i];
    }
    out
}

pub fn weight(base: LogBase, rank: usize) -> f64 {
    let b = match base {
        LogBase::Two => 2.0,
        LogBase::Natural => std::f64::consts::E,
        LogBase::Custom(b) => b,
    };
    b.ln() / ((1 + rank) as f64).ln()
}

/// Metric value, `None` where the definition divides by zero.
pub fn naive_metric(spec: &MetricSpec, labels: &[bool], scores: &[f64]) -> Option<f64> {
    let n = labels.len();
    let k = spec.truncation.unwrap_or(n);
    let pos = labels.iter().filter(|&&y| y).count();
    let neg = n - pos;
    let y = labels_in_rank_order(labels, scores);
    let top = &y[..k];
    let hits = top.iter().filter(|&&v| v).count();
    match spec.kind {
        MetricKind::Acc => {
            let right = (0..n).filter(|&i| labels[i] == (scores[i] > spec.threshold)).count();
            Some(right as f64 / n as f64)
        }
        MetricKind::Precision => Some(hits as f64 / k as f64),
        MetricKind::Recall => (pos > 0).then(|| hits as f64 / pos as f64),
        MetricKind::Auc => {
            if pos == 0 || neg == 0 {
                return None;
            }
            let r = ranks(scores);
            let mut good = 0;
            for i in (0..n).filter(|&i| labels[i]) {
                for j in (0..n).filter(|&j| !labels[j]) {
                    if r[i] < r[j] {
                        good += 1;
                    }
                }
            }
            Some(good as f64 / (pos * neg) as f64)
        }
        MetricKind::Dcg => Some(dcg(spec.log_base, top)),
        MetricKind::Ndcg => {
            if pos == 0 {
                return None;
            }
            let ideal: Vec<bool> = (0..k).map(|r| r < pos).collect();
            Some(dcg(spec.log_base, top) / dcg(spec.log_base, &ideal))
        }
        MetricKind::Map => {
            if pos == 0 {
                return None;
            }
            let mut sum = 0.0;
            for r in 1..=k {
                if y[r - 1] {
                    let above = y[..r].iter().filter(|&&v| v).count();
                    sum += above as f64 / r as f64;
                }
            }
            Some(sum / pos.min(k) as f64)
        }
        MetricKind::Mrr => Some(match top.iter().position(|&v| v) {
            Some(r) => 1.0 / (r + 1) as f64,
            None => 0.0,
        }),
    }
}

fn dcg(base: LogBase, ranked: &[bool]) -> f64 {
    let mut total = 0.0;
    for (r, &v) in ranked.iter().enumerate() {
        if v {
            total += weight(base, r + 1);
        }
    }
    total
}

/// A random list of length `1..=n_max` with coarse scores, so ties occur.
pub fn random_list<R: Rng>(rng: &mut R, n_max: usize) -> (Vec<bool>, Vec<f64>) {
    let n = rng.gen_range(1..=n_max);
    let labels = (0..n).map(|_| rng.gen_bool(0.4)).collect();
    let scores = (0..n).map(|_| rng.gen_range(0..8) as f64 / 8.0).collect();
    (labels, scores)
}

/// A random spec of `kind` valid for a list of length `n`.
pub fn random_spec<R: Rng>(rng: &mut R, kind: MetricKind, n: usize) -> MetricSpec {
    let mut spec = MetricSpec::new(kind).with_log_base(match rng.gen_range(0..3) {
        0 => LogBase::Two,
        1 => LogBase::Natural,
        _ => LogBase::Custom(10.0),
    });
    if kind.supports_truncation() && rng.gen_bool(0.5) {
        spec = spec.at(rng.gen_range(1..=n));
    }
    if kind == MetricKind::Acc {
        spec = spec.with_threshold(rng.gen_range(0..8) as f64 / 8.0 + 1.0 / 16.0);
    }
    spec
}
