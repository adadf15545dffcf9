//! Exact metric values, ideal values and regret on binary-labelled lists.
//!
//! All ranking metrics are evaluated on the label sequence read off in rank
//! order. Accuracy is the exception: it needs the scores themselves (or a cut
//! position in the ranking) to know which items are predicted positive.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::instance::{rank_by_scores, LabeledList, Permutation, ScoreVector};
use crate::metric::{LogBase, MetricKind, MetricSpec};

/// Metric value on labels already arranged in rank order.
pub fn eval_ranked(spec: &MetricSpec, ranked: &[bool]) -> Result<f64> {
    let n = ranked.len();
    if n == 0 {
        return Err(invalid("empty list"));
    }
    let k = spec.cutoff(n)?;
    let n_pos = ranked.iter().filter(|&&y| y).count();
    let n_neg = n - n_pos;
    let hits = |k: usize| ranked[..k].iter().filter(|&&y| y).count();

    let value = match spec.kind {
        MetricKind::Acc => {
            return Err(invalid(
                "accuracy needs scores or a cut position, not just a ranking",
            ))
        }
        MetricKind::Precision => hits(k) as f64 / k as f64,
        MetricKind::Recall => {
            require_positive(spec, n_pos)?;
            hits(k) as f64 / n_pos as f64
        }
        MetricKind::Auc => {
            if n_pos == 0 || n_neg == 0 {
                return Err(Error::UndefinedMetric(format!(
                    "AUC needs both classes (n+ = {n_pos}, n- = {n_neg})"
                )));
            }
            let (misordered, pairs) = auc_pair_counts(ranked);
            (pairs - misordered) as f64 / pairs as f64
        }
        MetricKind::Ndcg => {
            require_positive(spec, n_pos)?;
            dcg(ranked, k, spec.log_base) / ideal_dcg(n_pos, k, spec.log_base)
        }
        MetricKind::Dcg => dcg(ranked, k, spec.log_base),
        MetricKind::Map => {
            require_positive(spec, n_pos)?;
            let mut found = 0usize;
            let mut sum = 0.0;
            for (r, &y) in ranked[..k].iter().enumerate() {
                if y {
                    found += 1;
                    sum += found as f64 / (r + 1) as f64;
                }
            }
            sum / k.min(n_pos) as f64
        }
        MetricKind::Mrr => match ranked[..k].iter().position(|&y| y) {
            Some(r) => 1.0 / (r + 1) as f64,
            None => 0.0,
        },
    };
    Ok(value)
}

/// Positive-negative pairs ranked the wrong way round, and all such pairs.
fn auc_pair_counts(ranked: &[bool]) -> (u64, u64) {
    let mut negatives_above = 0u64;
    let mut positives = 0u64;
    let mut misordered = 0u64;
    for &y in ranked {
        if y {
            positives += 1;
            misordered += negatives_above;
        } else {
            negatives_above += 1;
        }
    }
    (misordered, positives * negatives_above)
}

/// AUC regret as a ratio of integers, so it carries no cancellation error.
fn auc_regret(ranked: &[bool]) -> f64 {
    let (misordered, pairs) = auc_pair_counts(ranked);
    misordered as f64 / pairs as f64
}

fn require_positive(spec: &MetricSpec, n_pos: usize) -> Result<()> {
    if n_pos == 0 {
        Err(Error::UndefinedMetric(format!(
            "{} needs at least one positive label",
            spec.label()
        )))
    } else {
        Ok(())
    }
}

/// `sum_{r <= k} y_r w(r)` over the ranked labels.
pub fn dcg(ranked: &[bool], k: usize, base: LogBase) -> f64 {
    ranked[..k]
        .iter()
        .enumerate()
        .filter(|(_, &y)| y)
        .map(|(r, _)| base.discount(r + 1))
        .sum()
}

/// DCG of the label-sorted list truncated at `k`: `sum_{r <= min(k, n+)} w(r)`.
pub fn ideal_dcg(n_pos: usize, k: usize, base: LogBase) -> f64 {
    base.discount_sum(k.min(n_pos))
}

pub fn eval_metric(spec: &MetricSpec, labels: &LabeledList, perm: &Permutation) -> Result<f64> {
    eval_ranked(spec, &labels.ranked(perm)?)
}

/// Accuracy of the classifier `s_i > threshold`.
pub fn eval_metric_acc(spec: &MetricSpec, labels: &LabeledList, scores: &ScoreVector) -> Result<f64> {
    if spec.kind != MetricKind::Acc {
        return Err(invalid(format!("{} is not accuracy", spec.label())));
    }
    if scores.len() != labels.len() {
        return Err(invalid("scores and labels differ in length"));
    }
    spec.cutoff(labels.len())?;
    let correct = labels
        .labels()
        .iter()
        .zip(scores.values())
        .filter(|(&y, &s)| y == (s > spec.threshold))
        .count();
    Ok(correct as f64 / labels.len() as f64)
}

/// Accuracy when the top `cut` ranked items are predicted positive.
pub fn accuracy_at_cut(ranked: &[bool], cut: usize) -> f64 {
    let correct = ranked
        .iter()
        .enumerate()
        .filter(|&(r, &y)| y == (r < cut))
        .count();
    correct as f64 / ranked.len() as f64
}

/// Value of the metric on the all-positives-first arrangement.
pub fn ideal_value(spec: &MetricSpec, labels: &LabeledList) -> Result<f64> {
    if spec.kind == MetricKind::Acc {
        spec.cutoff(labels.len())?;
        return Ok(1.0);
    }
    eval_ranked(spec, &labels.ideal_ranked())
}

/// Metric value, its ideal, and both regret forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub metric: String,
    pub value: f64,
    pub ideal: f64,
    /// `ideal - value`
    pub regret_abs: f64,
    /// `1 - value / ideal`, 0 when the ideal is 0.
    pub regret_rel: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl RegretReport {
    pub fn from_values(spec: &MetricSpec, value: f64, ideal: f64) -> Self {
        let regret_rel = if ideal == 0.0 { 0.0 } else { 1.0 - value / ideal };
        Self {
            metric: spec.label(),
            value,
            ideal,
            regret_abs: ideal - value,
            regret_rel,
            warning: None,
        }
    }
}

pub fn metric_regret(spec: &MetricSpec, labels: &LabeledList, scores: &ScoreVector) -> Result<RegretReport> {
    if scores.len() != labels.len() {
        return Err(invalid(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if spec.kind == MetricKind::Acc {
        let value = eval_metric_acc(spec, labels, scores)?;
        return Ok(RegretReport::from_values(spec, value, 1.0));
    }
    let perm = rank_by_scores(scores);
    let value = eval_metric(spec, labels, &perm)?;
    let ideal = ideal_value(spec, labels)?;
    let mut report = RegretReport::from_values(spec, value, ideal);
    if spec.kind == MetricKind::Auc {
        report.regret_abs = auc_regret(&labels.ranked(&perm)?);
        report.regret_rel = report.regret_abs;
    }
    if spec.kind == MetricKind::Mrr && labels.n_pos() == 0 {
        report.warning = Some("no relevant item; MRR is 0 by convention".into());
    }
    Ok(report)
}

/// Absolute regret of a ranked label sequence.
pub fn ranked_regret(spec: &MetricSpec, ranked: &[bool]) -> Result<f64> {
    let mut ideal: Vec<bool> = ranked.to_vec();
    ideal.sort_by(|a, b| b.cmp(a));
    let value = eval_ranked(spec, ranked)?;
    if spec.kind == MetricKind::Auc {
        return Ok(auc_regret(ranked));
    }
    Ok(eval_ranked(spec, &ideal)? - value)
}
