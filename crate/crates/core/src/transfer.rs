//! Closed-form regret-transfer coefficients between AUC, NDCG, accuracy and
//! truncation levels, plus the instances on which they are meant to be tight.
//!
//! Two regret regimes are used:
//!
//! * **label regime** (AUC <-> NDCG, truncation): a fixed binary label list,
//!   absolute regret of each metric as computed by [`crate::eval`]. NDCG regret
//!   is therefore `sum_i (w(i) - w(r_i)) / sum_{i<=n+} w(i)`.
//! * **margin regime** (AUC/NDCG -> Acc): a relevance vector with margin
//!   `delta = min |eta_i - 0.5| > 0`, its Bayes labels `eta_i > 0.5`, and a
//!   ranking whose top `n+` items are predicted positive. Accuracy regret is
//!   the misclassified fraction `|E| / n`; AUC and NDCG regrets are the
//!   eta-weighted utility losses with the class counts held fixed, see
//!   [`margin_regrets`].

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::eval::ranked_regret;
use crate::instance::{rank_values, LabeledList, Permutation, RelevanceVector, ScoreVector};
use crate::metric::{LogBase, MetricKind, MetricSpec};

/// Extreme consecutive differences of `w(r) = 1 / log(1 + r)` on `1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightDifferentials {
    /// `w(1) - w(2)`
    pub delta_max: f64,
    /// `w(n-1) - w(n)`
    pub delta_min: f64,
    pub n: usize,
}

pub fn delta_extremes(n: usize, base: LogBase) -> Result<WeightDifferentials> {
    if n < 3 {
        return Err(invalid(format!("weight differentials need n >= 3, got {n}")));
    }
    Ok(WeightDifferentials {
        delta_max: base.discount_gap(1),
        delta_min: base.discount_gap(n - 1),
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    AucToNdcg,
    NdcgToAuc,
    AucToAcc,
    NdcgToAcc,
    /// From the deeper cutoff `k2` to the shallower `k1`.
    Truncation,
}

impl Direction {
    pub const RANKING: [Direction; 4] = [
        Direction::AucToNdcg,
        Direction::NdcgToAuc,
        Direction::AucToAcc,
        Direction::NdcgToAcc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Direction::AucToNdcg => "auc-ndcg",
            Direction::NdcgToAuc => "ndcg-auc",
            Direction::AucToAcc => "auc-acc",
            Direction::NdcgToAcc => "ndcg-acc",
            Direction::Truncation => "trunc",
        }
    }

    pub fn source(self) -> MetricKind {
        match self {
            Direction::AucToNdcg | Direction::AucToAcc => MetricKind::Auc,
            Direction::NdcgToAuc | Direction::NdcgToAcc => MetricKind::Ndcg,
            Direction::Truncation => MetricKind::Ndcg,
        }
    }

    pub fn target(self) -> MetricKind {
        match self {
            Direction::AucToNdcg => MetricKind::Ndcg,
            Direction::NdcgToAuc => MetricKind::Auc,
            Direction::AucToAcc | Direction::NdcgToAcc => MetricKind::Acc,
            Direction::Truncation => MetricKind::Ndcg,
        }
    }

    /// Whether the bound is checked in the margin regime.
    pub fn uses_margin(self) -> bool {
        matches!(self, Direction::AucToAcc | Direction::NdcgToAcc)
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auc-ndcg" => Ok(Direction::AucToNdcg),
            "ndcg-auc" => Ok(Direction::NdcgToAuc),
            "auc-acc" => Ok(Direction::AucToAcc),
            "ndcg-acc" => Ok(Direction::NdcgToAcc),
            "trunc" => Ok(Direction::Truncation),
            other => Err(invalid(format!("unknown direction `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: usize,
    pub n_pos: usize,
    pub n_neg: usize,
    pub log_base: LogBase,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k1: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k2: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricKind>,
}

/// `Psi(eps) = coefficient * eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferBound {
    pub direction: Direction,
    pub coefficient: f64,
    pub params: BoundParams,
}

impl TransferBound {
    pub fn psi(&self, eps: f64) -> f64 {
        self.coefficient * eps
    }
}

fn check_counts(n_pos: usize, n_neg: usize, n: usize) -> Result<()> {
    if n_pos == 0 || n_neg == 0 {
        return Err(invalid(format!(
            "both classes must be present (n+ = {n_pos}, n- = {n_neg})"
        )));
    }
    if n_pos + n_neg != n {
        return Err(invalid(format!("n+ + n- = {} but n = {n}", n_pos + n_neg)));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(invalid(format!("margin delta must lie in (0, 0.5], got {delta}")));
    }
    Ok(())
}

fn params(n: usize, n_pos: usize, n_neg: usize, log_base: LogBase) -> BoundParams {
    BoundParams {
        n,
        n_pos,
        n_neg,
        log_base,
        delta: None,
        k1: None,
        k2: None,
        metric: None,
    }
}

/// `C = delta_max * n+ n- / sum_{i<=n+} w(i)`.
pub fn coeff_auc_to_ndcg(n_pos: usize, n_neg: usize, n: usize, base: LogBase) -> Result<TransferBound> {
    check_counts(n_pos, n_neg, n)?;
    let d = delta_extremes(n, base)?;
    let coefficient = d.delta_max * (n_pos * n_neg) as f64 / base.discount_sum(n_pos);
    Ok(TransferBound {
        direction: Direction::AucToNdcg,
        coefficient,
        params: params(n, n_pos, n_neg, base),
    })
}

/// `C = sum_{i<=n+} w(i) / (n+ n- delta_min)`.
pub fn coeff_ndcg_to_auc(n_pos: usize, n_neg: usize, n: usize, base: LogBase) -> Result<TransferBound> {
    check_counts(n_pos, n_neg, n)?;
    let d = delta_extremes(n, base)?;
    let coefficient = base.discount_sum(n_pos) / ((n_pos * n_neg) as f64 * d.delta_min);
    Ok(TransferBound {
        direction: Direction::NdcgToAuc,
        coefficient,
        params: params(n, n_pos, n_neg, base),
    })
}

/// `C = n+ n- / (n delta)`.
pub fn coeff_auc_to_acc(n: usize, n_pos: usize, n_neg: usize, delta: f64) -> Result<TransferBound> {
    check_counts(n_pos, n_neg, n)?;
    check_delta(delta)?;
    let mut p = params(n, n_pos, n_neg, LogBase::Natural);
    p.delta = Some(delta);
    Ok(TransferBound {
        direction: Direction::AucToAcc,
        coefficient: (n_pos * n_neg) as f64 / (n as f64 * delta),
        params: p,
    })
}

/// `C = IDCG_n / (n delta w(n))` with `IDCG_n = sum_{i<=n+} w(i)`.
pub fn coeff_ndcg_to_acc(n: usize, delta: f64, base: LogBase, n_pos: usize) -> Result<TransferBound> {
    if n == 0 || n_pos == 0 || n_pos > n {
        return Err(invalid(format!("need 1 <= n+ <= n, got n+ = {n_pos}, n = {n}")));
    }
    check_delta(delta)?;
    let mut p = params(n, n_pos, n - n_pos, base);
    p.delta = Some(delta);
    Ok(TransferBound {
        direction: Direction::NdcgToAcc,
        coefficient: base.discount_sum(n_pos) / (n as f64 * delta * base.discount(n)),
        params: p,
    })
}

/// Which way a truncation transfer runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruncationWay {
    /// Regret at the deeper cutoff `k2` controls regret at `k1`.
    Down,
    /// Regret at `k1` is supposed to control regret at `k2`.
    Up,
}

/// The upward direction has no linear coefficient: `Psi(0) > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceMarker {
    pub metric: MetricKind,
    pub from_k: usize,
    pub to_k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationTransfer {
    Bounded(TransferBound),
    Divergent(DivergenceMarker),
}

/// Truncation transfer between cutoffs `k1 < k2`.
///
/// P@k and R@k give `C = k2 / k1`; NDCG@k gives `IDCG_k2 / IDCG_k1`.
pub fn coeff_truncation(
    k1: usize,
    k2: usize,
    way: TruncationWay,
    spec: &MetricSpec,
    labels: &LabeledList,
) -> Result<TruncationTransfer> {
    let n = labels.len();
    if !(1 <= k1 && k1 < k2 && k2 <= n) {
        return Err(invalid(format!("need 1 <= k1 < k2 <= n, got k1 = {k1}, k2 = {k2}, n = {n}")));
    }
    let coefficient = match spec.kind {
        MetricKind::Precision | MetricKind::Recall => k2 as f64 / k1 as f64,
        MetricKind::Ndcg => {
            if labels.n_pos() == 0 {
                return Err(Error::UndefinedMetric("NDCG@k needs a positive label".into()));
            }
            let base = spec.log_base;
            base.discount_sum(k2.min(labels.n_pos())) / base.discount_sum(k1.min(labels.n_pos()))
        }
        other => {
            return Err(invalid(format!("no closed-form truncation coefficient for {other}")))
        }
    };
    if way == TruncationWay::Up {
        return Ok(TruncationTransfer::Divergent(DivergenceMarker {
            metric: spec.kind,
            from_k: k1,
            to_k: k2,
        }));
    }
    let mut p = params(n, labels.n_pos(), labels.n_neg(), spec.log_base);
    p.k1 = Some(k1);
    p.k2 = Some(k2);
    p.metric = Some(spec.kind);
    Ok(TruncationTransfer::Bounded(TransferBound {
        direction: Direction::Truncation,
        coefficient,
        params: p,
    }))
}

/// Margin-regime regrets of one ranking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginRegrets {
    /// Misclassified fraction with the top `n+` ranks predicted positive.
    pub acc: f64,
    /// `sum over inverted pairs (eta_hi - eta_lo) / (n+ n-)`.
    pub auc: f64,
    /// `sum_r w(r) (eta_(r) - eta_sigma(r)) / sum_{i<=n+} w(i)`.
    pub ndcg: f64,
}

/// Bayes class counts of a relevance vector with a strictly positive margin.
pub fn margin_counts(eta: &RelevanceVector) -> Result<(usize, usize)> {
    if let Some(index) = eta.values().iter().position(|&e| e == 0.5) {
        return Err(Error::MarginViolation { index });
    }
    let labels = eta.binarize();
    if labels.n_pos() == 0 || labels.n_neg() == 0 {
        return Err(invalid("margin regime needs both Bayes classes"));
    }
    Ok((labels.n_pos(), labels.n_neg()))
}

pub fn margin_regrets(eta: &RelevanceVector, perm: &Permutation, base: LogBase) -> Result<MarginRegrets> {
    if perm.len() != eta.len() {
        return Err(invalid("permutation and eta differ in length"));
    }
    let (n_pos, n_neg) = margin_counts(eta)?;
    let e = eta.values();
    let ranked: Vec<f64> = perm.order().iter().map(|&i| e[i]).collect();
    let n = ranked.len();

    let misclassified = ranked
        .iter()
        .enumerate()
        .filter(|&(r, &v)| (v > 0.5) != (r < n_pos))
        .count();

    let mut inverted_gap = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            if ranked[b] > ranked[a] {
                inverted_gap += ranked[b] - ranked[a];
            }
        }
    }

    let mut sorted = e.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let dcg_loss: f64 = (0..n)
        .map(|r| base.discount(r + 1) * (sorted[r] - ranked[r]))
        .sum();

    Ok(MarginRegrets {
        acc: misclassified as f64 / n as f64,
        auc: inverted_gap / (n_pos * n_neg) as f64,
        ndcg: dcg_loss / base.discount_sum(n_pos),
    })
}

/// Shared settings for bound construction and verification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundConfig {
    pub log_base: LogBase,
    /// Margin for the accuracy directions.
    pub delta: f64,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self {
            log_base: LogBase::Natural,
            delta: 0.25,
        }
    }
}

/// Coefficient of a ranking direction for the given class counts.
pub fn bound_for(direction: Direction, n_pos: usize, n_neg: usize, cfg: &BoundConfig) -> Result<TransferBound> {
    let n = n_pos + n_neg;
    match direction {
        Direction::AucToNdcg => coeff_auc_to_ndcg(n_pos, n_neg, n, cfg.log_base),
        Direction::NdcgToAuc => coeff_ndcg_to_auc(n_pos, n_neg, n, cfg.log_base),
        Direction::AucToAcc => coeff_auc_to_acc(n, n_pos, n_neg, cfg.delta),
        Direction::NdcgToAcc => coeff_ndcg_to_acc(n, cfg.delta, cfg.log_base, n_pos),
        Direction::Truncation => Err(invalid("use coeff_truncation for truncation bounds")),
    }
}

/// Source and target regret of one ranking for a direction.
///
/// `eta` is required for the margin directions and ignored otherwise.
pub fn direction_regrets(
    direction: Direction,
    labels: &LabeledList,
    eta: Option<&RelevanceVector>,
    perm: &Permutation,
    base: LogBase,
) -> Result<(f64, f64)> {
    match direction {
        Direction::AucToNdcg | Direction::NdcgToAuc => {
            let ranked = labels.ranked(perm)?;
            let auc = ranked_regret(&MetricSpec::auc(), &ranked)?;
            let ndcg = ranked_regret(&MetricSpec::ndcg().with_log_base(base), &ranked)?;
            Ok(if direction == Direction::AucToNdcg {
                (auc, ndcg)
            } else {
                (ndcg, auc)
            })
        }
        Direction::AucToAcc | Direction::NdcgToAcc => {
            let eta = eta.ok_or_else(|| invalid("accuracy directions need a relevance vector"))?;
            let m = margin_regrets(eta, perm, base)?;
            Ok(if direction == Direction::AucToAcc {
                (m.auc, m.acc)
            } else {
                (m.ndcg, m.acc)
            })
        }
        Direction::Truncation => Err(invalid("truncation regrets need a metric and cutoffs")),
    }
}

/// The instance a direction's tightness argument points at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub direction: Direction,
    /// Items `0..n+` are positive.
    pub labels: LabeledList,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<RelevanceVector>,
    pub perm: Permutation,
    pub regret_source: f64,
    pub regret_target: f64,
    /// `regret_target / regret_source`
    pub ratio: f64,
    pub coefficient: f64,
}

/// Builds the attainability instance for a direction.
///
/// * AUC->NDCG: the first negative is moved to rank 1, displacing the top
///   positive.
/// * NDCG->AUC: the last positive is moved to rank n.
/// * AUC->Acc: the boundary pair at ranks n+ and n+ + 1 is swapped, with every
///   eta at exactly `0.5 +/- delta`.
/// * NDCG->Acc: the last positive is moved to rank n, etas as for AUC->Acc.
pub fn worst_case_construct(direction: Direction, n: usize, n_pos: usize, cfg: &BoundConfig) -> Result<WorstCase> {
    if n < 3 {
        return Err(invalid(format!("worst-case instances need n >= 3, got {n}")));
    }
    if n_pos == 0 || n_pos >= n {
        return Err(invalid(format!("need 1 <= n+ < n, got n+ = {n_pos}, n = {n}")));
    }
    let n_neg = n - n_pos;
    let labels = LabeledList::with_counts(n_pos, n_neg)?;
    let bound = bound_for(direction, n_pos, n_neg, cfg)?;

    let mut order: Vec<usize> = (0..n).collect();
    match direction {
        Direction::AucToNdcg => {
            order.remove(n_pos);
            order.insert(0, n_pos);
        }
        Direction::NdcgToAuc | Direction::NdcgToAcc => {
            order.remove(n_pos - 1);
            order.push(n_pos - 1);
        }
        Direction::AucToAcc => order.swap(n_pos - 1, n_pos),
        Direction::Truncation => unreachable!("rejected by bound_for"),
    }
    let perm = Permutation::new(order)?;

    let eta = if direction.uses_margin() {
        let v = labels
            .labels()
            .iter()
            .map(|&y| if y { 0.5 + cfg.delta } else { 0.5 - cfg.delta })
            .collect();
        Some(RelevanceVector::new(v)?)
    } else {
        None
    };
    let (regret_source, regret_target) =
        direction_regrets(direction, &labels, eta.as_ref(), &perm, cfg.log_base)?;
    Ok(WorstCase {
        direction,
        labels,
        eta,
        perm,
        regret_source,
        regret_target,
        ratio: regret_target / regret_source,
        coefficient: bound.coefficient,
    })
}

/// A sign-consistent predictor that still misorders two items of one class.
///
/// `eta = [0.9, 0.6, ...]` with any further items below 0.5; the scores keep
/// every item on its Bayes side of 0.5 but rank item 2 above item 1.
pub fn pointwise_failure_witness(n: usize) -> Result<(RelevanceVector, ScoreVector)> {
    if n < 2 {
        return Err(invalid("the witness needs at least two items"));
    }
    let mut eta = vec![0.9, 0.6];
    let mut scores = vec![0.6, 0.8];
    let tail = n - 2;
    for j in 0..tail {
        let v = if tail == 1 {
            0.3
        } else {
            0.4 - 0.35 * j as f64 / (tail - 1) as f64
        };
        eta.push(v);
        scores.push(v);
    }
    Ok((RelevanceVector::new(eta)?, ScoreVector::new(scores)?))
}

/// Permutation sorting `eta` descending (ties by index).
pub fn bayes_ranking(eta: &RelevanceVector) -> Permutation {
    rank_values(eta.values())
}
