//! Expected utilities under a relevance vector and exhaustive Bayes-optimal
//! sets over the permutations of small instances.
//!
//! Expected utilities come from one of two routes. Metrics with fixed,
//! label-independent position weights (DCG, P@k, R@k) are linear in eta, so
//! their expectation is `sum_r w(r) eta_{sigma(r)}`. Every other ranking metric
//! is averaged over all `2^n` label realizations. Realizations on which a
//! metric is undefined (AUC on one class, NDCG/MAP with no positive) contribute
//! 0; such realizations have the same labels under every ordering, so they
//! shift all utilities by one constant and leave optimal sets unchanged.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::eval::eval_ranked;
use crate::instance::{all_permutations, Permutation, RelevanceVector, ScoreVector};
use crate::metric::{MetricKind, MetricSpec};

/// Largest `n` for which `2^n` label realizations are enumerated.
pub const EXACT_ENUMERATION_LIMIT: usize = 14;
/// Largest `n` for which all `n!` orderings are enumerated.
pub const OPTIMAL_SET_LIMIT: usize = 8;
/// Utilities within this distance of the maximum count as optimal.
pub const OPTIMAL_SET_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityMethod {
    GaddLinear,
    ExactEnumeration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedUtility {
    pub value: f64,
    pub spec: MetricSpec,
    pub method: UtilityMethod,
}

/// Metric value for every rank-ordered label pattern of length `n`.
/// Bit `r` of the index is the label at rank `r`.
#[derive(Debug, Clone)]
pub struct LabelTable {
    n: usize,
    values: Vec<f64>,
}

impl LabelTable {
    pub fn new(spec: &MetricSpec, n: usize) -> Result<Self> {
        if n > EXACT_ENUMERATION_LIMIT {
            return Err(Error::Capacity {
                what: "exact label enumeration",
                n,
                limit: EXACT_ENUMERATION_LIMIT,
            });
        }
        if spec.kind == MetricKind::Acc {
            return Err(invalid("accuracy is not a ranking functional; use expected_accuracy"));
        }
        spec.cutoff(n)?;
        let mut ranked = vec![false; n];
        let values = (0..1usize << n)
            .map(|mask| {
                for (r, y) in ranked.iter_mut().enumerate() {
                    *y = mask >> r & 1 == 1;
                }
                match eval_ranked(spec, &ranked) {
                    Ok(v) => Ok(v),
                    Err(Error::UndefinedMetric(_)) => Ok(0.0),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, values })
    }

    /// `E[M]` when the item at rank `r` is `order[r]` and labels are
    /// independent Bernoulli(eta).
    pub fn expected(&self, eta: &[f64], order: &[usize], scratch: &mut Vec<f64>) -> f64 {
        debug_assert_eq!(order.len(), self.n);
        scratch.clear();
        scratch.resize(1 << self.n, 0.0);
        scratch[0] = 1.0;
        for (r, &item) in order.iter().enumerate() {
            let q = eta[item];
            let width = 1usize << r;
            for m in 0..width {
                let p = scratch[m];
                scratch[m | width] = p * q;
                scratch[m] = p * (1.0 - q);
            }
        }
        scratch.iter().zip(&self.values).map(|(p, v)| p * v).sum()
    }
}

/// Position weights of an additive metric; `None` for the other kinds.
pub fn additive_weights(spec: &MetricSpec, eta: &[f64]) -> Result<Option<Vec<f64>>> {
    let n = eta.len();
    let k = spec.cutoff(n)?;
    let w = match spec.kind {
        MetricKind::Dcg => (1..=k).map(|r| spec.log_base.discount(r)).collect(),
        MetricKind::Precision => vec![1.0 / k as f64; k],
        MetricKind::Recall => {
            // conditioned on a fixed positive count, taken as its expectation
            let expected_pos: f64 = eta.iter().sum();
            let w = if expected_pos > 0.0 { 1.0 / expected_pos } else { 0.0 };
            vec![w; k]
        }
        _ => return Ok(None),
    };
    Ok(Some(w))
}

enum Oracle {
    Linear(Vec<f64>),
    Table(LabelTable),
    Accuracy,
}

impl Oracle {
    fn new(spec: &MetricSpec, eta: &[f64], force_exact: bool) -> Result<Self> {
        if spec.kind == MetricKind::Acc {
            spec.cutoff(eta.len())?;
            return Ok(Oracle::Accuracy);
        }
        if !force_exact {
            if let Some(w) = additive_weights(spec, eta)? {
                return Ok(Oracle::Linear(w));
            }
        }
        Ok(Oracle::Table(LabelTable::new(spec, eta.len())?))
    }

    /// For accuracy this is the best expected accuracy over all cut positions.
    fn utility(&self, eta: &[f64], order: &[usize], scratch: &mut Vec<f64>) -> f64 {
        match self {
            Oracle::Linear(w) => w.iter().zip(order).map(|(w, &i)| w * eta[i]).sum(),
            Oracle::Table(t) => t.expected(eta, order, scratch),
            Oracle::Accuracy => (0..=order.len())
                .map(|cut| expected_accuracy_ordered(eta, order, cut))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

fn check_lengths(eta: &RelevanceVector, perm: &Permutation) -> Result<()> {
    if eta.len() != perm.len() {
        return Err(invalid(format!(
            "relevance vector has {} items, permutation {}",
            eta.len(),
            perm.len()
        )));
    }
    Ok(())
}

/// Expected utility, linear for additive metrics and enumerated otherwise.
pub fn expected_utility(spec: &MetricSpec, eta: &RelevanceVector, perm: &Permutation) -> Result<ExpectedUtility> {
    expected_utility_with(spec, eta, perm, false)
}

/// Expected utility by full label enumeration regardless of metric family.
pub fn expected_utility_exact(spec: &MetricSpec, eta: &RelevanceVector, perm: &Permutation) -> Result<ExpectedUtility> {
    expected_utility_with(spec, eta, perm, true)
}

fn expected_utility_with(
    spec: &MetricSpec,
    eta: &RelevanceVector,
    perm: &Permutation,
    force_exact: bool,
) -> Result<ExpectedUtility> {
    check_lengths(eta, perm)?;
    if spec.kind == MetricKind::Acc {
        return Err(invalid("accuracy needs a cut position; use expected_accuracy"));
    }
    let oracle = Oracle::new(spec, eta.values(), force_exact)?;
    let method = match oracle {
        Oracle::Linear(_) => UtilityMethod::GaddLinear,
        _ => UtilityMethod::ExactEnumeration,
    };
    let value = oracle.utility(eta.values(), perm.order(), &mut Vec::new());
    Ok(ExpectedUtility {
        value,
        spec: *spec,
        method,
    })
}

fn expected_accuracy_ordered(eta: &[f64], order: &[usize], cut: usize) -> f64 {
    let correct: f64 = order
        .iter()
        .enumerate()
        .map(|(r, &i)| if r < cut { eta[i] } else { 1.0 - eta[i] })
        .sum();
    correct / order.len() as f64
}

/// Expected accuracy when the top `cut` ranked items are predicted positive.
pub fn expected_accuracy(eta: &RelevanceVector, perm: &Permutation, cut: usize) -> Result<f64> {
    check_lengths(eta, perm)?;
    if cut > perm.len() {
        return Err(invalid(format!("cut {cut} beyond list length {}", perm.len())));
    }
    Ok(expected_accuracy_ordered(eta.values(), perm.order(), cut))
}

/// Bayes accuracy `mean_i max(eta_i, 1 - eta_i)`.
pub fn bayes_accuracy(eta: &RelevanceVector) -> f64 {
    eta.values().iter().map(|&e| e.max(1.0 - e)).sum::<f64>() / eta.len() as f64
}

/// Optimal orderings of a finite instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalSet {
    pub spec: MetricSpec,
    /// Sorted lexicographically.
    pub permutations: Vec<Permutation>,
    pub max_utility: f64,
    pub tolerance: f64,
}

impl OptimalSet {
    pub fn contains(&self, perm: &Permutation) -> bool {
        self.permutations.binary_search(perm).is_ok()
    }

    pub fn len(&self) -> usize {
        self.permutations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutations.is_empty()
    }

    /// First member of `self` missing from `other`, if any.
    pub fn first_outside(&self, other: &OptimalSet) -> Option<&Permutation> {
        self.permutations.iter().find(|p| !other.contains(p))
    }

    pub fn is_subset_of(&self, other: &OptimalSet) -> bool {
        self.first_outside(other).is_none()
    }

    pub fn same_members(&self, other: &OptimalSet) -> bool {
        self.permutations == other.permutations
    }
}

/// Expected utility of every ordering of `0..n`, in lexicographic order.
/// For accuracy each ordering gets its best cut position.
pub fn utilities_over_permutations(
    spec: &MetricSpec,
    eta: &RelevanceVector,
    perms: &[Permutation],
) -> Result<Vec<f64>> {
    let oracle = Oracle::new(spec, eta.values(), false)?;
    let eta = eta.values();
    Ok(perms
        .par_iter()
        .map_init(Vec::new, |scratch, p| oracle.utility(eta, p.order(), scratch))
        .collect())
}

pub fn bayes_optimal_set(spec: &MetricSpec, eta: &RelevanceVector) -> Result<OptimalSet> {
    let n = eta.len();
    if n > OPTIMAL_SET_LIMIT {
        return Err(Error::Capacity {
            what: "Bayes-optimal set enumeration",
            n,
            limit: OPTIMAL_SET_LIMIT,
        });
    }
    let perms = all_permutations(n);
    optimal_set_among(spec, eta, perms)
}

/// Like [`bayes_optimal_set`] but over a caller-supplied permutation list,
/// so sweeps over many instances of one size enumerate orderings once.
pub fn optimal_set_among(spec: &MetricSpec, eta: &RelevanceVector, perms: Vec<Permutation>) -> Result<OptimalSet> {
    let utilities = utilities_over_permutations(spec, eta, &perms)?;
    let max_utility = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut permutations: Vec<Permutation> = perms
        .into_iter()
        .zip(&utilities)
        .filter(|(_, &u)| u >= max_utility - OPTIMAL_SET_TOLERANCE)
        .map(|(p, _)| p)
        .collect();
    permutations.sort();
    Ok(OptimalSet {
        spec: *spec,
        permutations,
        max_utility,
        tolerance: OPTIMAL_SET_TOLERANCE,
    })
}

/// `eta_i > eta_j  =>  s_i > s_j` for every pair.
pub fn is_order_preserving(scores: &ScoreVector, eta: &RelevanceVector) -> Result<bool> {
    if scores.len() != eta.len() {
        return Err(invalid("scores and eta differ in length"));
    }
    let s = scores.values();
    let e = eta.values();
    // sort by eta descending; every strictly-higher eta block must score above
    // everything that follows it
    let mut idx: Vec<usize> = (0..e.len()).collect();
    idx.sort_by(|&a, &b| e[b].total_cmp(&e[a]));
    let mut min_above = f64::INFINITY;
    let mut block_min = f64::INFINITY;
    let mut block_eta = f64::NAN;
    for &i in &idx {
        if e[i] != block_eta {
            min_above = min_above.min(block_min);
            block_min = f64::INFINITY;
            block_eta = e[i];
        }
        if s[i] >= min_above {
            return Ok(false);
        }
        block_min = block_min.min(s[i]);
    }
    Ok(true)
}

/// `(s_i - tau)(eta_i - 0.5) > 0` for every item.
pub fn is_sign_consistent(scores: &ScoreVector, eta: &RelevanceVector, tau: f64) -> Result<bool> {
    if scores.len() != eta.len() {
        return Err(invalid("scores and eta differ in length"));
    }
    if let Some(index) = eta.values().iter().position(|&e| e == 0.5) {
        return Err(Error::MarginViolation { index });
    }
    Ok(scores
        .values()
        .iter()
        .zip(eta.values())
        .all(|(s, e)| (s - tau) * (e - 0.5) > 0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subsumption {
    pub holds: bool,
    /// Optimal for the first metric but not the second.
    pub witness: Option<Permutation>,
}

/// Whether every optimal ordering of `a` is optimal for `b`.
pub fn check_subsumption(a: &MetricSpec, b: &MetricSpec, eta: &RelevanceVector) -> Result<Subsumption> {
    let set_a = bayes_optimal_set(a, eta)?;
    let set_b = bayes_optimal_set(b, eta)?;
    let witness = set_a.first_outside(&set_b).cloned();
    Ok(Subsumption {
        holds: witness.is_none(),
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::LogBase;

    fn eta(v: &[f64]) -> RelevanceVector {
        RelevanceVector::new(v.to_vec()).unwrap()
    }

    fn perm(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    fn scores(v: &[f64]) -> ScoreVector {
        ScoreVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn dcg_with_deterministic_labels() {
        let u = expected_utility(&MetricSpec::dcg(), &eta(&[1.0, 1.0, 0.0]), &Permutation::identity(3)).unwrap();
        assert_eq!(u.method, UtilityMethod::GaddLinear);
        assert!((u.value - (1.0 + 1.0 / 3f64.log2())).abs() < 1e-12);
    }

    #[test]
    fn auc_deterministic_pair() {
        let u = expected_utility(&MetricSpec::auc(), &eta(&[1.0, 0.0]), &Permutation::identity(2)).unwrap();
        assert_eq!(u.method, UtilityMethod::ExactEnumeration);
        assert_eq!(u.value, 1.0);
    }

    #[test]
    fn ndcg_two_items_by_hand() {
        // labels (1,1) 0.24 -> 1; (1,0) 0.56 -> 1; (0,1) 0.06 -> 1/log2(3); (0,0) 0.14 -> 0
        let u = expected_utility(&MetricSpec::ndcg(), &eta(&[0.8, 0.3]), &Permutation::identity(2)).unwrap();
        let expected = 0.24 + 0.56 + 0.06 / 3f64.log2();
        assert!((u.value - expected).abs() < 1e-12);
    }

    #[test]
    fn linear_and_enumerated_routes_agree_for_dcg() {
        let e = eta(&[0.9, 0.2, 0.55, 0.7, 0.1]);
        let p = perm(&[2, 0, 4, 1, 3]);
        let spec = MetricSpec::dcg().with_log_base(LogBase::Natural).at(4);
        let lin = expected_utility(&spec, &e, &p).unwrap().value;
        let ex = expected_utility_exact(&spec, &e, &p).unwrap().value;
        assert!((lin - ex).abs() < 1e-12);
        let p3 = MetricSpec::precision_at(3);
        let lin = expected_utility(&p3, &e, &p).unwrap().value;
        let ex = expected_utility_exact(&p3, &e, &p).unwrap().value;
        assert!((lin - ex).abs() < 1e-12);
    }

    #[test]
    fn enumeration_capacity() {
        let e = RelevanceVector::new(vec![0.5; 15]).unwrap();
        let err = expected_utility(&MetricSpec::auc(), &e, &Permutation::identity(15)).unwrap_err();
        assert!(matches!(err, Error::Capacity { limit: 14, .. }));
        let e9 = RelevanceVector::new(vec![0.5; 9]).unwrap();
        assert!(matches!(
            bayes_optimal_set(&MetricSpec::ndcg(), &e9),
            Err(Error::Capacity { limit: 8, .. })
        ));
    }

    #[test]
    fn descending_eta_is_unique_optimum() {
        let set = bayes_optimal_set(&MetricSpec::ndcg(), &eta(&[0.9, 0.1])).unwrap();
        assert_eq!(set.permutations, vec![Permutation::identity(2)]);
    }

    #[test]
    fn symmetric_eta_admits_everything() {
        for spec in [MetricSpec::dcg(), MetricSpec::precision_at(1), MetricSpec::recall_at(1)] {
            let set = bayes_optimal_set(&spec, &eta(&[0.5, 0.5])).unwrap();
            assert_eq!(set.len(), 2, "{spec}");
        }
    }

    #[test]
    fn accuracy_set_ignores_within_class_order() {
        let set = bayes_optimal_set(&MetricSpec::acc(), &eta(&[0.9, 0.6, 0.2])).unwrap();
        assert_eq!(set.permutations, vec![perm(&[0, 1, 2]), perm(&[1, 0, 2])]);
    }

    #[test]
    fn order_preservation() {
        let e = eta(&[0.7, 0.7, 0.2]);
        assert!(is_order_preserving(&scores(&[0.7, 0.7, 0.2]), &e).unwrap());
        assert!(is_order_preserving(&scores(&[0.5, 0.9, 0.1]), &e).unwrap());
        assert!(!is_order_preserving(&scores(&[0.5, 0.9, 0.6]), &e).unwrap());
        assert!(!is_order_preserving(&scores(&[0.1, 0.9]), &eta(&[0.8, 0.6])).unwrap());
        // equal scores across a strict eta gap violate the strict inequality
        assert!(!is_order_preserving(&scores(&[0.5, 0.5]), &eta(&[0.8, 0.6])).unwrap());
    }

    #[test]
    fn sign_consistency() {
        let e = eta(&[0.8, 0.2]);
        assert!(is_sign_consistent(&scores(&[0.9, 0.1]), &e, 0.5).unwrap());
        assert!(!is_sign_consistent(&scores(&[0.4, 0.1]), &e, 0.5).unwrap());
        let rev = is_sign_consistent(&scores(&[0.6, 0.9, 0.1]), &eta(&[0.8, 0.7, 0.2]), 0.5);
        assert!(rev.unwrap());
        let err = is_sign_consistent(&scores(&[0.6, 0.4]), &eta(&[0.5, 0.2]), 0.5).unwrap_err();
        assert_eq!(err, Error::MarginViolation { index: 0 });
    }

    #[test]
    fn subsumption_relations() {
        let e = eta(&[0.9, 0.6, 0.2]);
        assert!(check_subsumption(&MetricSpec::ndcg(), &MetricSpec::acc(), &e).unwrap().holds);
        assert!(check_subsumption(&MetricSpec::ndcg().at(3), &MetricSpec::ndcg().at(1), &e).unwrap().holds);
        let s = check_subsumption(&MetricSpec::acc(), &MetricSpec::auc(), &e).unwrap();
        assert!(!s.holds);
        assert_eq!(s.witness, Some(perm(&[1, 0, 2])));
    }
}
