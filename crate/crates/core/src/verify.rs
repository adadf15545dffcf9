//! Exhaustive checks of the transfer bounds and optimal-set relations over
//! every small instance, grouped the way the `verify` command reports them.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::bayes::{expected_utility, optimal_set_among, OptimalSet, OPTIMAL_SET_LIMIT};
use crate::error::{invalid, Error, Result};
use crate::instance::{all_permutations, rank_by_scores, LabeledList, Permutation, RelevanceVector};
use crate::metric::{LogBase, MetricKind, MetricSpec};
use crate::psi::{psi_brute, verify_bound, verify_divergence, EpsGrid, PsiInstance, PSI_LIMIT};
use crate::transfer::{
    bound_for, coeff_truncation, pointwise_failure_witness, worst_case_construct, BoundConfig, Direction,
    TruncationTransfer, TruncationWay,
};

pub const VERIFY_LIMIT: usize = PSI_LIMIT;

/// Relevance levels of the optimal-set grid.
pub const ETA_LEVELS: [f64; 4] = [0.1, 0.3, 0.6, 0.9];

/// Margins of the accuracy-direction instances.
pub const MARGINS: [f64; 3] = [0.1, 0.25, 0.4];

/// Minimum expected ranking regret of the pointwise witness.
pub const WITNESS_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckGroup {
    AucNdcg,
    NdcgAuc,
    AucAcc,
    NdcgAcc,
    Trunc,
    TruncReverse,
    Sets,
    Pointwise,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 8] = [
        CheckGroup::AucNdcg,
        CheckGroup::NdcgAuc,
        CheckGroup::AucAcc,
        CheckGroup::NdcgAcc,
        CheckGroup::Trunc,
        CheckGroup::TruncReverse,
        CheckGroup::Sets,
        CheckGroup::Pointwise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckGroup::AucNdcg => "auc-ndcg",
            CheckGroup::NdcgAuc => "ndcg-auc",
            CheckGroup::AucAcc => "auc-acc",
            CheckGroup::NdcgAcc => "ndcg-acc",
            CheckGroup::Trunc => "trunc",
            CheckGroup::TruncReverse => "trunc-reverse",
            CheckGroup::Sets => "sets",
            CheckGroup::Pointwise => "pointwise",
        }
    }
}

impl std::str::FromStr for CheckGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckGroup::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| invalid(format!("unknown check group `{s}`")))
    }
}

/// Outcome of one property over a family of instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub passed: bool,
    /// Reported, but does not decide the overall verdict.
    pub informational: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            cases: 0,
            failures: 0,
            passed: true,
            informational: false,
            witness: None,
            detail: String::new(),
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            self.passed = false;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }

    fn informational(mut self) -> Self {
        self.informational = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    pub n_max: usize,
    pub groups: Vec<CheckGroup>,
    pub bounds: BoundConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n_max: 7,
            groups: CheckGroup::ALL.to_vec(),
            bounds: BoundConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
}

fn fmt_labels(l: &LabeledList) -> String {
    let v: Vec<u8> = l.labels().iter().map(|&y| y as u8).collect();
    format!("{v:?}")
}

fn fmt_perm(p: &Permutation) -> String {
    format!("{:?}", p.one_based())
}

/// One label list per class split `1 <= n+ <= n-1`, positives first.
/// Every labeling of size `n` is a relabeling of one of these.
pub fn label_multisets(n: usize) -> Vec<LabeledList> {
    (1..n)
        .map(|p| LabeledList::with_counts(p, n - p).expect("non-empty"))
        .collect()
}

/// Non-increasing relevance vectors over `levels` (one per multiset).
pub fn eta_multisets(levels: &[f64], n: usize) -> Vec<RelevanceVector> {
    let mut desc = levels.to_vec();
    desc.sort_by(|a, b| b.total_cmp(a));
    (0..n)
        .map(|_| 0..desc.len())
        .multi_cartesian_product()
        .filter(|idx| idx.windows(2).all(|w| w[0] <= w[1]))
        .map(|idx| RelevanceVector::new(idx.iter().map(|&i| desc[i]).collect()).expect("levels in [0, 1]"))
        .collect()
}

/// Every assignment of `levels` to `n` items.
pub fn eta_assignments(levels: &[f64], n: usize) -> Vec<RelevanceVector> {
    (0..n)
        .map(|_| levels.iter().copied())
        .multi_cartesian_product()
        .map(|v| RelevanceVector::new(v).expect("levels in [0, 1]"))
        .collect()
}

/// Relevance vectors with margin exactly `delta` and both Bayes classes,
/// built from the levels `0.5 +/- delta` and `0.5 +/- (delta + 0.5) / 2`.
pub fn margin_etas(delta: f64, n: usize) -> Vec<RelevanceVector> {
    let outer = (delta + 0.5) / 2.0;
    let levels = [0.5 - outer, 0.5 - delta, 0.5 + delta, 0.5 + outer];
    eta_multisets(&levels, n)
        .into_iter()
        .filter(|e| {
            let v = e.values();
            v.iter().any(|&x| x > 0.5)
                && v.iter().any(|&x| x < 0.5)
                && (e.margin() - delta).abs() < 1e-12
        })
        .collect()
}

fn ensure_capacity(n_max: usize, limit: usize, what: &'static str) -> Result<()> {
    if n_max > limit {
        return Err(Error::Capacity { what, n: n_max, limit });
    }
    Ok(())
}

/// `target <= C * source` on every ordering of every label split.
pub fn check_label_dominance(direction: Direction, n_max: usize, cfg: &BoundConfig) -> Result<CheckResult> {
    ensure_capacity(n_max, VERIFY_LIMIT, "bound verification")?;
    let mut res = CheckResult::new(format!("{}: dominance", direction.name()));
    let mut worst: f64 = f64::NEG_INFINITY;
    for n in 3..=n_max {
        for labels in label_multisets(n) {
            let bound = bound_for(direction, labels.n_pos(), labels.n_neg(), cfg)?;
            let v = verify_bound(&bound, &PsiInstance::Labels(labels.clone()))?;
            worst = worst.max(v.worst_excess);
            res.record(v.dominance, || {
                format!(
                    "labels {} ordering {} excess {:.3e}",
                    fmt_labels(&labels),
                    v.violation.as_ref().map_or(String::new(), fmt_perm),
                    v.worst_excess
                )
            });
        }
    }
    res.detail = format!("largest target - C * source = {worst:.3e}");
    Ok(res)
}

/// The constructed instance reaches ratio `C` for every class split.
pub fn check_construct_tightness(direction: Direction, n_min: usize, n_max: usize, cfg: &BoundConfig) -> Result<CheckResult> {
    let mut res = CheckResult::new(format!("{}: construct attains C", direction.name()));
    let mut hits = Vec::new();
    for n in n_min.max(3)..=n_max {
        for n_pos in 1..n {
            let wc = worst_case_construct(direction, n, n_pos, cfg)?;
            let ok = (wc.ratio - wc.coefficient).abs() <= 1e-9;
            if ok {
                hits.push(format!("({n},{n_pos})"));
            }
            res.record(ok, || {
                format!(
                    "n = {n}, n+ = {n_pos}: ratio {:.6} vs C {:.6}",
                    wc.ratio, wc.coefficient
                )
            });
        }
    }
    res.detail = format!("attained at (n, n+) in {{{}}}", hits.join(", "));
    Ok(res)
}

/// The largest enumerated ratio equals `C` for every class split.
pub fn check_enumerated_tightness(direction: Direction, n_max: usize, cfg: &BoundConfig) -> Result<CheckResult> {
    ensure_capacity(n_max, VERIFY_LIMIT, "bound verification")?;
    let mut res = CheckResult::new(format!("{}: enumerated sup ratio equals C", direction.name()));
    let mut lowest = f64::INFINITY;
    for n in 3..=n_max {
        for labels in label_multisets(n) {
            let bound = bound_for(direction, labels.n_pos(), labels.n_neg(), cfg)?;
            let v = verify_bound(&bound, &PsiInstance::Labels(labels.clone()))?;
            lowest = lowest.min(v.max_ratio / v.coefficient);
            res.record(v.tight, || {
                format!(
                    "labels {}: sup ratio {:.6} vs C {:.6}",
                    fmt_labels(&labels),
                    v.max_ratio,
                    v.coefficient
                )
            });
        }
    }
    res.detail = format!("smallest sup-ratio / C = {lowest:.4}");
    Ok(res)
}

/// Margin-regime dominance over every relevance multiset with margin in `deltas`.
pub fn check_margin_dominance(direction: Direction, n_max: usize, deltas: &[f64], cfg: &BoundConfig) -> Result<CheckResult> {
    ensure_capacity(n_max, VERIFY_LIMIT, "bound verification")?;
    let mut res = CheckResult::new(format!("{}: dominance", direction.name()));
    let mut worst = f64::NEG_INFINITY;
    for &delta in deltas {
        let c = BoundConfig { delta, ..*cfg };
        for n in 3..=n_max {
            for eta in margin_etas(delta, n) {
                let labels = eta.binarize();
                let bound = bound_for(direction, labels.n_pos(), labels.n_neg(), &c)?;
                let v = verify_bound(&bound, &PsiInstance::Eta(eta.clone()))?;
                worst = worst.max(v.worst_excess);
                res.record(v.dominance, || {
                    format!(
                        "delta {delta}, eta {:?}, ordering {}: excess {:.3e}",
                        eta.values(),
                        v.violation.as_ref().map_or(String::new(), fmt_perm),
                        v.worst_excess
                    )
                });
            }
        }
    }
    res.detail = format!("largest target - C * source = {worst:.3e}");
    Ok(res)
}

/// Margin-regime constructs reach `C` for every split and margin.
pub fn check_margin_tightness(direction: Direction, n_min: usize, n_max: usize, deltas: &[f64], cfg: &BoundConfig) -> Result<CheckResult> {
    let mut res = CheckResult::new(format!("{}: construct attains C", direction.name()));
    let mut extreme = (f64::INFINITY, f64::NEG_INFINITY);
    for &delta in deltas {
        let c = BoundConfig { delta, ..*cfg };
        for n in n_min.max(3)..=n_max {
            for n_pos in 1..n {
                let wc = worst_case_construct(direction, n, n_pos, &c)?;
                let r = wc.ratio / wc.coefficient;
                extreme = (extreme.0.min(r), extreme.1.max(r));
                res.record((wc.ratio - wc.coefficient).abs() <= 1e-9, || {
                    format!(
                        "delta {delta}, n = {n}, n+ = {n_pos}: ratio {:.6} vs C {:.6}",
                        wc.ratio, wc.coefficient
                    )
                });
            }
        }
    }
    res.detail = format!("ratio / C ranges over [{:.4}, {:.4}]", extreme.0, extreme.1);
    Ok(res)
}

/// Which label splits a truncation check covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruncRegime {
    /// Every split and every `k1 < k2`.
    All,
    /// Only `n+ >= k2`, where the top `k2` can be filled with positives.
    EnoughPositives,
}

/// Downward truncation `k2 -> k1` dominance for one metric.
pub fn check_truncation(kind: MetricKind, n_max: usize, base: LogBase, regime: TruncRegime) -> Result<CheckResult> {
    ensure_capacity(n_max, VERIFY_LIMIT, "bound verification")?;
    let scope = match regime {
        TruncRegime::All => "all splits",
        TruncRegime::EnoughPositives => "n+ >= k2",
    };
    let mut res = CheckResult::new(format!("trunc {kind}@k2 -> {kind}@k1: dominance ({scope})"));
    let spec = MetricSpec::new(kind).with_log_base(base);
    for n in 2..=n_max {
        for labels in label_multisets(n) {
            for (k1, k2) in (1..=n).tuple_combinations() {
                if regime == TruncRegime::EnoughPositives && labels.n_pos() < k2 {
                    continue;
                }
                let TruncationTransfer::Bounded(bound) =
                    coeff_truncation(k1, k2, TruncationWay::Down, &spec, &labels)?
                else {
                    unreachable!("downward truncation is bounded")
                };
                let v = verify_bound(&bound, &PsiInstance::Labels(labels.clone()))?;
                res.record(v.dominance, || {
                    format!(
                        "labels {}, k1 = {k1}, k2 = {k2}, ordering {}: regret@k2 {:.4}, regret@k1 exceeds C * that by {:.4}",
                        fmt_labels(&labels),
                        v.violation.as_ref().map_or(String::new(), fmt_perm),
                        v.attaining_source,
                        v.worst_excess
                    )
                });
            }
        }
    }
    res.detail = format!("{} of {} (labels, k1, k2) cases violate", res.failures, res.cases);
    Ok(res)
}

/// Upward truncation: some split shows an ordering optimal at `k1` with
/// positive regret at `k2`, for every `k1 < k2 <= n`.
pub fn check_truncation_divergence(kind: MetricKind, n_max: usize, base: LogBase) -> Result<CheckResult> {
    ensure_capacity(n_max, VERIFY_LIMIT, "divergence verification")?;
    let mut res = CheckResult::new(format!("trunc {kind}@k1 -> {kind}@k2: divergence"));
    for n in 3..=n_max {
        for (k1, k2) in (1..n).tuple_combinations() {
            let mut found = None;
            for labels in label_multisets(n) {
                let v = verify_divergence(kind, k1, k2, &labels, base)?;
                if v.diverges {
                    found = Some((labels, v));
                    break;
                }
            }
            res.record(found.is_some(), || format!("n = {n}, k1 = {k1}, k2 = {k2}: no divergent split"));
        }
    }
    res.detail = "Psi(0) > 0 found for every (n, k1, k2)".into();
    if !res.passed {
        res.detail = format!("{} (n, k1, k2) without divergence", res.failures);
    }
    Ok(res)
}

/// Optimal sets of the metrics compared by the set checks, for one instance.
struct InstanceSets {
    ndcg: OptimalSet,
    auc: OptimalSet,
    acc: OptimalSet,
    map: OptimalSet,
    mrr: OptimalSet,
    /// `[k - 1]` for `k = 1..=n`.
    ndcg_at: Vec<OptimalSet>,
    p_at: Vec<OptimalSet>,
    r_at: Vec<OptimalSet>,
}

fn instance_sets(eta: &RelevanceVector, perms: &[Permutation]) -> Result<InstanceSets> {
    let n = eta.len();
    let set = |spec: MetricSpec| optimal_set_among(&spec, eta, perms.to_vec());
    let at = |kind: MetricKind| -> Result<Vec<OptimalSet>> {
        (1..=n).map(|k| set(MetricSpec::new(kind).at(k))).collect()
    };
    Ok(InstanceSets {
        ndcg: set(MetricSpec::ndcg())?,
        auc: set(MetricSpec::auc())?,
        acc: set(MetricSpec::acc())?,
        map: set(MetricSpec::map())?,
        mrr: set(MetricSpec::mrr())?,
        ndcg_at: at(MetricKind::Ndcg)?,
        p_at: at(MetricKind::Precision)?,
        r_at: at(MetricKind::Recall)?,
    })
}

fn all_distinct(v: &[f64]) -> bool {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    s.windows(2).all(|w| w[0] != w[1])
}

/// Optimal-set relations over the given relevance vectors.
pub fn check_set_relations(etas: &[RelevanceVector]) -> Result<Vec<CheckResult>> {
    if let Some(e) = etas.iter().find(|e| e.len() > OPTIMAL_SET_LIMIT) {
        return Err(Error::Capacity {
            what: "Bayes-optimal set enumeration",
            n: e.len(),
            limit: OPTIMAL_SET_LIMIT,
        });
    }
    let mut eq = CheckResult::new("sets: NDCG = AUC");
    let mut sub = CheckResult::new("sets: NDCG, MAP, MRR within Acc");
    let mut strict = CheckResult::new("sets: some Acc-optimal ordering is not NDCG-optimal");
    let mut nest = [
        CheckResult::new("sets: NDCG@k nesting"),
        CheckResult::new("sets: P@k nesting"),
        CheckResult::new("sets: R@k nesting"),
    ];
    let mut pr = CheckResult::new("sets: P@k = R@k");
    let mut prp = CheckResult::new("sets: MAP = MRR = NDCG (distinct eta)");
    let mut strict_witness = None;

    let mut perms_by_n: Vec<Vec<Permutation>> = Vec::new();
    for eta in etas {
        let n = eta.len();
        while perms_by_n.len() <= n {
            perms_by_n.push(all_permutations(perms_by_n.len()));
        }
        let s = instance_sets(eta, &perms_by_n[n])?;
        let tag = || format!("eta {:?}", eta.values());

        eq.record(s.ndcg.same_members(&s.auc), tag);
        let inside = [&s.ndcg, &s.map, &s.mrr].iter().all(|x| x.is_subset_of(&s.acc));
        sub.record(inside, tag);
        if strict_witness.is_none() {
            if let Some(p) = s.acc.first_outside(&s.ndcg) {
                strict_witness = Some(format!("{} with ordering {}", tag(), fmt_perm(p)));
            }
        }
        for (check, sets) in nest.iter_mut().zip([&s.ndcg_at, &s.p_at, &s.r_at]) {
            for (k1, k2) in (1..=n).tuple_combinations() {
                let deep = &sets[k2 - 1];
                let shallow = &sets[k1 - 1];
                check.record(deep.is_subset_of(shallow), || {
                    format!(
                        "{}, k1 = {k1}, k2 = {k2}: ordering {} optimal at k2 only",
                        tag(),
                        deep.first_outside(shallow).map_or(String::new(), fmt_perm)
                    )
                });
            }
        }
        for k in 1..=n {
            pr.record(s.p_at[k - 1].same_members(&s.r_at[k - 1]), || format!("{}, k = {k}", tag()));
        }
        if all_distinct(eta.values()) {
            prp.record(s.map.same_members(&s.ndcg) && s.mrr.same_members(&s.ndcg), tag);
        }
    }
    strict.cases = 1;
    strict.passed = strict_witness.is_some();
    strict.failures = usize::from(!strict.passed);
    strict.witness = strict_witness;
    for c in [&mut eq, &mut sub, &mut pr, &mut prp] {
        c.detail = format!("{} of {} instances violate", c.failures, c.cases);
    }
    for c in nest.iter_mut() {
        c.detail = format!("{} of {} (eta, k1, k2) cases violate", c.failures, c.cases);
    }
    let [a, b, c] = nest;
    Ok(vec![eq, sub, strict, a, b, c, pr, prp])
}

/// Expected ranking regret of `perm` against the Bayes ordering.
fn expected_regret(spec: &MetricSpec, eta: &RelevanceVector, perm: &Permutation) -> Result<f64> {
    let best = expected_utility(spec, eta, &eta.bayes_order())?.value;
    Ok(best - expected_utility(spec, eta, perm)?.value)
}

/// The sign-consistent witness has zero accuracy regret and expected AUC and
/// NDCG regret of at least [`WITNESS_FLOOR`].
pub fn check_pointwise_witness(n_max: usize) -> Result<CheckResult> {
    let mut res = CheckResult::new("pointwise: sign-consistent witness has ranking regret");
    let mut floor = f64::INFINITY;
    for n in 2..=n_max.min(crate::bayes::EXACT_ENUMERATION_LIMIT) {
        let (eta, scores) = pointwise_failure_witness(n)?;
        let labels = eta.binarize();
        let acc_errors = labels
            .labels()
            .iter()
            .zip(scores.values())
            .filter(|(&y, &s)| y != (s > 0.5))
            .count();
        let perm = rank_by_scores(&scores);
        let auc = expected_regret(&MetricSpec::auc(), &eta, &perm)?;
        let ndcg = expected_regret(&MetricSpec::ndcg(), &eta, &perm)?;
        floor = floor.min(auc.min(ndcg));
        res.record(acc_errors == 0 && auc >= WITNESS_FLOOR && ndcg >= WITNESS_FLOOR, || {
            format!("n = {n}: {acc_errors} accuracy errors, AUC regret {auc:.4}, NDCG regret {ndcg:.4}")
        });
    }
    res.detail = format!("smallest ranking regret {floor:.4}");
    Ok(res)
}

/// Two items on the same side of 0.5 with different relevance.
pub fn has_distinct_same_class_pair(eta: &RelevanceVector) -> bool {
    let v = eta.values();
    (0..v.len())
        .tuple_combinations()
        .any(|(i, j)| (v[i] > 0.5) == (v[j] > 0.5) && v[i] != v[j])
}

/// `Psi_{Acc -> AUC}(0) > 0` on every relevance vector that has two
/// same-class items with different relevance.
pub fn check_accuracy_blindness(etas: &[RelevanceVector]) -> Result<CheckResult> {
    let mut res = CheckResult::new("pointwise: Psi Acc->AUC at 0 is positive");
    let mut floor = f64::INFINITY;
    for eta in etas.iter().filter(|e| has_distinct_same_class_pair(e)) {
        let curve = psi_brute(&MetricSpec::acc(), &MetricSpec::auc(), &PsiInstance::Eta(eta.clone()), EpsGrid::Attainable)?;
        let psi0 = curve.at(0.0);
        floor = floor.min(psi0);
        res.record(psi0 > 1e-12, || format!("eta {:?}: Psi(0) = {psi0:.3e}", eta.values()));
    }
    res.detail = format!("smallest Psi(0) = {floor:.4e}");
    Ok(res)
}

pub fn run_checks(cfg: &VerifyConfig) -> Result<VerifyReport> {
    ensure_capacity(cfg.n_max, VERIFY_LIMIT, "verify")?;
    if cfg.n_max < 3 {
        return Err(invalid("verify needs n_max >= 3"));
    }
    let b = &cfg.bounds;
    let n = cfg.n_max;
    let set_n = n.min(OPTIMAL_SET_LIMIT - 1);
    let mut checks = Vec::new();
    for group in &cfg.groups {
        match group {
            CheckGroup::AucNdcg | CheckGroup::NdcgAuc => {
                let d = if *group == CheckGroup::AucNdcg { Direction::AucToNdcg } else { Direction::NdcgToAuc };
                checks.push(check_label_dominance(d, n, b)?);
                checks.push(check_construct_tightness(d, 3, n, b)?.informational());
                checks.push(check_enumerated_tightness(d, n, b)?.informational());
            }
            CheckGroup::AucAcc | CheckGroup::NdcgAcc => {
                let d = if *group == CheckGroup::AucAcc { Direction::AucToAcc } else { Direction::NdcgToAcc };
                checks.push(check_margin_dominance(d, n, &MARGINS, b)?);
                checks.push(check_margin_tightness(d, 3, n, &MARGINS, b)?.informational());
            }
            CheckGroup::Trunc => {
                for kind in [MetricKind::Precision, MetricKind::Recall, MetricKind::Ndcg] {
                    checks.push(check_truncation(kind, n, b.log_base, TruncRegime::EnoughPositives)?);
                    checks.push(check_truncation(kind, n, b.log_base, TruncRegime::All)?.informational());
                }
            }
            CheckGroup::TruncReverse => {
                for kind in [MetricKind::Precision, MetricKind::Recall, MetricKind::Ndcg] {
                    checks.push(check_truncation_divergence(kind, n, b.log_base)?);
                }
            }
            CheckGroup::Sets => {
                let etas: Vec<RelevanceVector> = (2..=set_n).flat_map(|m| eta_multisets(&ETA_LEVELS, m)).collect();
                checks.extend(check_set_relations(&etas)?);
            }
            CheckGroup::Pointwise => {
                checks.push(check_pointwise_witness(n)?);
                let etas: Vec<RelevanceVector> = (2..=set_n).flat_map(|m| eta_multisets(&ETA_LEVELS, m)).collect();
                checks.push(check_accuracy_blindness(&etas)?);
            }
        }
    }
    let all_passed = checks.iter().all(|c| c.passed || c.informational);
    Ok(VerifyReport {
        config: cfg.clone(),
        checks,
        all_passed,
    })
}
