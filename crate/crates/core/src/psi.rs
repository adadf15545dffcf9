//! Brute-force regret transfer functions over every ordering of a small list.
//!
//! `Psi(eps)` is the largest target regret among orderings (and, when
//! accuracy is involved, cut positions) whose source regret is at most `eps`.
//! Regrets are absolute throughout.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{bayes_accuracy, expected_accuracy, utilities_over_permutations};
use crate::error::{invalid, Error, Result};
use crate::eval::{accuracy_at_cut, ranked_regret};
use crate::instance::{all_permutations, LabeledList, Permutation, RelevanceVector};
use crate::metric::{LogBase, MetricKind, MetricSpec};
use crate::transfer::{direction_regrets, margin_counts, Direction, TransferBound};

pub const PSI_LIMIT: usize = 9;

/// Slack allowed when checking `target <= C * source`.
pub const DOMINANCE_SLACK: f64 = 1e-9;

/// Regrets below this are treated as zero when forming ratios.
pub const ZERO_REGRET: f64 = 1e-12;

/// The fixed instance a transfer function is computed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "lowercase")]
pub enum PsiInstance {
    /// Realized binary labels; regrets from the metric values.
    Labels(LabeledList),
    /// Relevance probabilities; regrets are expected-utility gaps.
    Eta(RelevanceVector),
}

impl PsiInstance {
    pub fn len(&self) -> usize {
        match self {
            PsiInstance::Labels(l) => l.len(),
            PsiInstance::Eta(e) => e.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_capacity(n: usize) -> Result<()> {
    if n > PSI_LIMIT {
        return Err(Error::Capacity {
            what: "transfer-function enumeration",
            n,
            limit: PSI_LIMIT,
        });
    }
    Ok(())
}

/// One enumerated predictor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    /// Index into the lexicographic permutation list.
    pub perm: u32,
    /// Cut position when accuracy is involved.
    pub cut: Option<u8>,
    pub source: f64,
    pub target: f64,
}

/// Per-ordering regret of one metric, for every cut when it is accuracy.
enum RegretTable {
    Ranked(Vec<f64>),
    /// `[perm][cut]`, `cut` in `0..=n`.
    Cut(Vec<Vec<f64>>),
}

impl RegretTable {
    fn get(&self, perm: usize, cut: Option<u8>) -> f64 {
        match (self, cut) {
            (RegretTable::Ranked(v), _) => v[perm],
            (RegretTable::Cut(v), Some(c)) => v[perm][c as usize],
            (RegretTable::Cut(_), None) => unreachable!("cut required for accuracy"),
        }
    }
}

fn regret_table(spec: &MetricSpec, instance: &PsiInstance, perms: &[Permutation]) -> Result<RegretTable> {
    let n = instance.len();
    spec.cutoff(n)?;
    match (instance, spec.kind) {
        (PsiInstance::Labels(labels), MetricKind::Acc) => Ok(RegretTable::Cut(
            perms
                .par_iter()
                .map(|p| {
                    let ranked = labels.ranked(p).expect("same length");
                    (0..=n).map(|c| 1.0 - accuracy_at_cut(&ranked, c)).collect()
                })
                .collect(),
        )),
        (PsiInstance::Labels(labels), _) => {
            // surface undefined metrics once instead of per ordering
            ranked_regret(spec, labels.labels())?;
            Ok(RegretTable::Ranked(
                perms
                    .par_iter()
                    .map(|p| ranked_regret(spec, &labels.ranked(p).expect("same length")).expect("checked above"))
                    .collect(),
            ))
        }
        (PsiInstance::Eta(eta), MetricKind::Acc) => {
            let best = bayes_accuracy(eta);
            Ok(RegretTable::Cut(
                perms
                    .par_iter()
                    .map(|p| {
                        (0..=n)
                            .map(|c| (best - expected_accuracy(eta, p, c).expect("valid cut")).max(0.0))
                            .collect()
                    })
                    .collect(),
            ))
        }
        (PsiInstance::Eta(eta), _) => {
            let u = utilities_over_permutations(spec, eta, perms)?;
            let best = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(RegretTable::Ranked(u.into_iter().map(|v| best - v).collect()))
        }
    }
}

/// Source and target regret of every ordering (times cut when needed).
pub fn enumerate_regrets(
    source: &MetricSpec,
    target: &MetricSpec,
    instance: &PsiInstance,
) -> Result<(Vec<Permutation>, Vec<Candidate>)> {
    let n = instance.len();
    check_capacity(n)?;
    let perms = all_permutations(n);
    let s = regret_table(source, instance, &perms)?;
    let t = regret_table(target, instance, &perms)?;
    let uses_cut = source.kind == MetricKind::Acc || target.kind == MetricKind::Acc;
    let cuts: Vec<Option<u8>> = if uses_cut {
        (0..=n as u8).map(Some).collect()
    } else {
        vec![None]
    };
    let candidates = (0..perms.len())
        .flat_map(|p| {
            let (s, t) = (&s, &t);
            cuts.iter().map(move |&cut| Candidate {
                perm: p as u32,
                cut,
                source: s.get(p, cut),
                target: t.get(p, cut),
            })
        })
        .collect();
    Ok((perms, candidates))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "points")]
pub enum EpsGrid {
    /// Every distinct attainable source regret: the exact step function.
    Attainable,
    /// `points` evenly spaced values from 0 to the largest source regret.
    Uniform(usize),
}

impl Default for EpsGrid {
    fn default() -> Self {
        EpsGrid::Attainable
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiPoint {
    pub epsilon: f64,
    pub psi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiCurve {
    pub source: MetricSpec,
    pub target: MetricSpec,
    pub n: usize,
    pub instance: PsiInstance,
    pub points: Vec<PsiPoint>,
}

impl PsiCurve {
    /// `Psi(eps)` read off the step function.
    pub fn at(&self, eps: f64) -> f64 {
        self.points
            .iter()
            .take_while(|p| p.epsilon <= eps + ZERO_REGRET)
            .last()
            .map_or(0.0, |p| p.psi)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,psi\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p.epsilon, p.psi));
        }
        out
    }
}

/// Running maximum of target regret over candidates sorted by source regret.
fn step_function(candidates: &[Candidate]) -> Vec<PsiPoint> {
    let mut sorted: Vec<(f64, f64)> = candidates.iter().map(|c| (c.source, c.target)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut points: Vec<PsiPoint> = Vec::new();
    let mut running = f64::NEG_INFINITY;
    for (s, t) in sorted {
        running = running.max(t);
        match points.last_mut() {
            Some(last) if s - last.epsilon <= ZERO_REGRET => last.psi = running,
            _ => points.push(PsiPoint { epsilon: s, psi: running }),
        }
    }
    points
}

pub fn psi_brute(source: &MetricSpec, target: &MetricSpec, instance: &PsiInstance, grid: EpsGrid) -> Result<PsiCurve> {
    let (_, candidates) = enumerate_regrets(source, target, instance)?;
    let steps = step_function(&candidates);
    let mut curve = PsiCurve {
        source: *source,
        target: *target,
        n: instance.len(),
        instance: instance.clone(),
        points: steps,
    };
    if let EpsGrid::Uniform(m) = grid {
        if m < 2 {
            return Err(invalid("a uniform epsilon grid needs at least 2 points"));
        }
        let top = curve.points.last().map_or(0.0, |p| p.epsilon);
        curve.points = (0..m)
            .map(|i| {
                let epsilon = top * i as f64 / (m - 1) as f64;
                PsiPoint { epsilon, psi: curve.at(epsilon) }
            })
            .collect();
    }
    Ok(curve)
}

/// Orderings with zero source regret (for accuracy: with some zero-regret cut).
pub fn zero_regret_set(spec: &MetricSpec, instance: &PsiInstance) -> Result<Vec<Permutation>> {
    let (perms, candidates) = enumerate_regrets(spec, spec, instance)?;
    let mut hits: Vec<u32> = candidates
        .iter()
        .filter(|c| c.source <= ZERO_REGRET)
        .map(|c| c.perm)
        .collect();
    hits.dedup();
    Ok(hits.into_iter().map(|i| perms[i as usize].clone()).collect())
}

/// Outcome of checking `target <= C * source` over every ordering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundVerdict {
    pub direction: Direction,
    pub coefficient: f64,
    pub n: usize,
    pub candidates: usize,
    /// Every pair satisfies `target <= C * source + 1e-9`.
    pub dominance: bool,
    /// `max (target - C * source)`.
    pub worst_excess: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<Permutation>,
    /// `max target / source` over pairs with positive source regret.
    pub max_ratio: f64,
    /// `|max_ratio - C| <= 1e-9`.
    pub tight: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attaining: Option<Permutation>,
    pub attaining_source: f64,
    pub attaining_target: f64,
}

fn truncation_specs(bound: &TransferBound) -> Result<(MetricSpec, MetricSpec)> {
    let p = &bound.params;
    let (Some(kind), Some(k1), Some(k2)) = (p.metric, p.k1, p.k2) else {
        return Err(invalid("truncation bound without metric and cutoffs"));
    };
    let base = MetricSpec::new(kind).with_log_base(p.log_base);
    Ok((base.at(k2), base.at(k1)))
}

/// Source and target regrets of every ordering for a bound's direction.
pub fn direction_pairs(bound: &TransferBound, instance: &PsiInstance) -> Result<(Vec<Permutation>, Vec<(f64, f64)>)> {
    let n = instance.len();
    check_capacity(n)?;
    let direction = bound.direction;
    let (labels, eta) = match (direction.uses_margin(), instance) {
        (true, PsiInstance::Eta(eta)) => {
            margin_counts(eta)?;
            (eta.binarize(), Some(eta))
        }
        (true, PsiInstance::Labels(_)) => {
            return Err(invalid("accuracy directions are checked on a relevance vector"))
        }
        (false, PsiInstance::Labels(l)) => (l.clone(), None),
        (false, PsiInstance::Eta(_)) => return Err(invalid("this direction is checked on binary labels")),
    };
    let p = &bound.params;
    if p.n != n || (direction != Direction::Truncation && (p.n_pos != labels.n_pos())) {
        return Err(invalid(format!(
            "bound built for n = {}, n+ = {} but instance has n = {n}, n+ = {}",
            p.n,
            p.n_pos,
            labels.n_pos()
        )));
    }
    let perms = all_permutations(n);
    let pairs = if direction == Direction::Truncation {
        let (source, target) = truncation_specs(bound)?;
        let inst = PsiInstance::Labels(labels);
        let s = regret_table(&source, &inst, &perms)?;
        let t = regret_table(&target, &inst, &perms)?;
        (0..perms.len()).map(|i| (s.get(i, None), t.get(i, None))).collect()
    } else {
        perms
            .par_iter()
            .map(|perm| direction_regrets(direction, &labels, eta, perm, p.log_base))
            .collect::<Result<Vec<_>>>()?
    };
    Ok((perms, pairs))
}

pub fn verify_bound(bound: &TransferBound, instance: &PsiInstance) -> Result<BoundVerdict> {
    let (perms, pairs) = direction_pairs(bound, instance)?;
    let c = bound.coefficient;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut violation = None;
    let mut max_ratio = 0.0;
    let mut attaining: Option<usize> = None;
    for (i, &(a, b)) in pairs.iter().enumerate() {
        let excess = b - c * a;
        if excess > worst_excess {
            worst_excess = excess;
            if excess > DOMINANCE_SLACK {
                violation = Some(i);
            }
        }
        let ratio = if a > ZERO_REGRET {
            b / a
        } else if b > ZERO_REGRET {
            f64::INFINITY
        } else {
            continue;
        };
        if ratio > max_ratio {
            max_ratio = ratio;
            attaining = Some(i);
        }
    }
    let (attaining_source, attaining_target) = attaining.map_or((0.0, 0.0), |i| pairs[i]);
    Ok(BoundVerdict {
        direction: bound.direction,
        coefficient: c,
        n: instance.len(),
        candidates: pairs.len(),
        dominance: worst_excess <= DOMINANCE_SLACK,
        worst_excess,
        violation: violation.map(|i| perms[i].clone()),
        max_ratio,
        tight: (max_ratio - c).abs() <= DOMINANCE_SLACK,
        attaining: attaining.map(|i| perms[i].clone()),
        attaining_source,
        attaining_target,
    })
}

/// Outcome of checking that shallow-cutoff regret cannot control deep-cutoff
/// regret: some ordering is optimal at `k1` yet has positive regret at `k2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceVerdict {
    pub metric: MetricKind,
    pub k1: usize,
    pub k2: usize,
    pub diverges: bool,
    /// Largest regret at `k2` among orderings with zero regret at `k1`.
    pub psi_at_zero: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Permutation>,
}

pub fn verify_divergence(
    kind: MetricKind,
    k1: usize,
    k2: usize,
    labels: &LabeledList,
    base: LogBase,
) -> Result<DivergenceVerdict> {
    if !(1 <= k1 && k1 < k2 && k2 <= labels.len()) {
        return Err(invalid(format!("need 1 <= k1 < k2 <= n, got k1 = {k1}, k2 = {k2}")));
    }
    let spec = MetricSpec::new(kind).with_log_base(base);
    let inst = PsiInstance::Labels(labels.clone());
    let (perms, candidates) = enumerate_regrets(&spec.at(k1), &spec.at(k2), &inst)?;
    let best = candidates
        .iter()
        .filter(|c| c.source <= ZERO_REGRET)
        .max_by(|a, b| a.target.total_cmp(&b.target))
        .copied();
    let psi_at_zero = best.map_or(0.0, |c| c.target);
    let diverges = psi_at_zero > ZERO_REGRET;
    Ok(DivergenceVerdict {
        metric: kind,
        k1,
        k2,
        diverges,
        psi_at_zero,
        witness: best.filter(|_| diverges).map(|c| perms[c.perm as usize].clone()),
    })
}
