mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regret_transfer::bayes::{expected_utility, expected_utility_exact};
use regret_transfer::eval::{eval_metric, eval_metric_acc};
use regret_transfer::instance::{all_permutations, rank_by_scores, LabeledList, RelevanceVector, ScoreVector};
use regret_transfer::metric::{MetricKind, MetricSpec};

fn compare(kind: MetricKind, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..2000 {
        let (labels, scores) = common::random_list(&mut rng, 10);
        let spec = common::random_spec(&mut rng, kind, labels.len());
        let want = common::naive_metric(&spec, &labels, &scores);
        let l = LabeledList::new(labels.clone()).unwrap();
        let s = ScoreVector::new(scores.clone()).unwrap();
        let got = if kind == MetricKind::Acc {
            eval_metric_acc(&spec, &l, &s).ok()
        } else {
            eval_metric(&spec, &l, &rank_by_scores(&s)).ok()
        };
        let same = match (want, got) {
            (Some(a), Some(b)) if matches!(kind, MetricKind::Ndcg | MetricKind::Dcg) => (a - b).abs() <= 1e-12,
            (a, b) => a == b,
        };
        assert!(same, "{} on {labels:?} / {scores:?}: naive {want:?}, library {got:?}", spec.label());
    }
}

#[test]
fn accuracy_matches_reference() {
    compare(MetricKind::Acc, 1);
}

#[test]
fn precision_matches_reference() {
    compare(MetricKind::Precision, 2);
}

#[test]
fn recall_matches_reference() {
    compare(MetricKind::Recall, 3);
}

#[test]
fn auc_matches_reference() {
    compare(MetricKind::Auc, 4);
}

#[test]
fn ndcg_matches_reference() {
    compare(MetricKind::Ndcg, 5);
}

#[test]
fn dcg_matches_reference() {
    compare(MetricKind::Dcg, 6);
}

#[test]
fn map_matches_reference() {
    compare(MetricKind::Map, 7);
}

#[test]
fn mrr_matches_reference() {
    compare(MetricKind::Mrr, 8);
}

/// Expected utility by brute force over all 2^n label vectors, weighted by
/// their probability.
fn naive_expected(spec: &MetricSpec, eta: &[f64], order: &[usize]) -> f64 {
    let n = eta.len();
    let mut scores = vec![0.0; n];
    for (r, &i) in order.iter().enumerate() {
        scores[i] = (n - r) as f64;
    }
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        let labels: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let p: f64 = (0..n).map(|i| if labels[i] { eta[i] } else { 1.0 - eta[i] }).product();
        total += p * common::naive_metric(spec, &labels, &scores).unwrap_or(0.0);
    }
    total
}

#[test]
fn expected_utility_matches_label_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let kinds = [MetricKind::Precision, MetricKind::Recall, MetricKind::Auc, MetricKind::Ndcg, MetricKind::Map, MetricKind::Mrr];
    for _ in 0..40 {
        let n = rng.gen_range(2..=6);
        let eta = RelevanceVector::new((0..n).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap();
        let perms = all_permutations(n);
        for kind in kinds {
            let spec = common::random_spec(&mut rng, kind, n);
            let perm = &perms[rng.gen_range(0..perms.len())];
            let want = naive_expected(&spec, eta.values(), perm.order());
            let fast = expected_utility(&spec, &eta, perm).unwrap().value;
            let exact = expected_utility_exact(&spec, &eta, perm).unwrap().value;
            // the fast recall path fixes n+ at its expectation, so only the exact one is compared
            if kind != MetricKind::Recall {
                assert!((fast - want).abs() < 1e-12, "{}: {fast} vs {want}", spec.label());
            }
            assert!((exact - want).abs() < 1e-12, "{}: {exact} vs {want}", spec.label());
        }
    }
}
