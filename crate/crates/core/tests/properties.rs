mod common;

use proptest::prelude::*;

use regret_transfer::bayes::expected_utility;
use regret_transfer::eval::{eval_metric, ideal_value, metric_regret};
use regret_transfer::instance::{rank_by_scores, LabeledList, Permutation, RelevanceVector, ScoreVector};
use regret_transfer::metric::{LogBase, MetricKind, MetricSpec};
use regret_transfer::psi::{psi_brute, EpsGrid, PsiInstance};
use regret_transfer::sim::{run_simulation, SimConfig};
use regret_transfer::transfer::{
    bound_for, coeff_auc_to_ndcg, coeff_ndcg_to_auc, delta_extremes, BoundConfig, Direction,
};

const NORMALIZED: [MetricKind; 6] = [
    MetricKind::Precision,
    MetricKind::Recall,
    MetricKind::Auc,
    MetricKind::Ndcg,
    MetricKind::Map,
    MetricKind::Mrr,
];

fn list(max: usize) -> impl Strategy<Value = (Vec<bool>, Vec<f64>)> {
    (1..=max).prop_flat_map(|n| {
        (
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec((0u8..16).prop_map(|v| v as f64 / 4.0), n),
        )
    })
}

fn both_classes(max: usize) -> impl Strategy<Value = (Vec<bool>, Vec<f64>)> {
    list(max).prop_filter("needs both classes", |(l, _)| l.iter().any(|&y| y) && l.iter().any(|&y| !y))
}

fn base() -> impl Strategy<Value = LogBase> {
    prop_oneof![
        Just(LogBase::Two),
        Just(LogBase::Natural),
        (1.1f64..20.0).prop_map(LogBase::Custom),
    ]
}

proptest! {
    #[test]
    fn values_lie_between_zero_and_ideal((labels, scores) in list(10), kind_idx in 0usize..6, k in 1usize..=10) {
        let kind = NORMALIZED[kind_idx];
        let mut spec = MetricSpec::new(kind);
        if kind.supports_truncation() && k <= labels.len() {
            spec = spec.at(k);
        }
        let l = LabeledList::new(labels).unwrap();
        let s = ScoreVector::new(scores).unwrap();
        if let Ok(r) = metric_regret(&spec, &l, &s) {
            prop_assert!(r.value >= 0.0);
            prop_assert!(r.value <= r.ideal + 1e-12);
            prop_assert!(r.ideal <= 1.0 + 1e-12);
            prop_assert!(r.regret_abs >= -1e-12);
        }
    }

    #[test]
    fn ranking_is_a_bijection(scores in prop::collection::vec(-5.0f64..5.0, 1..30)) {
        let s = ScoreVector::new(scores.clone()).unwrap();
        let perm = rank_by_scores(&s);
        let mut seen = perm.order().to_vec();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..scores.len()).collect::<Vec<_>>());
        let ranks = perm.ranks();
        for (r, &i) in perm.order().iter().enumerate() {
            prop_assert_eq!(ranks[i], r);
        }
        for w in perm.order().windows(2) {
            prop_assert!(scores[w[0]] >= scores[w[1]]);
        }
        prop_assert_eq!(common::ranks(&scores), ranks.iter().map(|r| r + 1).collect::<Vec<_>>());
    }

    #[test]
    fn auc_is_antisymmetric_under_reversal((labels, _) in both_classes(10), seed in any::<u64>()) {
        // distinct scores, so reversing the ranking swaps every pair
        let n = labels.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut x = seed;
        for i in (1..n).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (x >> 33) as usize % (i + 1));
        }
        let perm = Permutation::new(order.clone()).unwrap();
        order.reverse();
        let reversed = Permutation::new(order).unwrap();
        let l = LabeledList::new(labels).unwrap();
        let a = eval_metric(&MetricSpec::auc(), &l, &perm).unwrap();
        let b = eval_metric(&MetricSpec::auc(), &l, &reversed).unwrap();
        prop_assert!((a + b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn increasing_transforms_leave_metrics_unchanged((labels, scores) in list(10), kind_idx in 0usize..6) {
        let spec = MetricSpec::new(NORMALIZED[kind_idx]);
        let l = LabeledList::new(labels).unwrap();
        let s = ScoreVector::new(scores.clone()).unwrap();
        let t = ScoreVector::new(scores.iter().map(|v| (v * 0.5).exp() + 3.0).collect()).unwrap();
        let a = metric_regret(&spec, &l, &s).map(|r| r.value);
        let b = metric_regret(&spec, &l, &t).map(|r| r.value);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn full_depth_truncation_is_the_global_metric((labels, scores) in list(10), kind_idx in 0usize..6, b in base()) {
        let kind = NORMALIZED[kind_idx];
        prop_assume!(kind.supports_truncation());
        let n = labels.len();
        let l = LabeledList::new(labels).unwrap();
        let perm = rank_by_scores(&ScoreVector::new(scores).unwrap());
        let global = eval_metric(&MetricSpec::new(kind).with_log_base(b), &l, &perm);
        let at_n = eval_metric(&MetricSpec::new(kind).with_log_base(b).at(n), &l, &perm);
        prop_assert_eq!(global.ok(), at_n.ok());
    }

    #[test]
    fn ndcg_does_not_depend_on_the_base((labels, scores) in list(10), b in base()) {
        let l = LabeledList::new(labels).unwrap();
        let perm = rank_by_scores(&ScoreVector::new(scores).unwrap());
        let two = eval_metric(&MetricSpec::ndcg(), &l, &perm);
        let other = eval_metric(&MetricSpec::ndcg().with_log_base(b), &l, &perm);
        match (two, other) {
            (Ok(x), Ok(y)) => prop_assert!((x - y).abs() < 1e-12),
            (x, y) => prop_assert_eq!(x.is_err(), y.is_err()),
        }
    }

    #[test]
    fn ideal_arrangement_has_zero_regret((labels, _) in list(10), kind_idx in 0usize..6) {
        let spec = MetricSpec::new(NORMALIZED[kind_idx]);
        let l = LabeledList::new(labels).unwrap();
        let ideal_scores = ScoreVector::new(l.labels().iter().map(|&y| y as u8 as f64).collect()).unwrap();
        if let Ok(r) = metric_regret(&spec, &l, &ideal_scores) {
            prop_assert!(r.regret_abs.abs() < 1e-12);
            prop_assert_eq!(Ok(r.ideal), ideal_value(&spec, &l));
        }
    }

    #[test]
    fn coefficient_product_is_the_weight_ratio(n in 3usize..5000, frac in 0.0f64..1.0, b in base()) {
        let n_pos = 1 + ((n - 2) as f64 * frac) as usize;
        let rl = coeff_auc_to_ndcg(n_pos, n - n_pos, n, b).unwrap().coefficient;
        let lr = coeff_ndcg_to_auc(n_pos, n - n_pos, n, b).unwrap().coefficient;
        let d = delta_extremes(n, b).unwrap();
        let want = d.delta_max / d.delta_min;
        prop_assert!(((rl * lr - want) / want).abs() < 1e-12);
        let rl_e = coeff_auc_to_ndcg(n_pos, n - n_pos, n, LogBase::Natural).unwrap().coefficient;
        let lr_e = coeff_ndcg_to_auc(n_pos, n - n_pos, n, LogBase::Natural).unwrap().coefficient;
        prop_assert!(((rl - rl_e) / rl_e).abs() < 1e-12);
        prop_assert!(((lr - lr_e) / lr_e).abs() < 1e-12);
    }

    #[test]
    fn psi_is_non_decreasing((labels, _) in both_classes(6)) {
        let inst = PsiInstance::Labels(LabeledList::new(labels).unwrap());
        let curve = psi_brute(&MetricSpec::auc(), &MetricSpec::ndcg(), &inst, EpsGrid::Attainable).unwrap();
        for w in curve.points.windows(2) {
            prop_assert!(w[0].epsilon < w[1].epsilon);
            prop_assert!(w[0].psi <= w[1].psi);
        }
        prop_assert!(curve.at(0.0).abs() < 1e-12);
    }

    #[test]
    fn label_bounds_dominate((labels, scores) in both_classes(8), b in base()) {
        let l = LabeledList::new(labels).unwrap();
        prop_assume!(l.len() >= 3);
        let s = ScoreVector::new(scores).unwrap();
        let cfg = BoundConfig { log_base: b, ..BoundConfig::default() };
        let auc = metric_regret(&MetricSpec::auc(), &l, &s).unwrap().regret_abs;
        let ndcg = metric_regret(&MetricSpec::ndcg().with_log_base(b), &l, &s).unwrap().regret_abs;
        let rl = bound_for(Direction::AucToNdcg, l.n_pos(), l.n_neg(), &cfg).unwrap();
        let lr = bound_for(Direction::NdcgToAuc, l.n_pos(), l.n_neg(), &cfg).unwrap();
        prop_assert!(ndcg <= rl.psi(auc) + 1e-9);
        prop_assert!(auc <= lr.psi(ndcg) + 1e-9);
    }

    #[test]
    fn bayes_order_maximizes_expected_utility(eta in prop::collection::vec(0.0f64..=1.0, 2..7), seed in any::<u64>(), kind_idx in 0usize..6) {
        let spec = MetricSpec::new(NORMALIZED[kind_idx]);
        let e = RelevanceVector::new(eta).unwrap();
        let n = e.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut x = seed;
        for i in (1..n).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (x >> 33) as usize % (i + 1));
        }
        let best = expected_utility(&spec, &e, &e.bayes_order()).unwrap().value;
        let other = expected_utility(&spec, &e, &Permutation::new(order).unwrap()).unwrap().value;
        prop_assert!(other <= best + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn simulation_is_deterministic(seed in any::<u64>()) {
        let cfg = SimConfig { n: 60, snapshots: 12, seed, ..SimConfig::default() };
        let a = run_simulation(&cfg).unwrap();
        let b = run_simulation(&cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}
