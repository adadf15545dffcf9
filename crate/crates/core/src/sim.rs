//! Regret-manifold simulation: a Bayes relevance vector, loss-specific error
//! models that converge to it as `alpha -> 1`, and relative regret snapshots.
//!
//! Ranking regrets are ratios of expected utilities under `eta`: the pairwise
//! numerator `sum_{r<s} eta_(r) (1 - eta_(s))` for AUC and the graded DCG
//! `sum_i eta_(i) / log2(1 + i)` for NDCG. With labels thresholded at 0.5 a
//! class-preserving predictor would score a perfect AUC and NDCG, which would
//! erase the intra-class ordering errors the pointwise model is made of.
//! Accuracy uses the thresholded labels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::instance::{rank_values, RelevanceVector, ScoreVector};
use crate::metric::MetricGroup;

pub const ETA_LOW: f64 = 0.01;
pub const ETA_HIGH: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Pointwise,
    Pairwise,
    Listwise,
}

impl LossKind {
    pub const ALL: [LossKind; 3] = [LossKind::Pointwise, LossKind::Pairwise, LossKind::Listwise];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Pointwise => "pointwise",
            LossKind::Pairwise => "pairwise",
            LossKind::Listwise => "listwise",
        }
    }

    pub fn group(self) -> MetricGroup {
        match self {
            LossKind::Pointwise => MetricGroup::Pointwise,
            LossKind::Pairwise => MetricGroup::Pairwise,
            LossKind::Listwise => MetricGroup::Listwise,
        }
    }

    fn index(self) -> u64 {
        self as u64
    }
}

impl std::str::FromStr for LossKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pointwise" => Ok(LossKind::Pointwise),
            "pairwise" => Ok(LossKind::Pairwise),
            "listwise" => Ok(LossKind::Listwise),
            other => Err(invalid(format!("unknown loss kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaSchedule {
    /// Evenly spaced from 0 to 1 inclusive.
    Grid,
    /// Independent uniform draws on [0, 1].
    Random,
}

/// Magnitudes shared by the error models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseParams {
    /// Standard deviation of the Gaussian score noise at `alpha = 0`.
    pub noise_scale: f64,
    /// Head swaps at `alpha = 0` as a fraction of `n` (rounded up).
    pub swap_fraction: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            noise_scale: 0.1,
            swap_fraction: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub n: usize,
    /// Per loss kind.
    pub snapshots: usize,
    pub seed: u64,
    pub losses: Vec<LossKind>,
    pub alpha_schedule: AlphaSchedule,
    #[serde(flatten)]
    pub noise: NoiseParams,
    /// Accuracy threshold on scores.
    pub tau: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            snapshots: 500,
            seed: 0,
            losses: LossKind::ALL.to_vec(),
            alpha_schedule: AlphaSchedule::Grid,
            noise: NoiseParams::default(),
            tau: 0.5,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid(format!("simulation needs n >= 2, got {}", self.n)));
        }
        if self.snapshots == 0 {
            return Err(invalid("snapshots must be >= 1"));
        }
        if self.losses.is_empty() {
            return Err(invalid("no loss kinds selected"));
        }
        if !(self.noise.noise_scale.is_finite() && self.noise.noise_scale >= 0.0) {
            return Err(invalid("noise_scale must be finite and non-negative"));
        }
        if !(self.noise.swap_fraction.is_finite() && (0.0..=0.5).contains(&self.noise.swap_fraction)) {
            return Err(invalid("swap_fraction must lie in [0, 0.5]"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(invalid("tau must lie in (0, 1)"));
        }
        Ok(())
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn snapshot_stream(loss: LossKind, index: usize) -> u64 {
    ((loss.index() + 1) << 32) | index as u64
}

/// I.i.d. uniform relevance on `[0.01, 0.99]`.
pub fn gen_eta(n: usize, seed: u64) -> Result<RelevanceVector> {
    if n < 2 {
        return Err(invalid(format!("need n >= 2, got {n}")));
    }
    let mut rng = rng_for(seed, 0);
    let dist = Uniform::new_inclusive(ETA_LOW, ETA_HIGH);
    RelevanceVector::new((0..n).map(|_| dist.sample(&mut rng)).collect())
}

/// Number of adjacent head swaps applied by the pairwise model.
pub fn pairwise_swaps(n: usize, alpha: f64, noise: &NoiseParams) -> usize {
    let full = (noise.swap_fraction * n as f64).ceil();
    ((1.0 - alpha) * full).ceil() as usize
}

/// Scores of a loss-specific predictor at convergence level `alpha`.
///
/// * Pointwise: `alpha * eta + (1 - alpha) * u` with `u` uniform on the item's
///   own side of 0.5, so no score crosses the threshold while the order
///   inside each class degrades.
/// * Pairwise: Gaussian noise of equal size at every position, then adjacent
///   swaps at ranks (1,2), (3,4), ... of the noisy ranking.
/// * Listwise: Gaussian noise damped by `1 / log2(1 + i)` at eta-rank `i`.
///
/// `alpha = 1` returns `eta` unchanged.
pub fn apply_error_model<R: Rng + ?Sized>(
    eta: &RelevanceVector,
    kind: LossKind,
    alpha: f64,
    noise: &NoiseParams,
    rng: &mut R,
) -> Result<ScoreVector> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let e = eta.values();
    let n = e.len();
    let spread = 1.0 - alpha;
    let scores = match kind {
        LossKind::Pointwise => e
            .iter()
            .map(|&v| {
                let x: f64 = rng.gen();
                let u = if v > 0.5 { 1.0 - 0.5 * x } else { 0.5 * x };
                alpha * v + spread * u
            })
            .collect(),
        LossKind::Pairwise => {
            let mut s: Vec<f64> = e
                .iter()
                .map(|&v| {
                    let g: f64 = StandardNormal.sample(rng);
                    v + spread * noise.noise_scale * g
                })
                .collect();
            let order = rank_values(&s);
            let swaps = pairwise_swaps(n, alpha, noise).min(n / 2);
            for j in 0..swaps {
                let (a, b) = (order.order()[2 * j], order.order()[2 * j + 1]);
                s.swap(a, b);
            }
            s
        }
        LossKind::Listwise => {
            let mut s = e.to_vec();
            for (r, &i) in eta.bayes_order().order().iter().enumerate() {
                let g: f64 = StandardNormal.sample(rng);
                s[i] += spread * noise.noise_scale * g / ((r + 2) as f64).log2();
            }
            s
        }
    };
    ScoreVector::new(scores)
}

/// Relative regrets of one predictor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub loss: LossKind,
    pub alpha: f64,
    pub r_acc: f64,
    /// `None` when the ideal pairwise utility is 0.
    pub r_auc: Option<f64>,
    pub r_ndcg: f64,
    /// The thresholded labels contain a single class.
    pub one_class: bool,
}

fn pairwise_utility(ranked: &[f64]) -> f64 {
    let mut prefix = 0.0;
    let mut total = 0.0;
    for &v in ranked {
        total += (1.0 - v) * prefix;
        prefix += v;
    }
    total
}

fn graded_dcg(ranked: &[f64]) -> f64 {
    ranked
        .iter()
        .enumerate()
        .map(|(r, v)| v / ((r + 2) as f64).log2())
        .sum()
}

fn relative(value: f64, ideal: f64) -> f64 {
    if ideal <= 0.0 {
        0.0
    } else {
        (1.0 - value / ideal).clamp(0.0, 1.0)
    }
}

/// Relative regrets of `scores` against the Bayes ordering of `eta`.
pub fn snapshot_regrets(eta: &RelevanceVector, scores: &ScoreVector, tau: f64) -> Result<(f64, Option<f64>, f64, bool)> {
    if eta.len() != scores.len() {
        return Err(invalid(format!("{} scores for {} items", scores.len(), eta.len())));
    }
    let e = eta.values();
    let labels = eta.binarize();
    let correct = labels
        .labels()
        .iter()
        .zip(scores.values())
        .filter(|(&y, &s)| y == (s > tau))
        .count();
    let r_acc = 1.0 - correct as f64 / e.len() as f64;

    let by_score: Vec<f64> = rank_values(scores.values()).order().iter().map(|&i| e[i]).collect();
    let mut ideal = e.to_vec();
    ideal.sort_by(|a, b| b.total_cmp(a));

    let u_star = pairwise_utility(&ideal);
    let r_auc = (u_star > 0.0).then(|| relative(pairwise_utility(&by_score), u_star));
    let r_ndcg = relative(graded_dcg(&by_score), graded_dcg(&ideal));
    let one_class = labels.n_pos() == 0 || labels.n_neg() == 0;
    Ok((r_acc, r_auc, r_ndcg, one_class))
}

/// Alpha of every snapshot of one loss kind.
pub fn alphas(cfg: &SimConfig, loss: LossKind) -> Vec<f64> {
    let m = cfg.snapshots;
    match cfg.alpha_schedule {
        AlphaSchedule::Grid if m == 1 => vec![0.0],
        AlphaSchedule::Grid => (0..m).map(|i| i as f64 / (m - 1) as f64).collect(),
        AlphaSchedule::Random => {
            let mut rng = rng_for(cfg.seed, (1 << 48) | loss.index());
            (0..m).map(|_| rng.gen::<f64>()).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSummary {
    pub loss: LossKind,
    pub snapshots: usize,
    pub mean_r_acc: f64,
    pub mean_r_auc: f64,
    pub mean_r_ndcg: f64,
    /// Snapshots whose AUC regret was undefined.
    pub undefined_auc: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub config: SimConfig,
    pub losses: Vec<LossSummary>,
}

impl SimSummary {
    pub fn get(&self, loss: LossKind) -> Option<&LossSummary> {
        self.losses.iter().find(|s| s.loss == loss)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub snapshots: Vec<Snapshot>,
    pub summary: SimSummary,
}

pub fn summarize(cfg: &SimConfig, snapshots: &[Snapshot]) -> SimSummary {
    let losses = cfg
        .losses
        .iter()
        .map(|&loss| {
            let rows: Vec<&Snapshot> = snapshots.iter().filter(|s| s.loss == loss).collect();
            let m = rows.len().max(1) as f64;
            let aucs: Vec<f64> = rows.iter().filter_map(|s| s.r_auc).collect();
            LossSummary {
                loss,
                snapshots: rows.len(),
                mean_r_acc: rows.iter().map(|s| s.r_acc).sum::<f64>() / m,
                mean_r_auc: aucs.iter().sum::<f64>() / aucs.len().max(1) as f64,
                mean_r_ndcg: rows.iter().map(|s| s.r_ndcg).sum::<f64>() / m,
                undefined_auc: rows.len() - aucs.len(),
            }
        })
        .collect();
    SimSummary {
        config: cfg.clone(),
        losses,
    }
}

/// One relevance vector per run, shared by every loss kind; snapshot `i` of
/// loss `l` draws its noise from its own stream of the seed.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let eta = gen_eta(cfg.n, cfg.seed)?;
    let jobs: Vec<(LossKind, usize, f64)> = cfg
        .losses
        .iter()
        .flat_map(|&loss| {
            alphas(cfg, loss)
                .into_iter()
                .enumerate()
                .map(move |(i, a)| (loss, i, a))
        })
        .collect();
    let snapshots = jobs
        .par_iter()
        .map(|&(loss, i, alpha)| {
            let mut rng = rng_for(cfg.seed, snapshot_stream(loss, i));
            let scores = apply_error_model(&eta, loss, alpha, &cfg.noise, &mut rng)?;
            let (r_acc, r_auc, r_ndcg, one_class) = snapshot_regrets(&eta, &scores, cfg.tau)?;
            Ok(Snapshot {
                loss,
                alpha,
                r_acc,
                r_auc,
                r_ndcg,
                one_class,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(cfg, &snapshots);
    Ok(SimResult { snapshots, summary })
}

/// Mean regrets of one loss kind in `bins` equal-width alpha bins.
/// Empty bins are skipped.
pub fn binned_means(snapshots: &[Snapshot], loss: LossKind, bins: usize) -> Vec<(f64, f64, f64, f64)> {
    let mut acc = vec![(0.0, 0.0, 0.0, 0.0, 0usize); bins];
    for s in snapshots.iter().filter(|s| s.loss == loss) {
        let b = ((s.alpha * bins as f64) as usize).min(bins - 1);
        let slot = &mut acc[b];
        slot.0 += s.alpha;
        slot.1 += s.r_acc;
        slot.2 += s.r_auc.unwrap_or(0.0);
        slot.3 += s.r_ndcg;
        slot.4 += 1;
    }
    acc.into_iter()
        .filter(|s| s.4 > 0)
        .map(|(a, x, y, z, c)| {
            let c = c as f64;
            (a / c, x / c, y / c, z / c)
        })
        .collect()
}

/// Snapshot table with a leading `# config: {...}` comment line.
pub fn snapshots_csv(cfg: &SimConfig, snapshots: &[Snapshot]) -> Result<String> {
    let config = serde_json::to_string(cfg).map_err(|e| invalid(e.to_string()))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["loss", "alpha", "r_acc", "r_auc", "r_ndcg"])
        .map_err(|e| invalid(e.to_string()))?;
    for s in snapshots {
        let auc = s.r_auc.map_or_else(|| "NA".to_string(), |v| v.to_string());
        w.write_record([
            s.loss.name().to_string(),
            s.alpha.to_string(),
            s.r_acc.to_string(),
            auc,
            s.r_ndcg.to_string(),
        ])
        .map_err(|e| invalid(e.to_string()))?;
    }
    let body = w.into_inner().map_err(|e| invalid(e.to_string()))?;
    Ok(format!("# config: {config}\n{}", String::from_utf8_lossy(&body)))
}

/// NDCG-vs-Acc regret scatter as a standalone SVG.
pub fn scatter_svg(cfg: &SimConfig, snapshots: &[Snapshot]) -> Result<String> {
    const W: f64 = 480.0;
    const H: f64 = 480.0;
    const M: f64 = 50.0;
    let config = serde_json::to_string(cfg).map_err(|e| invalid(e.to_string()))?;
    let max_x = snapshots.iter().map(|s| s.r_acc).fold(1e-9, f64::max);
    let max_y = snapshots.iter().map(|s| s.r_ndcg).fold(1e-9, f64::max);
    let px = |x: f64| M + x / max_x * (W - 2.0 * M);
    let py = |y: f64| H - M - y / max_y * (H - 2.0 * M);
    let color = |l: LossKind| match l {
        LossKind::Pointwise => "#1f77b4",
        LossKind::Pairwise => "#ff7f0e",
        LossKind::Listwise => "#2ca02c",
    };
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\">\n\
         <!-- config: {} -->\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <line x1=\"{M}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{M}\" y1=\"{M}\" x2=\"{M}\" y2=\"{}\" stroke=\"black\"/>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">Acc regret (max {max_x:.3})</text>\n\
         <text x=\"14\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 14 {})\" text-anchor=\"middle\">NDCG regret (max {max_y:.3})</text>\n",
        config.replace("--", "- -"),
        H - M,
        W - M,
        H - M,
        H - M,
        W / 2.0,
        H - 15.0,
        H / 2.0,
        H / 2.0,
    );
    for (j, loss) in cfg.losses.iter().enumerate() {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{}\">{}</text>\n",
            W - M - 80.0,
            M + 15.0 * j as f64,
            color(*loss),
            loss.name()
        ));
    }
    for s in snapshots {
        out.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\" fill=\"{}\" fill-opacity=\"0.6\"/>\n",
            px(s.r_acc),
            py(s.r_ndcg),
            color(s.loss)
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}
