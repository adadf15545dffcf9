//! Metric identities: kind, structural group, truncation and discount.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// The evaluation unit a metric looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricGroup {
    Pointwise,
    Pairwise,
    Listwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Acc,
    Precision,
    Recall,
    Auc,
    Ndcg,
    /// Unnormalized discounted cumulative gain.
    Dcg,
    Map,
    Mrr,
}

impl MetricKind {
    pub const ALL: [MetricKind; 8] = [
        MetricKind::Acc,
        MetricKind::Precision,
        MetricKind::Recall,
        MetricKind::Auc,
        MetricKind::Ndcg,
        MetricKind::Dcg,
        MetricKind::Map,
        MetricKind::Mrr,
    ];

    pub fn group(self) -> MetricGroup {
        match self {
            MetricKind::Acc | MetricKind::Precision | MetricKind::Recall => MetricGroup::Pointwise,
            MetricKind::Auc => MetricGroup::Pairwise,
            MetricKind::Ndcg | MetricKind::Dcg | MetricKind::Map | MetricKind::Mrr => {
                MetricGroup::Listwise
            }
        }
    }

    pub fn supports_truncation(self) -> bool {
        !matches!(self, MetricKind::Acc | MetricKind::Auc)
    }

    /// Fixed, label-independent position weights (expected utility linear in eta).
    pub fn is_additive(self) -> bool {
        matches!(
            self,
            MetricKind::Dcg | MetricKind::Precision | MetricKind::Recall
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Acc => "acc",
            MetricKind::Precision => "precision",
            MetricKind::Recall => "recall",
            MetricKind::Auc => "auc",
            MetricKind::Ndcg => "ndcg",
            MetricKind::Dcg => "dcg",
            MetricKind::Map => "map",
            MetricKind::Mrr => "mrr",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "acc" | "accuracy" => Ok(MetricKind::Acc),
            "p" | "precision" | "prec" => Ok(MetricKind::Precision),
            "r" | "recall" | "rec" => Ok(MetricKind::Recall),
            "auc" => Ok(MetricKind::Auc),
            "ndcg" => Ok(MetricKind::Ndcg),
            "dcg" => Ok(MetricKind::Dcg),
            "map" => Ok(MetricKind::Map),
            "mrr" => Ok(MetricKind::Mrr),
            other => Err(invalid(format!("unknown metric kind `{other}`"))),
        }
    }
}

/// Logarithm base of the rank discount `w(r) = 1 / log_b(1 + r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    Two,
    Natural,
    Custom(f64),
}

impl LogBase {
    pub fn new(base: f64) -> Result<Self> {
        if !(base.is_finite() && base > 1.0) {
            return Err(invalid(format!("log base must be > 1, got {base}")));
        }
        Ok(if base == 2.0 {
            LogBase::Two
        } else if base == std::f64::consts::E {
            LogBase::Natural
        } else {
            LogBase::Custom(base)
        })
    }

    /// `w(rank)` for a 1-based rank.
    pub fn discount(self, rank: usize) -> f64 {
        let x = 1.0 + rank as f64;
        match self {
            LogBase::Two => 1.0 / x.log2(),
            LogBase::Natural => 1.0 / x.ln(),
            LogBase::Custom(b) => b.ln() / x.ln(),
        }
    }

    /// `w(rank) - w(rank + 1)`, without the cancellation of the plain difference.
    pub fn discount_gap(self, rank: usize) -> f64 {
        let a = (1.0 + rank as f64).ln();
        let b = (2.0 + rank as f64).ln();
        let scale = match self {
            LogBase::Two => std::f64::consts::LN_2,
            LogBase::Natural => 1.0,
            LogBase::Custom(b) => b.ln(),
        };
        scale * (1.0 / (1.0 + rank as f64)).ln_1p() / (a * b)
    }

    /// `sum_{r=1..k} w(r)`.
    pub fn discount_sum(self, k: usize) -> f64 {
        (1..=k).map(|r| self.discount(r)).sum()
    }
}

impl Default for LogBase {
    fn default() -> Self {
        LogBase::Two
    }
}

impl FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e" | "ln" | "natural" => Ok(LogBase::Natural),
            "2" => Ok(LogBase::Two),
            other => other
                .parse::<f64>()
                .map_err(|_| invalid(format!("bad log base `{other}`")))
                .and_then(LogBase::new),
        }
    }
}

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Full identity of a metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub kind: MetricKind,
    /// Cutoff `k`; `None` evaluates the whole list.
    pub truncation: Option<usize>,
    pub log_base: LogBase,
    /// Decision threshold for accuracy.
    pub threshold: f64,
}

impl MetricSpec {
    pub fn new(kind: MetricKind) -> Self {
        Self {
            kind,
            truncation: None,
            log_base: LogBase::Two,
            threshold: DEFAULT_THRESHOLD,
        }
    }

    pub fn acc() -> Self {
        Self::new(MetricKind::Acc)
    }
    pub fn precision_at(k: usize) -> Self {
        Self::new(MetricKind::Precision).at(k)
    }
    pub fn recall_at(k: usize) -> Self {
        Self::new(MetricKind::Recall).at(k)
    }
    pub fn auc() -> Self {
        Self::new(MetricKind::Auc)
    }
    pub fn ndcg() -> Self {
        Self::new(MetricKind::Ndcg)
    }
    pub fn dcg() -> Self {
        Self::new(MetricKind::Dcg)
    }
    pub fn map() -> Self {
        Self::new(MetricKind::Map)
    }
    pub fn mrr() -> Self {
        Self::new(MetricKind::Mrr)
    }

    pub fn at(mut self, k: usize) -> Self {
        self.truncation = Some(k);
        self
    }

    pub fn with_log_base(mut self, base: LogBase) -> Self {
        self.log_base = base;
        self
    }

    pub fn with_threshold(mut self, tau: f64) -> Self {
        self.threshold = tau;
        self
    }

    pub fn group(&self) -> MetricGroup {
        self.kind.group()
    }

    /// Checks the spec against a list length and returns the effective cutoff.
    pub fn cutoff(&self, n: usize) -> Result<usize> {
        if let LogBase::Custom(b) = self.log_base {
            LogBase::new(b)?;
        }
        if self.kind == MetricKind::Acc && !(self.threshold.is_finite()) {
            return Err(invalid("accuracy threshold must be finite"));
        }
        match self.truncation {
            None => Ok(n),
            Some(_) if !self.kind.supports_truncation() => {
                Err(invalid(format!("{} does not take a cutoff", self.kind)))
            }
            Some(0) => Err(invalid("cutoff k must be >= 1")),
            Some(k) if k > n => Err(invalid(format!("cutoff k = {k} exceeds list length {n}"))),
            Some(k) => Ok(k),
        }
    }

    pub fn label(&self) -> String {
        match self.truncation {
            Some(k) => format!("{}@{k}", self.kind),
            None => self.kind.to_string(),
        }
    }
}

/// Parses `kind` or `kind@k`, e.g. `ndcg@10`.
impl FromStr for MetricSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, k) = match s.split_once('@') {
            Some((kind, k)) => {
                let k: usize = k
                    .parse()
                    .map_err(|_| invalid(format!("bad cutoff in `{s}`")))?;
                (kind, Some(k))
            }
            None => (s, None),
        };
        let mut spec = MetricSpec::new(kind.parse()?);
        if let Some(k) = k {
            if !spec.kind.supports_truncation() {
                return Err(invalid(format!("{} does not take a cutoff", spec.kind)));
            }
            spec = spec.at(k);
        }
        Ok(spec)
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups() {
        assert_eq!(MetricKind::Acc.group(), MetricGroup::Pointwise);
        assert_eq!(MetricKind::Recall.group(), MetricGroup::Pointwise);
        assert_eq!(MetricKind::Auc.group(), MetricGroup::Pairwise);
        assert_eq!(MetricKind::Mrr.group(), MetricGroup::Listwise);
    }

    #[test]
    fn discounts() {
        assert_eq!(LogBase::Two.discount(1), 1.0);
        assert!((LogBase::Natural.discount(1) - 1.0 / 2f64.ln()).abs() < 1e-15);
        let c = LogBase::new(10.0).unwrap();
        assert!((c.discount(9) - 1.0).abs() < 1e-15);
        assert!(LogBase::new(1.0).is_err());
        assert_eq!(LogBase::new(2.0).unwrap(), LogBase::Two);
    }

    #[test]
    fn gap_matches_difference() {
        for base in [LogBase::Two, LogBase::Natural, LogBase::Custom(10.0)] {
            for r in [1, 2, 5, 40] {
                let plain = base.discount(r) - base.discount(r + 1);
                assert!((base.discount_gap(r) - plain).abs() <= 1e-14 * plain.abs().max(1.0));
            }
        }
    }

    #[test]
    fn cutoff_validation() {
        assert_eq!(MetricSpec::ndcg().cutoff(5).unwrap(), 5);
        assert_eq!(MetricSpec::ndcg().at(3).cutoff(5).unwrap(), 3);
        assert!(MetricSpec::ndcg().at(6).cutoff(5).is_err());
        assert!(MetricSpec::ndcg().at(0).cutoff(5).is_err());
        assert!(MetricSpec::auc().at(2).cutoff(5).is_err());
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("NDCG".parse::<MetricKind>().unwrap(), MetricKind::Ndcg);
        assert!("foo".parse::<MetricKind>().is_err());
        assert_eq!("e".parse::<LogBase>().unwrap(), LogBase::Natural);
        assert_eq!("ndcg@3".parse::<MetricSpec>().unwrap(), MetricSpec::ndcg().at(3));
        assert_eq!("p@2".parse::<MetricSpec>().unwrap(), MetricSpec::precision_at(2));
        assert!("auc@2".parse::<MetricSpec>().is_err());
        assert!("ndcg@x".parse::<MetricSpec>().is_err());
    }
}
