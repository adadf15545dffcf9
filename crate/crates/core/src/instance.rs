//! Finite evaluation instances: binary label lists, conditional-relevance
//! vectors, score vectors and the rankings they induce.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A list of binary relevance labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct LabeledList {
    labels: Vec<bool>,
    n_pos: usize,
}

impl LabeledList {
    pub fn new(labels: Vec<bool>) -> Result<Self> {
        if labels.is_empty() {
            return Err(invalid("label list must be non-empty"));
        }
        let n_pos = labels.iter().filter(|&&y| y).count();
        Ok(Self { labels, n_pos })
    }

    /// Builds from 0/1 integers; any other value is rejected.
    pub fn from_binary(values: &[u8]) -> Result<Self> {
        let labels = values
            .iter()
            .enumerate()
            .map(|(i, &v)| match v {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(invalid(format!("label[{i}] = {v} is not binary"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels)
    }

    /// `n_pos` positives followed by `n_neg` negatives.
    pub fn with_counts(n_pos: usize, n_neg: usize) -> Result<Self> {
        let mut labels = vec![true; n_pos];
        labels.extend(std::iter::repeat(false).take(n_neg));
        Self::new(labels)
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_pos(&self) -> usize {
        self.n_pos
    }

    pub fn n_neg(&self) -> usize {
        self.labels.len() - self.n_pos
    }

    /// Labels read off in the order given by `perm`.
    pub fn ranked(&self, perm: &Permutation) -> Result<Vec<bool>> {
        if perm.len() != self.len() {
            return Err(invalid(format!(
                "permutation length {} does not match list length {}",
                perm.len(),
                self.len()
            )));
        }
        Ok(perm.order().iter().map(|&i| self.labels[i]).collect())
    }

    /// The all-positives-first arrangement of the same labels.
    pub fn ideal_ranked(&self) -> Vec<bool> {
        let mut ranked = vec![true; self.n_pos];
        ranked.resize(self.len(), false);
        ranked
    }
}

impl TryFrom<Vec<u8>> for LabeledList {
    type Error = crate::Error;

    fn try_from(v: Vec<u8>) -> Result<Self> {
        Self::from_binary(&v)
    }
}

impl From<LabeledList> for Vec<u8> {
    fn from(l: LabeledList) -> Self {
        l.labels.iter().map(|&y| y as u8).collect()
    }
}

/// Conditional expectations `eta_i = P(y_i = 1 | x_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RelevanceVector {
    eta: Vec<f64>,
}

impl RelevanceVector {
    pub fn new(eta: Vec<f64>) -> Result<Self> {
        if eta.is_empty() {
            return Err(invalid("relevance vector must be non-empty"));
        }
        if let Some((i, v)) = eta
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(invalid(format!("eta[{i}] = {v} is outside [0, 1]")));
        }
        Ok(Self { eta })
    }

    pub fn values(&self) -> &[f64] {
        &self.eta
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    /// Bayes labels: `eta_i > 0.5`.
    pub fn binarize(&self) -> LabeledList {
        LabeledList::new(self.eta.iter().map(|&e| e > 0.5).collect())
            .expect("non-empty by construction")
    }

    /// `min_i |eta_i - 0.5|`.
    pub fn margin(&self) -> f64 {
        self.eta
            .iter()
            .map(|e| (e - 0.5).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Items sorted by decreasing eta, ties by index.
    pub fn bayes_order(&self) -> Permutation {
        rank_values(&self.eta)
    }
}

impl TryFrom<Vec<f64>> for RelevanceVector {
    type Error = crate::Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RelevanceVector> for Vec<f64> {
    fn from(r: RelevanceVector) -> Self {
        r.eta
    }
}

/// Real-valued predictor outputs, one per item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ScoreVector {
    scores: Vec<f64>,
}

impl ScoreVector {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(invalid("score vector must be non-empty"));
        }
        if let Some((i, v)) = scores.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(invalid(format!("score[{i}] = {v} is not finite")));
        }
        Ok(Self { scores })
    }

    pub fn values(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

impl TryFrom<Vec<f64>> for ScoreVector {
    type Error = crate::Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ScoreVector> for Vec<f64> {
    fn from(s: ScoreVector) -> Self {
        s.scores
    }
}

/// A ranking: `order()[r]` is the (0-based) item placed at rank `r + 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    order: Vec<usize>,
}

impl Permutation {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &i in &order {
            if i >= n || seen[i] {
                return Err(invalid(format!("{order:?} is not a permutation of 0..{n}")));
            }
            seen[i] = true;
        }
        Ok(Self { order })
    }

    /// Trusted constructor for enumeration code.
    pub(crate) fn from_vec_unchecked(order: Vec<usize>) -> Self {
        Self { order }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
        }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// `ranks()[i]` is the 0-based rank of item `i`.
    pub fn ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.order.len()];
        for (r, &i) in self.order.iter().enumerate() {
            ranks[i] = r;
        }
        ranks
    }

    /// Swaps the items at two ranks.
    pub fn swap_ranks(&mut self, a: usize, b: usize) {
        self.order.swap(a, b);
    }

    /// Scores `n - r` for the item at rank `r`, so that `rank_by_scores`
    /// recovers this permutation.
    pub fn to_scores(&self) -> ScoreVector {
        let n = self.order.len();
        let mut scores = vec![0.0; n];
        for (r, &i) in self.order.iter().enumerate() {
            scores[i] = (n - r) as f64;
        }
        ScoreVector::new(scores).expect("finite and non-empty")
    }

    /// 1-based rendering used in human-facing reports.
    pub fn one_based(&self) -> Vec<usize> {
        self.order.iter().map(|i| i + 1).collect()
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = crate::Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.order
    }
}

/// Sorts scores non-increasingly. Ties keep ascending item index.
pub fn rank_by_scores(scores: &ScoreVector) -> Permutation {
    rank_values(scores.values())
}

pub(crate) fn rank_values(values: &[f64]) -> Permutation {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // sort_by is stable, so equal scores keep index order
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    Permutation { order }
}

/// Every permutation of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    use itertools::Itertools;
    (0..n)
        .permutations(n)
        .map(Permutation::from_vec_unchecked)
        .collect()
}
