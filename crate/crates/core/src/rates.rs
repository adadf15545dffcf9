//! Growth of the transfer coefficients with list length.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::transfer::{bound_for, BoundConfig, Direction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// `n+ = floor(n / 2)`
    Balanced,
    /// `n+ = 1`
    Imbalanced,
}

impl Scenario {
    pub fn n_pos(self, n: usize) -> usize {
        match self {
            Scenario::Balanced => n / 2,
            Scenario::Imbalanced => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Balanced => "balanced",
            Scenario::Imbalanced => "imbalanced",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "balanced" => Ok(Scenario::Balanced),
            "imbalanced" => Ok(Scenario::Imbalanced),
            other => Err(invalid(format!("unknown scenario `{other}`"))),
        }
    }
}

/// Predicted order of growth of a coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Constant,
    Log,
    LogSquared,
    Linear,
    NLogN,
    LogOverN,
}

impl Growth {
    pub fn eval(self, n: usize) -> f64 {
        let x = n as f64;
        match self {
            Growth::Constant => 1.0,
            Growth::Log => x.ln(),
            Growth::LogSquared => x.ln().powi(2),
            Growth::Linear => x,
            Growth::NLogN => x * x.ln(),
            Growth::LogOverN => x.ln() / x,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Growth::Constant => "1",
            Growth::Log => "ln n",
            Growth::LogSquared => "ln^2 n",
            Growth::Linear => "n",
            Growth::NLogN => "n ln n",
            Growth::LogOverN => "ln n / n",
        }
    }
}

/// The rate the asymptotic analysis predicts for a direction.
pub fn predicted_growth(scenario: Scenario, direction: Direction) -> Result<Growth> {
    use Direction::*;
    Ok(match (scenario, direction) {
        (Scenario::Balanced, AucToNdcg) => Growth::NLogN,
        (Scenario::Balanced, NdcgToAuc) => Growth::Log,
        (Scenario::Balanced, AucToAcc) => Growth::Linear,
        (Scenario::Balanced, NdcgToAcc) => Growth::Constant,
        (Scenario::Imbalanced, AucToNdcg) => Growth::Linear,
        (Scenario::Imbalanced, NdcgToAuc) => Growth::LogSquared,
        (Scenario::Imbalanced, AucToAcc) => Growth::Constant,
        (Scenario::Imbalanced, NdcgToAcc) => Growth::LogOverN,
        (_, Truncation) => return Err(invalid("truncation coefficients do not depend on n")),
    })
}

pub const MIN_GRID_POINTS: usize = 5;
pub const MIN_GRID_N: usize = 10;

pub fn default_grid() -> Vec<usize> {
    vec![100, 1_000, 10_000, 100_000, 1_000_000]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub scenario: Scenario,
    pub direction: Direction,
    pub grid: Vec<usize>,
    pub coefficients: Vec<f64>,
    /// Least-squares slope of `ln C` against `ln n`.
    pub slope: f64,
    pub intercept: f64,
    pub growth: Growth,
    /// `max / min` of `C(n) / g(n)` over the grid.
    pub spread: f64,
    pub config: BoundConfig,
}

fn check_grid(grid: &[usize]) -> Result<()> {
    if grid.len() < MIN_GRID_POINTS {
        return Err(invalid(format!(
            "rate grid needs at least {MIN_GRID_POINTS} points, got {}",
            grid.len()
        )));
    }
    if let Some(&n) = grid.iter().find(|&&n| n < MIN_GRID_N) {
        return Err(invalid(format!("grid point {n} is below {MIN_GRID_N}")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("grid must be strictly increasing"));
    }
    Ok(())
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn asymptotic_rate_scan(
    scenario: Scenario,
    direction: Direction,
    grid: &[usize],
    cfg: &BoundConfig,
) -> Result<RateFit> {
    check_grid(grid)?;
    let growth = predicted_growth(scenario, direction)?;
    let coefficients = grid
        .par_iter()
        .map(|&n| {
            let n_pos = scenario.n_pos(n);
            bound_for(direction, n_pos, n - n_pos, cfg).map(|b| b.coefficient)
        })
        .collect::<Result<Vec<f64>>>()?;

    let lx: Vec<f64> = grid.iter().map(|&n| (n as f64).ln()).collect();
    let ly: Vec<f64> = coefficients.iter().map(|c| c.ln()).collect();
    let (slope, intercept) = linear_fit(&lx, &ly);

    let normalized: Vec<f64> = grid
        .iter()
        .zip(&coefficients)
        .map(|(&n, c)| c / growth.eval(n))
        .collect();
    let max = normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = normalized.iter().copied().fold(f64::INFINITY, f64::min);

    Ok(RateFit {
        scenario,
        direction,
        grid: grid.to_vec(),
        coefficients,
        slope,
        intercept,
        growth,
        spread: max / min,
        config: *cfg,
    })
}

/// All four ranking directions for one scenario.
pub fn scan_all(scenario: Scenario, grid: &[usize], cfg: &BoundConfig) -> Result<Vec<RateFit>> {
    Direction::RANKING
        .iter()
        .map(|&d| asymptotic_rate_scan(scenario, d, grid, cfg))
        .collect()
}
