//! Empirical sample-complexity curves over a fixed grid of batch sizes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{EpisodeOutcome, Experiment};
use crate::seed::derive_seed;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959963984540054;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub m: usize,
    pub trials: usize,
    /// Trials with value error at most `ε`.
    pub successes: usize,
    pub frequency: f64,
    /// Wilson score half-width of `frequency`.
    pub ci_halfwidth: f64,
    pub mean_value_error: f64,
    /// Normal-approximation half-width of `mean_value_error`.
    pub mean_value_error_halfwidth: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityCurve {
    pub family: String,
    pub learner: String,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub points: Vec<CurvePoint>,
    /// Smallest grid `m` with success frequency at least `1 - δ`.
    pub m_hat: Option<usize>,
}

/// Seed of trial `trial` at batch size `m`; independent of the rest of the grid.
pub fn cell_seed(base: u64, m: usize, trial: usize) -> u64 {
    derive_seed(derive_seed(base, m as u64), trial as u64)
}

/// Wilson score interval half-width for `successes` out of `trials`.
pub fn wilson_halfwidth(successes: usize, trials: usize, z: f64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

pub fn check_grid(m_grid: &[usize], trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if m_grid.is_empty() || m_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("m grid must be nonempty and strictly increasing".into()));
    }
    Ok(())
}

/// Aggregates the value errors of one grid point.
pub fn curve_point(m: usize, value_errors: &[f64], epsilon: f64) -> CurvePoint {
    let trials = value_errors.len();
    let successes = value_errors.iter().filter(|&&e| e <= epsilon).count();
    let n = trials.max(1) as f64;
    let mean = value_errors.iter().sum::<f64>() / n;
    let var = if trials > 1 {
        value_errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    CurvePoint {
        m,
        trials,
        successes,
        frequency: successes as f64 / n,
        ci_halfwidth: wilson_halfwidth(successes, trials, Z_95),
        mean_value_error: mean,
        mean_value_error_halfwidth: Z_95 * (var / n).sqrt(),
    }
}

/// Builds the curve from per-grid-point value errors in grid order.
pub fn assemble_curve(
    experiment: &Experiment,
    epsilon: f64,
    delta: f64,
    seed: u64,
    m_grid: &[usize],
    value_errors: &[Vec<f64>],
) -> ComplexityCurve {
    let points: Vec<CurvePoint> =
        m_grid.iter().zip(value_errors).map(|(&m, errs)| curve_point(m, errs, epsilon)).collect();
    let m_hat = points.iter().find(|p| p.frequency >= 1.0 - delta).map(|p| p.m);
    ComplexityCurve {
        family: experiment.family().kind().into(),
        learner: experiment.learner().name().into(),
        epsilon,
        delta,
        seed,
        points,
        m_hat,
    }
}

/// Runs every `(m, trial)` cell of the grid in parallel on the current rayon
/// pool. Outcomes are returned in grid order, then trial order.
pub fn run_cells(experiment: &Experiment, m_grid: &[usize], trials: usize, seed: u64) -> Result<Vec<Vec<EpisodeOutcome>>> {
    check_grid(m_grid, trials)?;
    m_grid
        .iter()
        .map(|&m| (0..trials).into_par_iter().map(|t| experiment.run_episode(m, cell_seed(seed, m, t))).collect())
        .collect()
}

/// Success frequency of `value error <= ε` per grid point and the smallest
/// grid `m` reaching frequency `1 - δ`.
pub fn estimate_sample_complexity(
    experiment: &Experiment,
    epsilon: f64,
    delta: f64,
    m_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ComplexityCurve> {
    let outcomes = run_cells(experiment, m_grid, trials, seed)?;
    let errors: Vec<Vec<f64>> = outcomes.iter().map(|row| row.iter().map(|o| o.value_error).collect()).collect();
    Ok(assemble_curve(experiment, epsilon, delta, seed, m_grid, &errors))
}
