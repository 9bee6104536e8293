//! Closed-form sample-size and error bounds.
//!
//! Asymptotic forms are evaluated with every hidden constant set to 1 and
//! logarithms clipped below at zero (`ln⁺ x = max(0, ln x)`) so that the
//! value stays a meaningful count; [`Convention::UnitConstant`] marks them.
//! [`BoundId::ErmExplicit`], [`BoundId::FqiErrorExplicit`] and
//! [`BoundId::PermutationLower`] carry explicit constants instead.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundId {
    /// DPL trajectories for classification error within `ε` of the best hypothesis.
    DplClassification,
    /// DPL trajectories for value error at most `ε + α`.
    DplValue,
    /// Trajectories any DPL learner needs on the one-decision family.
    DplLower,
    /// ERM trajectories with explicit constants and `τ_min = 8L` unless given.
    ErmExplicit,
    /// FQI one-step trajectories for value error `ε`.
    FqiUpper,
    /// Model-based one-step trajectories for value error `ε` with a finite model class.
    ModelBasedUpper,
    /// Value error of FQI after `m` one-step trajectories, explicit constants.
    FqiErrorExplicit,
    /// `K / ε²` for the first-round bandit.
    FirstRoundLower,
    /// `K / (162 ε² L)` for the cyclic-permutation bandit.
    PermutationLower,
    /// `|A|^L / (L ε²)`.
    ExplorationLower,
    /// `|H| / ε²`.
    HypothesisLower,
    /// `|Θ| / (L ε²)`.
    ContextLower,
    /// `C |A|^L / (L ε²)` without active exploration.
    ConcentratabilityLower,
    /// Ratio of the DPL value upper bound to the DPL lower bound.
    Separation,
}

impl BoundId {
    pub const ALL: [BoundId; 14] = [
        BoundId::DplClassification,
        BoundId::DplValue,
        BoundId::DplLower,
        BoundId::ErmExplicit,
        BoundId::FqiUpper,
        BoundId::ModelBasedUpper,
        BoundId::FqiErrorExplicit,
        BoundId::FirstRoundLower,
        BoundId::PermutationLower,
        BoundId::ExplorationLower,
        BoundId::HypothesisLower,
        BoundId::ContextLower,
        BoundId::ConcentratabilityLower,
        BoundId::Separation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundId::DplClassification => "dpl_classification",
            BoundId::DplValue => "dpl_value",
            BoundId::DplLower => "dpl_lower",
            BoundId::ErmExplicit => "erm_explicit",
            BoundId::FqiUpper => "fqi_upper",
            BoundId::ModelBasedUpper => "model_based_upper",
            BoundId::FqiErrorExplicit => "fqi_error_explicit",
            BoundId::FirstRoundLower => "first_round_lower",
            BoundId::PermutationLower => "permutation_lower",
            BoundId::ExplorationLower => "exploration_lower",
            BoundId::HypothesisLower => "hypothesis_lower",
            BoundId::ContextLower => "context_lower",
            BoundId::ConcentratabilityLower => "concentratability_lower",
            BoundId::Separation => "separation",
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundId::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown bound '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    UnitConstant,
    Explicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    SampleSize,
    ValueError,
    Ratio,
}

/// Symbols shared by the bounds. Fields a bound does not use are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundInputs {
    /// Natarajan dimension `d`.
    pub d: Option<usize>,
    pub epsilon: f64,
    pub delta: f64,
    /// Horizon `L`; the number of pulls per context for the permutation bandit.
    pub horizon: usize,
    pub num_actions: usize,
    pub concentratability: Option<f64>,
    /// `|F|` or `|H|`.
    pub class_size: Option<usize>,
    pub num_contexts: Option<usize>,
    /// Bandit arm count `K`; falls back to `num_actions`.
    pub arms: Option<usize>,
    /// Expert suboptimality, reported alongside the DPL value bound.
    pub alpha: f64,
    /// Approximation error of the Q-class under its own backups.
    pub approximation_error: f64,
    /// Sample count for the error-given-samples form.
    pub samples: Option<u64>,
    /// Overrides the `8L` mixing-time bound in the explicit ERM form.
    pub tau_min: Option<f64>,
}

impl Default for BoundInputs {
    fn default() -> Self {
        Self {
            d: None,
            epsilon: 0.1,
            delta: 0.1,
            horizon: 1,
            num_actions: 2,
            concentratability: None,
            class_size: None,
            num_contexts: None,
            arms: None,
            alpha: 0.0,
            approximation_error: 0.0,
            samples: None,
            tau_min: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub bound: BoundId,
    pub quantity: Quantity,
    pub convention: Convention,
    pub value: f64,
    /// `ceil(value)` for sample sizes.
    pub samples: Option<u64>,
    pub notes: Vec<String>,
}

fn ln_plus(x: f64) -> f64 {
    x.ln().max(0.0)
}

fn need<T: Copy>(value: Option<T>, name: &str, bound: BoundId) -> Result<T> {
    value.ok_or_else(|| Error::InvalidParameter(format!("bound {bound} needs {name}")))
}

fn at_least_one(value: usize, name: &str) -> Result<f64> {
    if value == 0 {
        return Err(Error::InvalidParameter(format!("{name} must be at least 1")));
    }
    Ok(value as f64)
}

impl BoundInputs {
    fn check_common(&self, needs_epsilon: bool) -> Result<()> {
        if needs_epsilon && !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        at_least_one(self.horizon, "horizon")?;
        at_least_one(self.num_actions, "num_actions")?;
        if self.alpha < 0.0 || self.approximation_error < 0.0 {
            return Err(Error::InvalidParameter("alpha and approximation_error must be nonnegative".into()));
        }
        Ok(())
    }

    fn dim(&self, bound: BoundId) -> Result<f64> {
        at_least_one(need(self.d, "d", bound)?, "d")
    }

    fn conc(&self, bound: BoundId) -> Result<f64> {
        let c = need(self.concentratability, "concentratability", bound)?;
        if !(c.is_finite() && c >= 1.0) {
            return Err(Error::InvalidParameter(format!("concentratability must be finite and >= 1, got {c}")));
        }
        Ok(c)
    }
}

fn sample(bound: BoundId, convention: Convention, value: f64, notes: Vec<String>) -> BoundValue {
    BoundValue { bound, quantity: Quantity::SampleSize, convention, value, samples: Some(value.ceil() as u64), notes }
}

fn unit_note() -> String {
    "hidden constant set to 1; logarithms clipped at 0".into()
}

/// Evaluates `bound` at `inputs`.
pub fn eval_bound(inputs: &BoundInputs, bound: BoundId) -> Result<BoundValue> {
    inputs.check_common(bound != BoundId::FqiErrorExplicit)?;
    let eps = inputs.epsilon;
    let delta = inputs.delta;
    let l = inputs.horizon as f64;
    let a = inputs.num_actions as f64;
    let unit = Convention::UnitConstant;
    Ok(match bound {
        BoundId::DplClassification => {
            let d = inputs.dim(bound)?;
            let v = d / (eps * eps) * (ln_plus(d / (eps * l)) + d / l * (l.ln() + a.ln()) + l * l * (1.0 / delta).ln());
            sample(bound, unit, v, vec![unit_note()])
        }
        BoundId::DplValue => {
            let d = inputs.dim(bound)?;
            let v = l.powi(4) * d / (eps * eps)
                * (ln_plus(l * d / eps) + d / l * (l.ln() + a.ln()) + l * l * (1.0 / delta).ln());
            let target = format!("value error target epsilon + alpha = {}", eps + inputs.alpha);
            sample(bound, unit, v, vec![unit_note(), target])
        }
        BoundId::DplLower => {
            let d = inputs.dim(bound)?;
            sample(bound, unit, l * (d + (1.0 / delta).ln()) / eps, vec!["constant set to 1".into()])
        }
        BoundId::ErmExplicit => {
            let d = inputs.dim(bound)?;
            let e = eps / 2.0;
            let tau = inputs.tau_min.unwrap_or(8.0 * l);
            let coef = (32.0 * d / (e * e * l)).max(1.0);
            let v = 4.0 * coef * (2.0 * coef).ln()
                + 8.0 / (e * e) * (8.0 * d / l * (l.ln() + 2.0 * a.ln()) + (3.0 * l + 3.0) * tau * (4.0 / delta).ln());
            let mut notes = vec![
                "explicit constants; evaluated at epsilon/2 for excess error epsilon".into(),
                format!("tau_min = {tau}"),
            ];
            if 32.0 * d / (e * e * l) < 1.0 {
                notes.push("32 d / (epsilon^2 L) below 1, clamped to 1".into());
            }
            sample(bound, Convention::Explicit, v, notes)
        }
        BoundId::FqiUpper | BoundId::ModelBasedUpper => {
            let c = inputs.conc(bound)?;
            let f = at_least_one(need(inputs.class_size, "class_size", bound)?, "class_size")?;
            let v = c * l.powi(6) * (l * f / delta).ln() / (eps * eps);
            sample(bound, unit, v, vec!["constant set to 1".into()])
        }
        BoundId::FqiErrorExplicit => {
            let value = fqi_error(inputs, need(inputs.samples, "samples", bound)?)?;
            let mut notes = vec!["explicit constants".to_string()];
            if inputs.approximation_error == 0.0 {
                notes.push("approximation error 0 (realizable class)".into());
            }
            BoundValue { bound, quantity: Quantity::ValueError, convention: Convention::Explicit, value, samples: None, notes }
        }
        BoundId::FirstRoundLower => {
            let k = at_least_one(inputs.arms.unwrap_or(inputs.num_actions), "arms")?;
            sample(bound, unit, k / (eps * eps), vec!["constant set to 1".into()])
        }
        BoundId::PermutationLower => {
            let k = at_least_one(inputs.arms.unwrap_or(inputs.num_actions), "arms")?;
            let mut notes = vec!["explicit constant 162; horizon counts pulls per context".to_string()];
            if 9.0 * eps * eps * k * k > 0.5 {
                notes.push("9 eps^2 K^2 exceeds 1/2; outside the construction's validity range".into());
            }
            sample(bound, Convention::Explicit, k / (162.0 * eps * eps * l), notes)
        }
        BoundId::ExplorationLower => sample(bound, unit, a.powf(l) / (l * eps * eps), vec!["constant set to 1".into()]),
        BoundId::HypothesisLower => {
            let h = at_least_one(need(inputs.class_size, "class_size", bound)?, "class_size")?;
            sample(bound, unit, h / (eps * eps), vec!["constant set to 1".into()])
        }
        BoundId::ContextLower => {
            let n = at_least_one(need(inputs.num_contexts, "num_contexts", bound)?, "num_contexts")?;
            sample(bound, unit, n / (l * eps * eps), vec!["constant set to 1".into()])
        }
        BoundId::ConcentratabilityLower => {
            let c = inputs.conc(bound)?;
            sample(bound, unit, c * a.powf(l) / (l * eps * eps), vec!["constant set to 1; in expectation over mu".into()])
        }
        BoundId::Separation => {
            let upper = eval_bound(inputs, BoundId::DplValue)?.value;
            let lower = eval_bound(inputs, BoundId::DplLower)?.value;
            BoundValue {
                bound,
                quantity: Quantity::Ratio,
                convention: unit,
                value: upper / lower,
                samples: None,
                notes: vec!["ratio of dpl_value to dpl_lower, both with constant 1".into()],
            }
        }
    })
}

/// FQI value-error bound after `m` one-step trajectories.
pub fn fqi_error(inputs: &BoundInputs, m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    inputs.check_common(false)?;
    let bound = BoundId::FqiErrorExplicit;
    let c = inputs.conc(bound)?;
    let f = at_least_one(need(inputs.class_size, "class_size", bound)?, "class_size")?;
    let l = inputs.horizon as f64;
    let m = m as f64;
    let log = (l * f * f / inputs.delta).ln();
    let eff = inputs.approximation_error;
    let inner = 56.0 * l * l * log / (3.0 * m) + (32.0 * l * l * log / m * eff).sqrt() + eff;
    Ok(l * (l + 1.0) * (c * inner).sqrt())
}

/// Smallest `m` whose FQI error bound is at most `target`.
pub fn fqi_samples_for_error(inputs: &BoundInputs, target: f64) -> Result<u64> {
    let l = inputs.horizon as f64;
    let c = inputs.conc(BoundId::FqiErrorExplicit)?;
    let floor = l * (l + 1.0) * (c * inputs.approximation_error).sqrt();
    if !(target > floor) {
        return Err(Error::InvalidParameter(format!(
            "target {target} is not above the approximation floor {floor}"
        )));
    }
    let mut hi: u64 = 1;
    while fqi_error(inputs, hi)? > target {
        hi = hi.checked_mul(2).ok_or_else(|| Error::InvalidParameter("sample count overflow".into()))?;
    }
    let mut lo = hi / 2;
    // Invariant: error(lo) > target (or lo == 0), error(hi) <= target.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fqi_error(inputs, mid)? <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base() -> BoundInputs {
        BoundInputs {
            d: Some(10),
            epsilon: 0.1,
            delta: 0.1,
            horizon: 5,
            num_actions: 3,
            concentratability: Some(2.0),
            class_size: Some(4),
            num_contexts: Some(7),
            arms: Some(4),
            ..BoundInputs::default()
        }
    }

    #[test]
    fn dpl_lower_reference() {
        let v = eval_bound(&base(), BoundId::DplLower).unwrap();
        assert_relative_eq!(v.value, 5.0 * (10.0 + 10f64.ln()) / 0.1, max_relative = 1e-14);
        assert!((v.value - 615.13).abs() < 0.01);
        assert_eq!(v.samples, Some(616));
    }

    #[test]
    fn fqi_error_reference() {
        let inputs = BoundInputs { horizon: 2, class_size: Some(4), delta: 0.1, samples: Some(10_000), ..base() };
        let v = eval_bound(&inputs, BoundId::FqiErrorExplicit).unwrap();
        let expected = 2.0 * 3.0 * (2.0 * (56.0 / 3.0) * 4.0 * (2.0 * 16.0 / 0.1f64).ln() / 10_000.0).sqrt();
        assert_relative_eq!(v.value, expected, max_relative = 1e-14);
    }

    #[test]
    fn fqi_inverse_is_tight() {
        let inputs = BoundInputs { horizon: 3, approximation_error: 1e-4, ..base() };
        let m = fqi_samples_for_error(&inputs, 0.5).unwrap();
        assert!(fqi_error(&inputs, m).unwrap() <= 0.5);
        assert!(fqi_error(&inputs, m - 1).unwrap() > 0.5);
        assert!(fqi_samples_for_error(&inputs, 1e-3).is_err());
    }

    #[test]
    fn explicit_erm_formula() {
        let i = base();
        let v = eval_bound(&i, BoundId::ErmExplicit).unwrap();
        let (d, e, l, a) = (10.0f64, 0.05f64, 5.0f64, 3.0f64);
        let expected = 128.0 * d / (e * e * l) * (64.0 * d / (e * e * l)).ln()
            + 8.0 / (e * e) * (8.0 * d / l * (l.ln() + 2.0 * a.ln()) + (3.0 * l + 3.0) * 8.0 * l * (4.0f64 / 0.1).ln());
        assert_relative_eq!(v.value, expected, max_relative = 1e-12);
        assert_eq!(v.convention, Convention::Explicit);
    }

    #[test]
    fn sample_bounds_are_monotone() {
        for bound in BoundId::ALL {
            if matches!(bound, BoundId::FqiErrorExplicit | BoundId::Separation) {
                continue;
            }
            let mut prev = f64::INFINITY;
            for k in 1..50 {
                let eps = k as f64 / 50.0;
                let v = eval_bound(&BoundInputs { epsilon: eps, ..base() }, bound).unwrap().value;
                assert!(v <= prev * (1.0 + 1e-12), "{bound} increased at eps={eps}");
                prev = v;
            }
            let mut prev = 0.0;
            for k in 1..50 {
                let delta = 1.0 - k as f64 / 50.0;
                let v = eval_bound(&BoundInputs { delta, ..base() }, bound).unwrap().value;
                assert!(v >= prev * (1.0 - 1e-12), "{bound} decreased as delta shrank");
                prev = v;
            }
        }
    }

    #[test]
    fn separation_is_ratio() {
        let i = base();
        let s = eval_bound(&i, BoundId::Separation).unwrap().value;
        let u = eval_bound(&i, BoundId::DplValue).unwrap().value;
        let l = eval_bound(&i, BoundId::DplLower).unwrap().value;
        assert_relative_eq!(s, u / l, max_relative = 1e-15);
    }

    #[test]
    fn invalid_inputs() {
        assert!(eval_bound(&BoundInputs { epsilon: 0.0, ..base() }, BoundId::DplLower).is_err());
        assert!(eval_bound(&BoundInputs { delta: 1.0, ..base() }, BoundId::DplLower).is_err());
        assert!(eval_bound(&BoundInputs { d: None, ..base() }, BoundId::DplValue).is_err());
        assert!(eval_bound(&BoundInputs { concentratability: Some(0.5), ..base() }, BoundId::FqiUpper).is_err());
        assert_eq!("fqi_upper".parse::<BoundId>().unwrap(), BoundId::FqiUpper);
        assert!("nope".parse::<BoundId>().is_err());
    }

    #[test]
    fn permutation_reference() {
        let v = eval_bound(&BoundInputs { horizon: 1, arms: Some(4), ..base() }, BoundId::PermutationLower).unwrap();
        assert_relative_eq!(v.value, 4.0 / (162.0 * 0.01), max_relative = 1e-14);
        assert_eq!(v.notes.len(), 2);
    }
}
