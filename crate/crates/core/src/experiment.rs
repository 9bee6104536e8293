//! One end-to-end episode: draw a ground truth, generate a batch, learn, and
//! evaluate the learned policy exactly.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cmdp::{DataDistribution, Policy};
use crate::constructions::Family;
use crate::error::{Error, Result};
use crate::learners::{build_q_class, dpl_erm, fqi, model_based_learn, true_error, BatchRef, QClass};
use crate::planner::{optimal, policy_value};
use crate::sampling::{generate_expert_batch, generate_model_batch};
use crate::seed::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Dpl,
    Mle,
    Fqi,
}

impl LearnerKind {
    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Dpl => "dpl",
            LearnerKind::Mle => "mle",
            LearnerKind::Fqi => "fqi",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Expert trajectories, or `L` one-step samples per context draw from `μ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataProcess {
    Expert,
    OneStep,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawChoice<T> {
    Name(String),
    Value(T),
}

/// `"uniform"` or an explicit `[s][a]`-flattened mass vector.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChoice<Vec<f64>>", into = "RawChoice<Vec<f64>>")]
pub enum MuSpec {
    #[default]
    Uniform,
    Vector(Vec<f64>),
}

impl TryFrom<RawChoice<Vec<f64>>> for MuSpec {
    type Error = String;

    fn try_from(raw: RawChoice<Vec<f64>>) -> std::result::Result<Self, String> {
        match raw {
            RawChoice::Name(n) if n == "uniform" => Ok(MuSpec::Uniform),
            RawChoice::Name(n) => Err(format!("mu must be \"uniform\" or a vector, got \"{n}\"")),
            RawChoice::Value(v) => Ok(MuSpec::Vector(v)),
        }
    }
}

impl From<MuSpec> for RawChoice<Vec<f64>> {
    fn from(spec: MuSpec) -> Self {
        match spec {
            MuSpec::Uniform => RawChoice::Name("uniform".into()),
            MuSpec::Vector(v) => RawChoice::Value(v),
        }
    }
}

/// `"uniform"` over the family's truths, or a fixed truth index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawChoice<usize>", into = "RawChoice<usize>")]
pub enum GroundTruth {
    #[default]
    Uniform,
    Index(usize),
}

impl TryFrom<RawChoice<usize>> for GroundTruth {
    type Error = String;

    fn try_from(raw: RawChoice<usize>) -> std::result::Result<Self, String> {
        match raw {
            RawChoice::Name(n) if n == "uniform" => Ok(GroundTruth::Uniform),
            RawChoice::Name(n) => Err(format!("ground_truth must be \"uniform\" or an index, got \"{n}\"")),
            RawChoice::Value(i) => Ok(GroundTruth::Index(i)),
        }
    }
}

impl From<GroundTruth> for RawChoice<usize> {
    fn from(g: GroundTruth) -> Self {
        match g {
            GroundTruth::Uniform => RawChoice::Name("uniform".into()),
            GroundTruth::Index(i) => RawChoice::Value(i),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub truth_index: usize,
    /// Optimal minus learned value, in certificate units.
    pub value_error: f64,
    /// Exact true error against the expert; DPL only.
    pub classification_error: Option<f64>,
    pub selected_hypothesis_index: usize,
    pub degenerate: bool,
}

/// A family paired with a learner and data process, with per-truth optimal
/// values and the Q-class precomputed.
#[derive(Clone, Debug)]
pub struct Experiment {
    family: Family,
    learner: LearnerKind,
    data: DataProcess,
    mu: Option<DataDistribution>,
    ground_truth: GroundTruth,
    q_class: Option<QClass>,
    optimal_values: Vec<f64>,
}

impl Experiment {
    pub fn new(
        family: Family,
        learner: LearnerKind,
        data: DataProcess,
        mu: &MuSpec,
        ground_truth: GroundTruth,
    ) -> Result<Self> {
        match (learner, data) {
            (LearnerKind::Dpl, DataProcess::OneStep) => {
                return Err(Error::Incompatible("dpl learns from expert trajectories, not one-step data".into()))
            }
            (LearnerKind::Fqi, DataProcess::Expert) => {
                return Err(Error::Incompatible("fqi requires one-step data".into()))
            }
            _ => {}
        }
        if learner != LearnerKind::Dpl && family.model_class().is_none() {
            return Err(Error::Incompatible(format!("family {} has no model class for {learner}", family.kind())));
        }
        if let GroundTruth::Index(k) = ground_truth {
            if k >= family.num_truths() {
                return Err(Error::InvalidParameter(format!(
                    "ground truth {k} out of range for {} truths",
                    family.num_truths()
                )));
            }
        }
        let base = family.instance(0);
        let mu = match (data, mu) {
            (DataProcess::OneStep, MuSpec::Uniform) => {
                Some(DataDistribution::uniform(base.num_states(), base.num_actions()))
            }
            (DataProcess::OneStep, MuSpec::Vector(v)) => {
                Some(DataDistribution::new(base.num_states(), base.num_actions(), v.clone())?)
            }
            (DataProcess::Expert, MuSpec::Uniform) => None,
            (DataProcess::Expert, MuSpec::Vector(_)) => {
                return Err(Error::Incompatible("mu applies to one-step data only".into()))
            }
        };
        let q_class = match (learner, family.model_class()) {
            (LearnerKind::Fqi, Some(mc)) => Some(build_q_class(mc)?),
            _ => None,
        };
        let optimal_values =
            (0..family.num_truths()).map(|k| optimal(family.instance(k)).map(|(v, _, _)| v)).collect::<Result<_>>()?;
        Ok(Self { family, learner, data, mu, ground_truth, q_class, optimal_values })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn learner(&self) -> LearnerKind {
        self.learner
    }

    pub fn data(&self) -> DataProcess {
        self.data
    }

    pub fn mu(&self) -> Option<&DataDistribution> {
        self.mu.as_ref()
    }

    /// Optimal value of truth `k` in planner units.
    pub fn optimal_value(&self, truth: usize) -> f64 {
        self.optimal_values[truth]
    }

    /// Expert suboptimality of truth `k` in certificate units.
    pub fn expert_gap(&self, truth: usize) -> Result<f64> {
        let v = policy_value(self.family.instance(truth), self.family.expert(truth))?;
        Ok((self.optimal_values[truth] - v) / self.family.certificate().value_scale)
    }

    /// Runs one episode with `m` trajectories (expert data) or `m` context
    /// draws of `L` samples each (one-step data). The seed fixes the truth
    /// draw and the batch.
    pub fn run_episode(&self, m: usize, seed: u64) -> Result<EpisodeOutcome> {
        let mut rng = rng_from_seed(seed);
        let truth = match self.ground_truth {
            GroundTruth::Uniform => rng.gen_range(0..self.family.num_truths()),
            GroundTruth::Index(k) => k,
        };
        let data_seed: u64 = rng.gen();
        let cmdp = self.family.instance(truth);
        let expert = self.family.expert(truth);

        let (policy, selected, degenerate, classification_error): (Policy, usize, bool, Option<f64>) =
            match (self.learner, self.data) {
                (LearnerKind::Dpl, _) => {
                    let batch = generate_expert_batch(cmdp, expert, m, data_seed)?;
                    let out = dpl_erm(&batch, self.family.policy_class())?;
                    let err = true_error(cmdp, expert, &out.policy)?;
                    (out.policy, out.index, out.degenerate, Some(err))
                }
                (LearnerKind::Mle, DataProcess::Expert) => {
                    let batch = generate_expert_batch(cmdp, expert, m, data_seed)?;
                    let out = model_based_learn(BatchRef::Trajectories(&batch), self.model_class()?)?;
                    (out.policy, out.selection.index, out.selection.degenerate, None)
                }
                (LearnerKind::Mle, DataProcess::OneStep) => {
                    let batch = generate_model_batch(cmdp, self.one_step_mu()?, m, data_seed)?;
                    let out = model_based_learn(BatchRef::OneStep(&batch), self.model_class()?)?;
                    (out.policy, out.selection.index, out.selection.degenerate, None)
                }
                (LearnerKind::Fqi, _) => {
                    let batch = generate_model_batch(cmdp, self.one_step_mu()?, m, data_seed)?;
                    let q_class = self.q_class.as_ref().ok_or_else(|| Error::Incompatible("no Q-class".into()))?;
                    let out = fqi(&batch, q_class)?;
                    (out.policy, out.selected.last().copied().unwrap_or(0), out.degenerate, None)
                }
            };
        let value = policy_value(cmdp, &policy)?;
        let value_error = ((self.optimal_values[truth] - value) / self.family.certificate().value_scale).max(0.0);
        Ok(EpisodeOutcome {
            truth_index: truth,
            value_error,
            classification_error,
            selected_hypothesis_index: selected,
            degenerate,
        })
    }

    fn model_class(&self) -> Result<&crate::learners::ModelClass> {
        self.family.model_class().ok_or_else(|| Error::Incompatible("family has no model class".into()))
    }

    fn one_step_mu(&self) -> Result<&DataDistribution> {
        self.mu.as_ref().ok_or_else(|| Error::Incompatible("one-step data needs mu".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::FamilySpec;

    fn tree() -> Family {
        Family::build(&FamilySpec::Tree { branching: 2, depth: 3, epsilon: 0.3, derangement: None }).unwrap()
    }

    #[test]
    fn incompatible_pairings_rejected() {
        let u = MuSpec::Uniform;
        let g = GroundTruth::Uniform;
        assert!(matches!(Experiment::new(tree(), LearnerKind::Fqi, DataProcess::Expert, &u, g), Err(Error::Incompatible(_))));
        assert!(matches!(Experiment::new(tree(), LearnerKind::Dpl, DataProcess::OneStep, &u, g), Err(Error::Incompatible(_))));
        let bandit = Family::build(&FamilySpec::FirstRoundBandit { arms: 3, horizon: 2, epsilon: 0.1 }).unwrap();
        assert!(Experiment::new(bandit, LearnerKind::Mle, DataProcess::OneStep, &u, g).is_err());
        assert!(Experiment::new(tree(), LearnerKind::Mle, DataProcess::Expert, &u, GroundTruth::Index(2)).is_err());
    }

    #[test]
    fn episodes_are_deterministic() {
        let e = Experiment::new(tree(), LearnerKind::Mle, DataProcess::OneStep, &MuSpec::Uniform, GroundTruth::Uniform).unwrap();
        for seed in 0..5 {
            assert_eq!(e.run_episode(20, seed).unwrap(), e.run_episode(20, seed).unwrap());
        }
    }

    #[test]
    fn dpl_recovers_expert_on_tree() {
        let e = Experiment::new(tree(), LearnerKind::Dpl, DataProcess::Expert, &MuSpec::Uniform, GroundTruth::Index(0)).unwrap();
        let out = e.run_episode(50, 3).unwrap();
        assert_eq!(out.selected_hypothesis_index, 2);
        assert!((out.value_error - 0.25).abs() < 1e-12);
        assert_eq!(out.classification_error, Some(0.0));
        assert!((e.expert_gap(0).unwrap() - 0.25).abs() < 1e-12);
        let empty = e.run_episode(0, 3).unwrap();
        assert!(empty.degenerate);
    }

    #[test]
    fn mu_spec_parsing() {
        #[derive(Deserialize)]
        struct W {
            mu: MuSpec,
            g: GroundTruth,
        }
        let w: W = toml::from_str("mu = \"uniform\"\ng = 3\n").unwrap();
        assert_eq!(w.mu, MuSpec::Uniform);
        assert_eq!(w.g, GroundTruth::Index(3));
        let w: W = toml::from_str("mu = [0.5, 0.5]\ng = \"uniform\"\n").unwrap();
        assert_eq!(w.mu, MuSpec::Vector(vec![0.5, 0.5]));
        assert!(toml::from_str::<W>("mu = \"other\"\ng = 1\n").is_err());
    }
}
