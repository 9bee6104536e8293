//! Experiment configuration files.
//!
//! ```toml
//! [experiment]
//! id = "tree-mle-expert"
//! seed = 42
//! workers = 4            # optional; the runner's default otherwise
//!
//! [family]
//! kind = "tree"          # tree | dpl_lower | first_round_bandit | permutation_bandit
//! branching = 2
//! depth = 3
//! epsilon = 0.3
//!
//! [learner]
//! kind = "mle"           # dpl | mle | fqi
//! data = "expert"        # expert | one_step
//! mu = "uniform"         # or an explicit [s][a]-flattened vector; one_step only
//! ground_truth = "uniform"  # or a truth index
//!
//! [evaluation]
//! epsilon = 0.3
//! delta = 0.1
//! m_grid = [1, 10, 100]
//! trials = 200
//!
//! [output]
//! dir = "results/tree-mle-expert"
//! ```
//!
//! Unknown keys at any level are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::check_grid;
use crate::constructions::{Family, FamilySpec};
use crate::error::{Error, Result};
use crate::experiment::{DataProcess, Experiment, GroundTruth, LearnerKind, MuSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub id: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSection {
    pub kind: LearnerKind,
    pub data: DataProcess,
    #[serde(default)]
    pub mu: MuSpec,
    #[serde(default)]
    pub ground_truth: GroundTruth,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationSection {
    pub epsilon: f64,
    pub delta: f64,
    pub m_grid: Vec<usize>,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub family: FamilySpec,
    pub learner: LearnerSection,
    pub evaluation: EvaluationSection,
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.check()?;
        Ok(config)
    }

    /// Reads and checks a config; a relative output dir resolves against
    /// the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config =
            Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if config.output.dir.is_relative() {
            if let Some(parent) = path.parent() {
                config.output.dir = parent.join(&config.output.dir);
            }
        }
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Range checks that do not need the family built.
    pub fn check(&self) -> Result<()> {
        let eval = &self.evaluation;
        if self.experiment.id.is_empty() {
            return Err(Error::Config("experiment.id must be nonempty".into()));
        }
        if self.experiment.workers == Some(0) {
            return Err(Error::Config("experiment.workers must be at least 1".into()));
        }
        if !(eval.epsilon > 0.0 && eval.epsilon.is_finite()) {
            return Err(Error::Config(format!("evaluation.epsilon must be positive, got {}", eval.epsilon)));
        }
        if !(eval.delta > 0.0 && eval.delta < 1.0) {
            return Err(Error::Config(format!("evaluation.delta must lie in (0, 1), got {}", eval.delta)));
        }
        check_grid(&eval.m_grid, eval.trials).map_err(|e| Error::Config(e.to_string()))
    }

    /// Builds the family and pairs it with the learner and data process.
    pub fn build_experiment(&self) -> Result<Experiment> {
        let family = Family::build(&self.family)?;
        Experiment::new(family, self.learner.kind, self.learner.data, &self.learner.mu, self.learner.ground_truth)
    }
}
