//! Instance files (JSON), batch files (JSON lines) and generic JSON helpers.
//!
//! All indices are 0-based. Numeric arrays follow the instance convention:
//! transitions `[θ][s][a][s']`, reward means `[s][a]`, policies `[θ][t][s]`,
//! Q-tables `[θ][level][s][a]`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cmdp::{OneStepSample, RewardTable, TabularCmdp, Trajectory, TransitionTensor};
use crate::error::{Error, Result};

/// Instance-file schema version written by this crate.
pub const INSTANCE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: u32,
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
    pub num_contexts: usize,
    pub context_prior: Vec<f64>,
    pub initial_dist: Vec<f64>,
    pub transitions: Vec<Vec<Vec<Vec<f64>>>>,
    pub reward_means: Vec<Vec<f64>>,
    /// Carried for completeness; every objective here is undiscounted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

impl InstanceFile {
    pub fn from_cmdp(cmdp: &TabularCmdp) -> Self {
        Self {
            version: INSTANCE_VERSION,
            num_states: cmdp.num_states(),
            num_actions: cmdp.num_actions(),
            horizon: cmdp.horizon(),
            num_contexts: cmdp.num_contexts(),
            context_prior: cmdp.context_prior().to_vec(),
            initial_dist: cmdp.initial_dist().to_vec(),
            transitions: cmdp.transitions().to_nested(),
            reward_means: cmdp.rewards().to_nested(),
            gamma: cmdp.gamma(),
        }
    }

    /// Builds the instance, checking the declared sizes against the arrays.
    /// Stochasticity is left to [`TabularCmdp::validate`].
    pub fn into_cmdp(self) -> Result<TabularCmdp> {
        if self.version != INSTANCE_VERSION {
            return Err(Error::Shape(format!("unsupported instance version {}", self.version)));
        }
        let transitions = TransitionTensor::from_nested(self.transitions)?;
        let rewards = RewardTable::from_nested(self.reward_means)?;
        let declared = (self.num_contexts, self.num_states, self.num_actions);
        let actual = (transitions.num_contexts(), transitions.num_states(), transitions.num_actions());
        if declared != actual {
            return Err(Error::Shape(format!(
                "declared (contexts, states, actions) = {declared:?}, transitions are {actual:?}"
            )));
        }
        let mut cmdp = TabularCmdp::new(self.horizon, self.context_prior, self.initial_dist, transitions, rewards)?;
        cmdp.set_gamma(self.gamma);
        Ok(cmdp)
    }
}

/// Reads any JSON document.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::json(path, e))
}

/// Writes any value as pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::json(path, e))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn read_instance(path: &Path) -> Result<TabularCmdp> {
    read_json::<InstanceFile>(path)?.into_cmdp()
}

pub fn write_instance(path: &Path, cmdp: &TabularCmdp) -> Result<()> {
    write_json(path, &InstanceFile::from_cmdp(cmdp))
}

/// One line of a batch file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BatchRecord {
    Trajectory(Trajectory),
    OneStep(OneStepSample),
}

/// A homogeneous batch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Batch {
    Trajectories(Vec<Trajectory>),
    OneStep(Vec<OneStepSample>),
}

impl Batch {
    pub fn len(&self) -> usize {
        match self {
            Batch::Trajectories(v) => v.len(),
            Batch::OneStep(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_ref(&self) -> crate::learners::BatchRef<'_> {
        match self {
            Batch::Trajectories(v) => crate::learners::BatchRef::Trajectories(v),
            Batch::OneStep(v) => crate::learners::BatchRef::OneStep(v),
        }
    }

    fn records(&self) -> Box<dyn Iterator<Item = BatchRecord> + '_> {
        match self {
            Batch::Trajectories(v) => Box::new(v.iter().cloned().map(BatchRecord::Trajectory)),
            Batch::OneStep(v) => Box::new(v.iter().copied().map(BatchRecord::OneStep)),
        }
    }
}

pub fn write_batch_to<W: Write>(mut w: W, batch: &Batch) -> std::io::Result<()> {
    for record in batch.records() {
        serde_json::to_writer(&mut w, &record)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn write_batch(path: &Path, batch: &Batch) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_batch_to(BufWriter::new(file), batch).map_err(|e| Error::io(path, e))
}

/// Reads a batch file; blank lines are skipped and mixing kinds is an error.
/// An empty file reads as an empty trajectory batch.
pub fn read_batch(path: &Path) -> Result<Batch> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut trajectories = Vec::new();
    let mut samples = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line).map_err(|e| Error::json(path, e))? {
            BatchRecord::Trajectory(t) => trajectories.push(t),
            BatchRecord::OneStep(s) => samples.push(s),
        }
        if !trajectories.is_empty() && !samples.is_empty() {
            return Err(Error::Shape(format!("{}: line {} mixes batch kinds", path.display(), n + 1)));
        }
    }
    Ok(if samples.is_empty() { Batch::Trajectories(trajectories) } else { Batch::OneStep(samples) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmdp::{Policy, Step};
    use crate::planner::plan;
    use crate::random::random_cmdp;
    use crate::sampling::{generate_expert_batch, generate_model_batch};

    #[test]
    fn instance_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        let mut cmdp = random_cmdp(2, 3, 2, 4, 7);
        cmdp.set_gamma(Some(0.9));
        write_instance(&path, &cmdp).unwrap();
        assert_eq!(read_instance(&path).unwrap(), cmdp);
    }

    #[test]
    fn declared_sizes_are_checked() {
        let mut file = InstanceFile::from_cmdp(&random_cmdp(1, 2, 2, 2, 0));
        file.num_actions = 3;
        assert!(matches!(file.into_cmdp(), Err(Error::Shape(_))));
        let unknown = r#"{"version":1,"num_states":1,"num_actions":1,"horizon":1,"num_contexts":1,
            "context_prior":[1],"initial_dist":[1],"transitions":[[[[1]]]],"reward_means":[[0]],"extra":0}"#;
        assert!(serde_json::from_str::<InstanceFile>(unknown).is_err());
    }

    #[test]
    fn batch_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cmdp = random_cmdp(2, 3, 2, 3, 1);
        let expert = Policy::constant(2, 3, 3, 1);
        for batch in [
            Batch::Trajectories(generate_expert_batch(&cmdp, &expert, 5, 9).unwrap()),
            Batch::OneStep(generate_model_batch(&cmdp, &crate::cmdp::DataDistribution::uniform(3, 2), 4, 9).unwrap()),
        ] {
            let path = dir.path().join("b.jsonl");
            write_batch(&path, &batch).unwrap();
            assert_eq!(read_batch(&path).unwrap(), batch);
        }
    }

    #[test]
    fn batch_lines_are_tagged() {
        let t = Trajectory { context: 1, steps: vec![Step { time: 0, state: 0, action: 1, reward: 1 }] };
        let mut buf = Vec::new();
        write_batch_to(&mut buf, &Batch::Trajectories(vec![t])).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert!(line.starts_with(r#"{"kind":"trajectory","context":1"#), "{line}");
    }

    #[test]
    fn mixed_batches_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mixed.jsonl");
        std::fs::write(
            &path,
            "{\"kind\":\"one_step\",\"context\":0,\"state\":0,\"action\":0,\"reward\":0,\"next_state\":0}\n\
             {\"kind\":\"trajectory\",\"context\":0,\"steps\":[]}\n",
        )
        .unwrap();
        assert!(read_batch(&path).is_err());
    }

    #[test]
    fn policy_and_q_json() {
        let dir = tempfile::tempdir().unwrap();
        let cmdp = random_cmdp(2, 3, 2, 3, 4);
        let (policy, q) = plan(cmdp.transitions(), cmdp.rewards(), 3).unwrap();
        let p = dir.path().join("p.json");
        write_json(&p, &policy).unwrap();
        assert_eq!(read_json::<Policy>(&p).unwrap(), policy);
        write_json(&p, &q).unwrap();
        assert_eq!(read_json::<crate::planner::QTable>(&p).unwrap(), q);
    }

    #[test]
    fn missing_file_names_path() {
        let err = read_instance(Path::new("/nonexistent/inst.json")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/inst.json"));
    }
}
