//! Direct policy learning by empirical risk minimization and model-based
//! learning by maximum-likelihood model selection or fitted Q-iteration.
//!
//! Every argmin and argmax resolves ties toward the lowest hypothesis index.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmdp::{OneStepSample, Policy, RewardTable, TabularCmdp, Trajectory, TransitionTensor, ValidationOptions};
use crate::error::{Error, Result};
use crate::planner::{argmax_lowest, argmin_lowest, evaluate_policy, plan, QTable};

/// A nonempty finite set of policies sharing one shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolicyClass", into = "RawPolicyClass")]
pub struct PolicyClass {
    hypotheses: Vec<Policy>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicyClass {
    hypotheses: Vec<Policy>,
}

impl PolicyClass {
    pub fn new(hypotheses: Vec<Policy>) -> Result<Self> {
        let first = hypotheses.first().ok_or(Error::EmptyClass)?;
        let shape = (first.num_contexts(), first.horizon(), first.num_states());
        if let Some(i) = hypotheses.iter().position(|h| (h.num_contexts(), h.horizon(), h.num_states()) != shape) {
            return Err(Error::Shape(format!("policy hypothesis {i} differs in shape from hypothesis 0")));
        }
        Ok(Self { hypotheses })
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn get(&self, index: usize) -> &Policy {
        &self.hypotheses[index]
    }

    pub fn hypotheses(&self) -> &[Policy] {
        &self.hypotheses
    }

    /// Checks every hypothesis against the shape of `cmdp`.
    pub fn check_for(&self, cmdp: &TabularCmdp) -> Result<()> {
        self.hypotheses.iter().try_for_each(|h| h.check_for(cmdp))
    }
}

impl TryFrom<RawPolicyClass> for PolicyClass {
    type Error = Error;

    fn try_from(raw: RawPolicyClass) -> Result<Self> {
        Self::new(raw.hypotheses)
    }
}

impl From<PolicyClass> for RawPolicyClass {
    fn from(class: PolicyClass) -> Self {
        Self { hypotheses: class.hypotheses }
    }
}

/// A nonempty finite set of transition models sharing rewards, horizon,
/// context prior and initial distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModelClass", into = "RawModelClass")]
pub struct ModelClass {
    models: Vec<TransitionTensor>,
    rewards: RewardTable,
    horizon: usize,
    context_prior: Vec<f64>,
    initial_dist: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModelClass {
    horizon: usize,
    context_prior: Vec<f64>,
    initial_dist: Vec<f64>,
    reward_means: RewardTable,
    models: Vec<TransitionTensor>,
}

impl ModelClass {
    /// Builds a class whose shared parts are taken from `template`. Every
    /// member must be a valid CMDP on its own.
    pub fn new(models: Vec<TransitionTensor>, template: &TabularCmdp) -> Result<Self> {
        Self::from_parts(
            models,
            template.rewards().clone(),
            template.horizon(),
            template.context_prior().to_vec(),
            template.initial_dist().to_vec(),
        )
    }

    pub fn from_parts(
        models: Vec<TransitionTensor>,
        rewards: RewardTable,
        horizon: usize,
        context_prior: Vec<f64>,
        initial_dist: Vec<f64>,
    ) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::EmptyClass);
        }
        let class = Self { models, rewards, horizon, context_prior, initial_dist };
        for i in 0..class.len() {
            class.instance(i)?.ensure_valid(ValidationOptions::default())?;
        }
        Ok(class)
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn model(&self, index: usize) -> &TransitionTensor {
        &self.models[index]
    }

    pub fn models(&self) -> &[TransitionTensor] {
        &self.models
    }

    pub fn rewards(&self) -> &RewardTable {
        &self.rewards
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn context_prior(&self) -> &[f64] {
        &self.context_prior
    }

    pub fn initial_dist(&self) -> &[f64] {
        &self.initial_dist
    }

    pub fn num_contexts(&self) -> usize {
        self.context_prior.len()
    }

    pub fn num_states(&self) -> usize {
        self.initial_dist.len()
    }

    pub fn num_actions(&self) -> usize {
        self.rewards.num_actions()
    }

    /// The CMDP obtained by taking member `index` as the true model.
    pub fn instance(&self, index: usize) -> Result<TabularCmdp> {
        TabularCmdp::new(
            self.horizon,
            self.context_prior.clone(),
            self.initial_dist.clone(),
            self.models[index].clone(),
            self.rewards.clone(),
        )
    }
}

impl TryFrom<RawModelClass> for ModelClass {
    type Error = Error;

    fn try_from(raw: RawModelClass) -> Result<Self> {
        Self::from_parts(raw.models, raw.reward_means, raw.horizon, raw.context_prior, raw.initial_dist)
    }
}

impl From<ModelClass> for RawModelClass {
    fn from(class: ModelClass) -> Self {
        Self {
            horizon: class.horizon,
            context_prior: class.context_prior,
            initial_dist: class.initial_dist,
            reward_means: class.rewards,
            models: class.models,
        }
    }
}

/// A nonempty finite set of Q-tables of one shape, each zero at level 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<QTable>", into = "Vec<QTable>")]
pub struct QClass {
    q_functions: Vec<QTable>,
}

impl QClass {
    pub fn new(q_functions: Vec<QTable>) -> Result<Self> {
        let first = q_functions.first().ok_or(Error::EmptyClass)?;
        let shape = |q: &QTable| (q.num_contexts(), q.horizon(), q.num_states(), q.num_actions());
        for (i, q) in q_functions.iter().enumerate() {
            if shape(q) != shape(first) {
                return Err(Error::Shape(format!("Q-function {i} differs in shape from Q-function 0")));
            }
            if (0..q.num_contexts()).any(|c| q.slice(c, 0).iter().any(|&x| x != 0.0)) {
                return Err(Error::InvalidParameter(format!("Q-function {i} is nonzero at level 0")));
            }
            if (0..q.num_contexts()).any(|c| (0..=q.horizon()).any(|l| q.slice(c, l).iter().any(|x| !x.is_finite()))) {
                return Err(Error::InvalidParameter(format!("Q-function {i} has non-finite entries")));
            }
        }
        Ok(Self { q_functions })
    }

    pub fn len(&self) -> usize {
        self.q_functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q_functions.is_empty()
    }

    pub fn get(&self, index: usize) -> &QTable {
        &self.q_functions[index]
    }

    pub fn q_functions(&self) -> &[QTable] {
        &self.q_functions
    }
}

impl TryFrom<Vec<QTable>> for QClass {
    type Error = Error;

    fn try_from(value: Vec<QTable>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<QClass> for Vec<QTable> {
    fn from(value: QClass) -> Self {
        value.q_functions
    }
}

/// Either batch shape accepted by model selection.
#[derive(Clone, Copy, Debug)]
pub enum BatchRef<'a> {
    Trajectories(&'a [Trajectory]),
    OneStep(&'a [OneStepSample]),
}

impl<'a> BatchRef<'a> {
    pub fn is_empty(&self) -> bool {
        match self {
            BatchRef::Trajectories(b) => b.is_empty(),
            BatchRef::OneStep(b) => b.is_empty(),
        }
    }

    /// Observed `(θ, s, a, s')` transitions in batch order. A trajectory
    /// contributes its `L - 1` consecutive pairs; the successor of its final
    /// step is never observed.
    pub fn transitions(&self) -> Box<dyn Iterator<Item = (usize, usize, usize, usize)> + 'a> {
        match *self {
            BatchRef::Trajectories(b) => Box::new(b.iter().flat_map(|tr| {
                tr.steps.windows(2).map(move |w| (tr.context, w[0].state, w[0].action, w[1].state))
            })),
            BatchRef::OneStep(b) => Box::new(b.iter().map(|x| (x.context, x.state, x.action, x.next_state))),
        }
    }
}

impl<'a> From<&'a [Trajectory]> for BatchRef<'a> {
    fn from(b: &'a [Trajectory]) -> Self {
        BatchRef::Trajectories(b)
    }
}

impl<'a> From<&'a [OneStepSample]> for BatchRef<'a> {
    fn from(b: &'a [OneStepSample]) -> Self {
        BatchRef::OneStep(b)
    }
}

fn disagreements(batch: &[Trajectory], h: &Policy) -> Result<u64> {
    let mut count = 0u64;
    for tr in batch {
        if tr.context >= h.num_contexts() {
            return Err(Error::InvalidContext { context: tr.context, num_contexts: h.num_contexts() });
        }
        for step in &tr.steps {
            if step.time >= h.horizon() || step.state >= h.num_states() {
                return Err(Error::Shape(format!(
                    "batch step (t={}, s={}) outside policy shape",
                    step.time, step.state
                )));
            }
            count += u64::from(h.action(tr.context, step.time, step.state) != step.action);
        }
    }
    Ok(count)
}

fn step_count(batch: &[Trajectory]) -> usize {
    batch.iter().map(|t| t.steps.len()).sum()
}

/// Fraction of logged `(θ, t, s)` points where `h` disagrees with the logged action.
pub fn empirical_error(batch: &[Trajectory], h: &Policy) -> Result<f64> {
    let n = step_count(batch);
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    Ok(disagreements(batch, h)? as f64 / n as f64)
}

/// Exact `(1/L) Σ_l P_π(h ≠ π at step l)` under the expert's own state distribution.
pub fn true_error(cmdp: &TabularCmdp, expert: &Policy, h: &Policy) -> Result<f64> {
    h.check_for(cmdp)?;
    let (_, occ) = evaluate_policy(cmdp, expert)?;
    let mut total = 0.0;
    for (c, &pc) in cmdp.context_prior().iter().enumerate() {
        for t in 0..cmdp.horizon() {
            for s in 0..cmdp.num_states() {
                if h.action(c, t, s) != expert.action(c, t, s) {
                    total += pc * occ.state_marginal(c, t, s);
                }
            }
        }
    }
    Ok(total / cmdp.horizon() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErmOutput {
    pub index: usize,
    pub policy: Policy,
    /// `None` for an empty batch.
    pub empirical_error: Option<f64>,
    /// Set when the batch was empty and the index is the default.
    pub degenerate: bool,
}

/// Empirical risk minimization over `class`.
pub fn dpl_erm(batch: &[Trajectory], class: &PolicyClass) -> Result<ErmOutput> {
    let n = step_count(batch);
    if n == 0 {
        return Ok(ErmOutput { index: 0, policy: class.get(0).clone(), empirical_error: None, degenerate: true });
    }
    let counts: Vec<u64> =
        class.hypotheses().par_iter().map(|h| disagreements(batch, h)).collect::<Result<_>>()?;
    let mut index = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c < counts[index] {
            index = i;
        }
    }
    Ok(ErmOutput {
        index,
        policy: class.get(index).clone(),
        empirical_error: Some(counts[index] as f64 / n as f64),
        degenerate: false,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MleOutput {
    pub index: usize,
    /// Per-model log-likelihood; `-inf` when some observed transition is impossible.
    pub log_likelihoods: Vec<f64>,
    pub degenerate: bool,
}

fn check_batch_against(batch: BatchRef<'_>, class: &ModelClass) -> Result<()> {
    for (c, s, a, n) in batch.transitions() {
        if c >= class.num_contexts() {
            return Err(Error::InvalidContext { context: c, num_contexts: class.num_contexts() });
        }
        if s >= class.num_states() || n >= class.num_states() || a >= class.num_actions() {
            return Err(Error::Shape(format!("observed transition ({s}, {a}) -> {n} outside model shape")));
        }
    }
    Ok(())
}

/// Log-likelihood of the observed transitions under one model, summed in batch order.
pub fn log_likelihood(batch: BatchRef<'_>, model: &TransitionTensor) -> f64 {
    batch.transitions().map(|(c, s, a, n)| model.prob(c, s, a, n).ln()).sum()
}

/// Maximum-likelihood model selection. Reward observations are identical
/// across members and do not enter the likelihood.
pub fn select_model_mle(batch: BatchRef<'_>, class: &ModelClass) -> Result<MleOutput> {
    check_batch_against(batch, class)?;
    let log_likelihoods: Vec<f64> = class.models().par_iter().map(|m| log_likelihood(batch, m)).collect();
    let degenerate = batch.is_empty();
    let index = if degenerate { 0 } else { argmax_lowest(&log_likelihoods) };
    Ok(MleOutput { index, log_likelihoods, degenerate })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelBasedOutput {
    pub selection: MleOutput,
    /// Greedy policy of PLAN applied to the selected model.
    pub policy: Policy,
}

/// MLE selection followed by planning in the selected model.
pub fn model_based_learn(batch: BatchRef<'_>, class: &ModelClass) -> Result<ModelBasedOutput> {
    let selection = select_model_mle(batch, class)?;
    let (policy, _) = plan(class.model(selection.index), class.rewards(), class.horizon())?;
    Ok(ModelBasedOutput { selection, policy })
}

/// `{Q_h : h ∈ class}`, one optimal Q-table per member in class order.
pub fn build_q_class(class: &ModelClass) -> Result<QClass> {
    let tables =
        class.models().par_iter().map(|m| plan(m, class.rewards(), class.horizon()).map(|(_, q)| q)).collect::<Result<Vec<_>>>()?;
    QClass::new(tables)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FqiOutput {
    pub q: QTable,
    pub policy: Policy,
    /// Class index chosen at each level `1..=L`, in level order.
    pub selected: Vec<usize>,
    pub degenerate: bool,
}

/// Fitted Q-iteration over a finite class. At level `l` the targets
/// `r + max_a Q(s', a, θ, l - 1)` are read from the table assembled so far
/// and the level-`l` slice of the least-squares class member is copied in.
pub fn fqi(batch: &[OneStepSample], q_class: &QClass) -> Result<FqiOutput> {
    let proto = q_class.get(0);
    let (nc, horizon, ns, na) = (proto.num_contexts(), proto.horizon(), proto.num_states(), proto.num_actions());
    let mut q = QTable::zeros(nc, horizon, ns, na);
    if batch.is_empty() {
        return Ok(FqiOutput { policy: q.greedy_policy(), q, selected: Vec::new(), degenerate: true });
    }
    for x in batch {
        if x.context >= nc {
            return Err(Error::InvalidContext { context: x.context, num_contexts: nc });
        }
        if x.state >= ns || x.next_state >= ns || x.action >= na {
            return Err(Error::Shape(format!("sample ({}, {}) -> {} outside Q shape", x.state, x.action, x.next_state)));
        }
    }
    let mut selected = Vec::with_capacity(horizon);
    for level in 1..=horizon {
        let targets: Vec<f64> =
            batch.iter().map(|x| f64::from(x.reward) + q.max_value(x.context, level - 1, x.next_state)).collect();
        let losses: Vec<f64> = q_class
            .q_functions()
            .par_iter()
            .map(|f| {
                batch
                    .iter()
                    .zip(&targets)
                    .map(|(x, y)| {
                        let d = f.get(x.context, level, x.state, x.action) - y;
                        d * d
                    })
                    .sum()
            })
            .collect();
        let best = argmin_lowest(&losses);
        q.copy_level_from(q_class.get(best), level);
        selected.push(best);
    }
    Ok(FqiOutput { policy: q.greedy_policy(), q, selected, degenerate: false })
}
