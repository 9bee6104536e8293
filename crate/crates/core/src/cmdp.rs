//! Tabular contextual MDPs, policies and batch records.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the sum of every probability vector.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// Transition probabilities indexed `[context][state][action][next_state]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Vec<Vec<f64>>>>", into = "Vec<Vec<Vec<Vec<f64>>>>")]
pub struct TransitionTensor {
    num_contexts: usize,
    num_states: usize,
    num_actions: usize,
    probs: Vec<f64>,
}

impl TransitionTensor {
    pub fn zeros(num_contexts: usize, num_states: usize, num_actions: usize) -> Self {
        Self {
            num_contexts,
            num_states,
            num_actions,
            probs: vec![0.0; num_contexts * num_states * num_actions * num_states],
        }
    }

    pub fn from_nested(nested: Vec<Vec<Vec<Vec<f64>>>>) -> Result<Self> {
        let num_contexts = nested.len();
        let num_states = nested.first().map_or(0, Vec::len);
        let num_actions = nested
            .first()
            .and_then(|c| c.first())
            .map_or(0, Vec::len);
        let mut out = Self::zeros(num_contexts, num_states, num_actions);
        for (c, per_state) in nested.iter().enumerate() {
            if per_state.len() != num_states {
                return Err(Error::Shape(format!(
                    "transitions[{c}] has {} states, expected {num_states}",
                    per_state.len()
                )));
            }
            for (s, per_action) in per_state.iter().enumerate() {
                if per_action.len() != num_actions {
                    return Err(Error::Shape(format!(
                        "transitions[{c}][{s}] has {} actions, expected {num_actions}",
                        per_action.len()
                    )));
                }
                for (a, row) in per_action.iter().enumerate() {
                    if row.len() != num_states {
                        return Err(Error::Shape(format!(
                            "transitions[{c}][{s}][{a}] has length {}, expected {num_states}",
                            row.len()
                        )));
                    }
                    out.row_mut(c, s, a).copy_from_slice(row);
                }
            }
        }
        Ok(out)
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<Vec<f64>>>> {
        (0..self.num_contexts)
            .map(|c| {
                (0..self.num_states)
                    .map(|s| {
                        (0..self.num_actions)
                            .map(|a| self.row(c, s, a).to_vec())
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn num_contexts(&self) -> usize {
        self.num_contexts
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    fn offset(&self, context: usize, state: usize, action: usize) -> usize {
        ((context * self.num_states + state) * self.num_actions + action) * self.num_states
    }

    /// Next-state distribution `T(·|s,a,θ)`.
    #[inline]
    pub fn row(&self, context: usize, state: usize, action: usize) -> &[f64] {
        let o = self.offset(context, state, action);
        &self.probs[o..o + self.num_states]
    }

    #[inline]
    pub fn row_mut(&mut self, context: usize, state: usize, action: usize) -> &mut [f64] {
        let o = self.offset(context, state, action);
        let n = self.num_states;
        &mut self.probs[o..o + n]
    }

    #[inline]
    pub fn prob(&self, context: usize, state: usize, action: usize, next: usize) -> f64 {
        self.probs[self.offset(context, state, action) + next]
    }

    /// Restriction to a single context, as a one-context tensor.
    pub fn context_slice(&self, context: usize) -> TransitionTensor {
        let len = self.num_states * self.num_actions * self.num_states;
        let o = context * len;
        TransitionTensor {
            num_contexts: 1,
            num_states: self.num_states,
            num_actions: self.num_actions,
            probs: self.probs[o..o + len].to_vec(),
        }
    }
}

impl TryFrom<Vec<Vec<Vec<Vec<f64>>>>> for TransitionTensor {
    type Error = Error;

    fn try_from(value: Vec<Vec<Vec<Vec<f64>>>>) -> Result<Self> {
        Self::from_nested(value)
    }
}

impl From<TransitionTensor> for Vec<Vec<Vec<Vec<f64>>>> {
    fn from(value: TransitionTensor) -> Self {
        value.to_nested()
    }
}

/// Bernoulli reward means indexed `[state][action]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct RewardTable {
    num_states: usize,
    num_actions: usize,
    means: Vec<f64>,
}

impl RewardTable {
    pub fn zeros(num_states: usize, num_actions: usize) -> Self {
        Self { num_states, num_actions, means: vec![0.0; num_states * num_actions] }
    }

    pub fn from_nested(nested: Vec<Vec<f64>>) -> Result<Self> {
        let num_states = nested.len();
        let num_actions = nested.first().map_or(0, Vec::len);
        let mut means = Vec::with_capacity(num_states * num_actions);
        for (s, row) in nested.into_iter().enumerate() {
            if row.len() != num_actions {
                return Err(Error::Shape(format!(
                    "reward_means[{s}] has {} actions, expected {num_actions}",
                    row.len()
                )));
            }
            means.extend(row);
        }
        Ok(Self { num_states, num_actions, means })
    }

    pub fn to_nested(&self) -> Vec<Vec<f64>> {
        self.means.chunks(self.num_actions.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    pub fn mean(&self, state: usize, action: usize) -> f64 {
        self.means[state * self.num_actions + action]
    }

    pub fn set(&mut self, state: usize, action: usize, mean: f64) {
        self.means[state * self.num_actions + action] = mean;
    }
}

impl TryFrom<Vec<Vec<f64>>> for RewardTable {
    type Error = Error;

    fn try_from(value: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_nested(value)
    }
}

impl From<RewardTable> for Vec<Vec<f64>> {
    fn from(value: RewardTable) -> Self {
        value.to_nested()
    }
}

/// A finite contextual MDP with Bernoulli rewards.
///
/// Rewards depend on `(state, action)` only; contexts index the transition
/// kernel. Shapes are checked on construction, stochasticity by
/// [`TabularCmdp::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct TabularCmdp {
    horizon: usize,
    context_prior: Vec<f64>,
    initial_dist: Vec<f64>,
    transitions: TransitionTensor,
    rewards: RewardTable,
    gamma: Option<f64>,
}

impl TabularCmdp {
    pub fn new(
        horizon: usize,
        context_prior: Vec<f64>,
        initial_dist: Vec<f64>,
        transitions: TransitionTensor,
        rewards: RewardTable,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Shape("horizon must be at least 1".into()));
        }
        if transitions.num_contexts() == 0 || transitions.num_states() == 0 || transitions.num_actions() == 0 {
            return Err(Error::Shape("contexts, states and actions must be nonempty".into()));
        }
        if context_prior.len() != transitions.num_contexts() {
            return Err(Error::Shape(format!(
                "context_prior has length {}, transitions have {} contexts",
                context_prior.len(),
                transitions.num_contexts()
            )));
        }
        if initial_dist.len() != transitions.num_states() {
            return Err(Error::Shape(format!(
                "initial_dist has length {}, transitions have {} states",
                initial_dist.len(),
                transitions.num_states()
            )));
        }
        if rewards.num_states() != transitions.num_states()
            || rewards.num_actions() != transitions.num_actions()
        {
            return Err(Error::Shape(format!(
                "reward_means is {}x{}, transitions are {}x{}",
                rewards.num_states(),
                rewards.num_actions(),
                transitions.num_states(),
                transitions.num_actions()
            )));
        }
        Ok(Self { horizon, context_prior, initial_dist, transitions, rewards, gamma: None })
    }

    pub fn num_states(&self) -> usize {
        self.transitions.num_states()
    }

    pub fn num_actions(&self) -> usize {
        self.transitions.num_actions()
    }

    pub fn num_contexts(&self) -> usize {
        self.transitions.num_contexts()
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

    pub fn transitions(&self) -> &TransitionTensor {
        &self.transitions
    }

    pub fn rewards(&self) -> &RewardTable {
        &self.rewards
    }

    /// Discount factor carried through the instance file. Unused: the
    /// objective is the undiscounted sum of the first `horizon` rewards.
    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    pub fn set_gamma(&mut self, gamma: Option<f64>) {
        self.gamma = gamma;
    }

    /// Same CMDP with the transition kernel replaced (e.g. by a model-class
    /// member).
    pub fn with_transitions(&self, transitions: TransitionTensor) -> Result<Self> {
        let mut out = Self::new(
            self.horizon,
            self.context_prior.clone(),
            self.initial_dist.clone(),
            transitions,
            self.rewards.clone(),
        )?;
        out.gamma = self.gamma;
        Ok(out)
    }

    pub fn with_initial_dist(&self, initial_dist: Vec<f64>) -> Result<Self> {
        let mut out = Self::new(
            self.horizon,
            self.context_prior.clone(),
            initial_dist,
            self.transitions.clone(),
            self.rewards.clone(),
        )?;
        out.gamma = self.gamma;
        Ok(out)
    }

    pub fn with_context_prior(&self, context_prior: Vec<f64>) -> Result<Self> {
        let mut out = Self::new(
            self.horizon,
            context_prior,
            self.initial_dist.clone(),
            self.transitions.clone(),
            self.rewards.clone(),
        )?;
        out.gamma = self.gamma;
        Ok(out)
    }

    pub fn check_context(&self, context: usize) -> Result<()> {
        if context < self.num_contexts() {
            Ok(())
        } else {
            Err(Error::InvalidContext { context, num_contexts: self.num_contexts() })
        }
    }

    pub fn validate(&self, options: ValidationOptions) -> ValidationReport {
        validate_cmdp(self, options)
    }

    /// Same as [`TabularCmdp::validate`] but as a `Result`.
    pub fn ensure_valid(&self, options: ValidationOptions) -> Result<()> {
        let report = self.validate(options);
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::Validation(report))
        }
    }
}

/// Deterministic, time-dependent, context-aware policy: `[context][time][state] → action`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Vec<usize>>>", into = "Vec<Vec<Vec<usize>>>")]
pub struct Policy {
    num_contexts: usize,
    horizon: usize,
    num_states: usize,
    actions: Vec<usize>,
}

impl Policy {
    pub fn constant(num_contexts: usize, horizon: usize, num_states: usize, action: usize) -> Self {
        Self {
            num_contexts,
            horizon,
            num_states,
            actions: vec![action; num_contexts * horizon * num_states],
        }
    }

    pub fn from_fn(
        num_contexts: usize,
        horizon: usize,
        num_states: usize,
        mut f: impl FnMut(usize, usize, usize) -> usize,
    ) -> Self {
        let mut actions = Vec::with_capacity(num_contexts * horizon * num_states);
        for c in 0..num_contexts {
            for t in 0..horizon {
                for s in 0..num_states {
                    actions.push(f(c, t, s));
                }
            }
        }
        Self { num_contexts, horizon, num_states, actions }
    }

    pub fn from_nested(nested: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let num_contexts = nested.len();
        let horizon = nested.first().map_or(0, Vec::len);
        let num_states = nested.first().and_then(|c| c.first()).map_or(0, Vec::len);
        let mut actions = Vec::with_capacity(num_contexts * horizon * num_states);
        for (c, per_time) in nested.into_iter().enumerate() {
            if per_time.len() != horizon {
                return Err(Error::Shape(format!("policy[{c}] has {} time steps", per_time.len())));
            }
            for (t, row) in per_time.into_iter().enumerate() {
                if row.len() != num_states {
                    return Err(Error::Shape(format!("policy[{c}][{t}] has {} states", row.len())));
                }
                actions.extend(row);
            }
        }
        Ok(Self { num_contexts, horizon, num_states, actions })
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<usize>>> {
        (0..self.num_contexts)
            .map(|c| {
                (0..self.horizon)
                    .map(|t| {
                        let o = self.offset(c, t, 0);
                        self.actions[o..o + self.num_states].to_vec()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn num_contexts(&self) -> usize {
        self.num_contexts
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    #[inline]
    fn offset(&self, context: usize, time: usize, state: usize) -> usize {
        (context * self.horizon + time) * self.num_states + state
    }

    #[inline]
    pub fn action(&self, context: usize, time: usize, state: usize) -> usize {
        self.actions[self.offset(context, time, state)]
    }

    pub fn set(&mut self, context: usize, time: usize, state: usize, action: usize) {
        let o = self.offset(context, time, state);
        self.actions[o] = action;
    }

    /// Checks that the policy's shape matches `cmdp` and every action is in range.
    pub fn check_for(&self, cmdp: &TabularCmdp) -> Result<()> {
        if self.num_contexts != cmdp.num_contexts()
            || self.horizon != cmdp.horizon()
            || self.num_states != cmdp.num_states()
        {
            return Err(Error::Shape(format!(
                "policy shape ({}, {}, {}) does not match CMDP ({}, {}, {})",
                self.num_contexts,
                self.horizon,
                self.num_states,
                cmdp.num_contexts(),
                cmdp.horizon(),
                cmdp.num_states()
            )));
        }
        if let Some(&a) = self.actions.iter().find(|&&a| a >= cmdp.num_actions()) {
            return Err(Error::Shape(format!(
                "policy action {a} out of range (num_actions = {})",
                cmdp.num_actions()
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<Vec<usize>>>> for Policy {
    type Error = Error;

    fn try_from(value: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        Self::from_nested(value)
    }
}

impl From<Policy> for Vec<Vec<Vec<usize>>> {
    fn from(value: Policy) -> Self {
        value.to_nested()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub time: usize,
    pub state: usize,
    pub action: usize,
    pub reward: u8,
}

/// One expert trajectory of exactly `horizon` steps, labelled with its context.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub context: usize,
    pub steps: Vec<Step>,
}

/// One `(θ, s, a, r, s')` record of the one-step data process.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneStepSample {
    pub context: usize,
    pub state: usize,
    pub action: usize,
    pub reward: u8,
    pub next_state: usize,
}

/// Strictly positive data distribution over state-action pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DataDistribution {
    num_states: usize,
    num_actions: usize,
    mass: Vec<f64>,
}

impl DataDistribution {
    /// `mass` is indexed `s * num_actions + a`.
    pub fn new(num_states: usize, num_actions: usize, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != num_states * num_actions || mass.is_empty() {
            return Err(Error::Shape(format!(
                "data distribution has {} entries, expected {}",
                mass.len(),
                num_states * num_actions
            )));
        }
        if let Some(i) = mass.iter().position(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "mu(s={}, a={}) = {} is not strictly positive",
                i / num_actions,
                i % num_actions,
                mass[i]
            )));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidDistribution(format!("mu sums to {total}")));
        }
        Ok(Self { num_states, num_actions, mass })
    }

    pub fn uniform(num_states: usize, num_actions: usize) -> Self {
        let n = num_states * num_actions;
        Self { num_states, num_actions, mass: vec![1.0 / n as f64; n] }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    pub fn mass(&self, state: usize, action: usize) -> f64 {
        self.mass[state * self.num_actions + action]
    }

    /// Flat view indexed `s * num_actions + a`.
    pub fn as_slice(&self) -> &[f64] {
        &self.mass
    }

    pub fn check_for(&self, cmdp: &TabularCmdp) -> Result<()> {
        if self.num_states != cmdp.num_states() || self.num_actions != cmdp.num_actions() {
            return Err(Error::Shape(format!(
                "data distribution is {}x{}, CMDP is {}x{}",
                self.num_states,
                self.num_actions,
                cmdp.num_states(),
                cmdp.num_actions()
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<f64>>> for DataDistribution {
    type Error = Error;

    fn try_from(value: Vec<Vec<f64>>) -> Result<Self> {
        let num_states = value.len();
        let num_actions = value.first().map_or(0, Vec::len);
        if value.iter().any(|r| r.len() != num_actions) {
            return Err(Error::Shape("ragged data distribution".into()));
        }
        Self::new(num_states, num_actions, value.into_iter().flatten().collect())
    }
}

impl From<DataDistribution> for Vec<Vec<f64>> {
    fn from(value: DataDistribution) -> Self {
        value.mass.chunks(value.num_actions).map(<[f64]>::to_vec).collect()
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// How the "every state reachable within the horizon" condition is checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reachability {
    /// Reachable at some step `≤ horizon-1` under some policy, for some context.
    AnyContext,
    /// Reachable in every context separately.
    EveryContext,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ValidationOptions {
    pub reachability: Option<Reachability>,
}

impl ValidationOptions {
    pub fn with_reachability(mode: Reachability) -> Self {
        Self { reachability: Some(mode) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    NotStochastic,
    NegativeMass,
    NonFinite,
    RewardOutOfRange,
    Unreachable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub context: Option<usize>,
    pub state: Option<usize>,
    pub action: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind)?;
        let mut loc = Vec::new();
        if let Some(c) = self.context {
            loc.push(format!("theta={c}"));
        }
        if let Some(s) = self.state {
            loc.push(format!("s={s}"));
        }
        if let Some(a) = self.action {
            loc.push(format!("a={a}"));
        }
        if !loc.is_empty() {
            write!(f, " at ({})", loc.join(", "))?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

fn check_vector(
    report: &mut ValidationReport,
    probs: &[f64],
    what: &str,
    context: Option<usize>,
    state: Option<usize>,
    action: Option<usize>,
) {
    let mut push = |kind, detail: String| {
        report.violations.push(Violation { kind, context, state, action, detail })
    };
    if probs.iter().any(|p| !p.is_finite()) {
        push(ViolationKind::NonFinite, format!("{what} has a non-finite entry"));
        return;
    }
    if let Some(p) = probs.iter().find(|&&p| p < 0.0) {
        push(ViolationKind::NegativeMass, format!("{what} has negative entry {p}"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > STOCHASTIC_TOL {
        push(ViolationKind::NotStochastic, format!("{what} sums to {total}"));
    }
}

/// States reachable at some time `0..horizon` in `context`, by forward closure
/// over all actions.
pub fn reachable_states(cmdp: &TabularCmdp, context: usize) -> Vec<bool> {
    let n = cmdp.num_states();
    let mut frontier: Vec<bool> = cmdp.initial_dist().iter().map(|&p| p > 0.0).collect();
    let mut seen = frontier.clone();
    for _ in 1..cmdp.horizon() {
        let mut next = vec![false; n];
        for s in (0..n).filter(|&s| frontier[s]) {
            for a in 0..cmdp.num_actions() {
                for (s2, &p) in cmdp.transitions().row(context, s, a).iter().enumerate() {
                    if p > 0.0 {
                        next[s2] = true;
                    }
                }
            }
        }
        for s in 0..n {
            seen[s] |= next[s];
        }
        frontier = next;
    }
    seen
}

/// Lists every violated invariant of `cmdp`. Report-only: never fails.
pub fn validate_cmdp(cmdp: &TabularCmdp, options: ValidationOptions) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_vector(&mut report, cmdp.context_prior(), "context_prior", None, None, None);
    check_vector(&mut report, cmdp.initial_dist(), "initial_dist", None, None, None);
    for c in 0..cmdp.num_contexts() {
        for s in 0..cmdp.num_states() {
            for a in 0..cmdp.num_actions() {
                check_vector(
                    &mut report,
                    cmdp.transitions().row(c, s, a),
                    "transition row",
                    Some(c),
                    Some(s),
                    Some(a),
                );
            }
        }
    }
    for s in 0..cmdp.num_states() {
        for a in 0..cmdp.num_actions() {
            let r = cmdp.rewards().mean(s, a);
            if !(0.0..=1.0).contains(&r) {
                report.violations.push(Violation {
                    kind: ViolationKind::RewardOutOfRange,
                    context: None,
                    state: Some(s),
                    action: Some(a),
                    detail: format!("reward mean {r} outside [0, 1]"),
                });
            }
        }
    }
    match options.reachability {
        None => {}
        Some(Reachability::AnyContext) => {
            let mut any = vec![false; cmdp.num_states()];
            for c in 0..cmdp.num_contexts() {
                for (acc, r) in any.iter_mut().zip(reachable_states(cmdp, c)) {
                    *acc |= r;
                }
            }
            for (s, _) in any.iter().enumerate().filter(|(_, r)| !**r) {
                report.violations.push(Violation {
                    kind: ViolationKind::Unreachable,
                    context: None,
                    state: Some(s),
                    action: None,
                    detail: format!("not reachable within {} steps in any context", cmdp.horizon()),
                });
            }
        }
        Some(Reachability::EveryContext) => {
            for c in 0..cmdp.num_contexts() {
                for (s, _) in reachable_states(cmdp, c).iter().enumerate().filter(|(_, r)| !**r) {
                    report.violations.push(Violation {
                        kind: ViolationKind::Unreachable,
                        context: Some(c),
                        state: Some(s),
                        action: None,
                        detail: format!("not reachable within {} steps", cmdp.horizon()),
                    });
                }
            }
        }
    }
    report
}
