//! Generators for the hard instance families, each with closed-form values.
//!
//! A [`Family`] bundles every candidate ground truth of a construction with
//! its expert, its hypothesis classes and a [`Certificate`] of exact values
//! derived without the planner, so the planner can independently confirm
//! them (see [`crate::analysis::certify`]).

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::cmdp::{Policy, RewardTable, TabularCmdp, TransitionTensor};
use crate::error::{Error, Result};
use crate::learners::{ModelClass, PolicyClass};
use crate::planner::plan;
use crate::seed::rng_from_seed;

/// Largest dense transition tensor (`|Θ|·|S|²·|A|` entries) a generator builds.
pub const MAX_TENSOR_ENTRIES: u128 = 50_000_000;

fn check_tensor_size(contexts: u128, states: u128, actions: u128) -> Result<()> {
    let size = contexts.saturating_mul(states).saturating_mul(states).saturating_mul(actions);
    if size > MAX_TENSOR_ENTRIES {
        return Err(Error::CapExceeded { what: "transition tensor entries", size, cap: MAX_TENSOR_ENTRIES });
    }
    Ok(())
}

/// Parameters of one construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// Complete tree with two shared terminals; the model class is
    /// `{identity, derangement}` over special edges.
    Tree {
        branching: usize,
        depth: usize,
        epsilon: f64,
        /// Defaults to the cyclic shift `θ ↦ θ + 1 mod |Θ|`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        derangement: Option<Vec<usize>>,
    },
    /// One informative first action per context, then absorbing good or bad states.
    DplLower {
        num_actions: usize,
        horizon: usize,
        num_contexts: usize,
        /// Defaults to `θ ↦ θ mod |A|`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labeling: Option<Vec<usize>>,
    },
    /// Single-context bandit whose arms differ only in the first round.
    FirstRoundBandit { arms: usize, horizon: usize, epsilon: f64 },
    /// `K` contexts by `K` arms, optimal arm given by a cyclic permutation.
    PermutationBandit {
        arms: usize,
        epsilon: f64,
        #[serde(default = "default_pulls")]
        pulls: usize,
    },
}

fn default_pulls() -> usize {
    1
}

impl FamilySpec {
    pub fn kind(&self) -> &'static str {
        match self {
            FamilySpec::Tree { .. } => "tree",
            FamilySpec::DplLower { .. } => "dpl_lower",
            FamilySpec::FirstRoundBandit { .. } => "first_round_bandit",
            FamilySpec::PermutationBandit { .. } => "permutation_bandit",
        }
    }
}

/// Closed-form values of one ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthValues {
    pub optimal: f64,
    pub expert: f64,
    /// Value of each policy-class member, in class order.
    pub hypotheses: Vec<f64>,
    /// Value of PLAN under each model-class member, in class order.
    pub planned_models: Vec<f64>,
}

impl TruthValues {
    pub fn expert_gap(&self) -> f64 {
        self.optimal - self.expert
    }

    pub fn hypothesis_gaps(&self) -> Vec<f64> {
        self.hypotheses.iter().map(|v| self.optimal - v).collect()
    }
}

/// Exact values claimed by a generator, one entry per ground truth.
///
/// Values are in units of `1 / value_scale` of the planner's aggregate value;
/// the scale is the number of pulls for the permutation family and 1 otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub family: String,
    pub value_scale: f64,
    pub per_truth: Vec<TruthValues>,
    /// Constant multiplying the family's sample-size lower bound (1 unless explicit).
    pub lower_bound_constant: f64,
    /// Sample-size threshold below which no learner is reliably accurate, when the family has one.
    pub lower_bound_samples: Option<f64>,
}

/// Every ground truth of a construction with its data-generating expert and classes.
#[derive(Clone, Debug)]
pub struct Family {
    spec: FamilySpec,
    instances: Vec<TabularCmdp>,
    experts: Vec<Policy>,
    policy_class: PolicyClass,
    model_class: Option<ModelClass>,
    certificate: Certificate,
    warnings: Vec<String>,
}

impl Family {
    pub fn build(spec: &FamilySpec) -> Result<Self> {
        match spec {
            FamilySpec::Tree { branching, depth, epsilon, derangement } => {
                make_tree_family(*branching, *depth, *epsilon, derangement.clone())
            }
            FamilySpec::DplLower { num_actions, horizon, num_contexts, labeling } => {
                let labeling = labeling.clone().unwrap_or_else(|| default_labeling(*num_contexts, *num_actions));
                make_dpl_lower_class_family(*num_actions, *horizon, &labeling, *num_contexts)
            }
            FamilySpec::FirstRoundBandit { arms, horizon, epsilon } => {
                make_first_round_bandit_family(*arms, *horizon, *epsilon)
            }
            FamilySpec::PermutationBandit { arms, epsilon, pulls } => {
                make_permutation_bandit_family(*arms, *epsilon, *pulls)
            }
        }
    }

    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    pub fn kind(&self) -> &'static str {
        self.spec.kind()
    }

    pub fn num_truths(&self) -> usize {
        self.instances.len()
    }

    pub fn instance(&self, truth: usize) -> &TabularCmdp {
        &self.instances[truth]
    }

    pub fn expert(&self, truth: usize) -> &Policy {
        &self.experts[truth]
    }

    pub fn policy_class(&self) -> &PolicyClass {
        &self.policy_class
    }

    pub fn model_class(&self) -> Option<&ModelClass> {
        self.model_class.as_ref()
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    /// Validity conditions of the construction that are violated but tolerated.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

fn check_epsilon(epsilon: f64, below: f64, what: &str) -> Result<()> {
    if !(0.0..below).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("{what} needs 0 <= epsilon < {below}, got {epsilon}")));
    }
    Ok(())
}

fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

fn point_mass(n: usize, at: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[at] = 1.0;
    v
}

/// Shape of the tree construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeShape {
    pub branching: usize,
    pub depth: usize,
}

impl TreeShape {
    pub fn new(branching: usize, depth: usize) -> Result<Self> {
        if branching < 2 || depth < 2 {
            return Err(Error::InvalidParameter(format!(
                "tree needs branching >= 2 and depth >= 2, got {branching} and {depth}"
            )));
        }
        let edges = (branching as u128).checked_pow(depth as u32 - 1).filter(|&e| e < u32::MAX as u128);
        let Some(edges) = edges else {
            return Err(Error::CapExceeded { what: "tree edges", size: u128::MAX, cap: u32::MAX as u128 });
        };
        let shape = Self { branching, depth };
        check_tensor_size(edges - 1, shape.num_states_u128(), branching as u128)?;
        Ok(shape)
    }

    /// Edges out of the penultimate level, `|A|^(L-1)`.
    pub fn num_edges(&self) -> usize {
        self.branching.pow(self.depth as u32 - 1)
    }

    /// `|Θ| = |A|^(L-1) - 1`.
    pub fn num_contexts(&self) -> usize {
        self.num_edges() - 1
    }

    pub fn rightmost_edge(&self) -> usize {
        self.num_edges() - 1
    }

    /// Internal nodes at depths `0..=L-2`.
    pub fn num_internal(&self) -> usize {
        (self.num_edges() - 1) / (self.branching - 1)
    }

    fn num_states_u128(&self) -> u128 {
        self.num_internal() as u128 + 2
    }

    pub fn num_states(&self) -> usize {
        self.num_internal() + 2
    }

    pub fn good_state(&self) -> usize {
        self.num_internal()
    }

    pub fn bad_state(&self) -> usize {
        self.num_internal() + 1
    }

    /// Breadth-first id of the `k`-th node at depth `d`.
    pub fn node_id(&self, depth: usize, k: usize) -> usize {
        (self.branching.pow(depth as u32) - 1) / (self.branching - 1) + k
    }
}

/// Probability that `edge` reaches the good terminal when the special edge is `special`.
pub fn tree_edge_probability(shape: TreeShape, epsilon: f64, special: usize, edge: usize) -> f64 {
    if edge == special {
        0.5 + 4.0 * epsilon / 3.0
    } else if edge == shape.rightmost_edge() {
        (1.0 + epsilon) / 2.0
    } else {
        0.5
    }
}

fn tree_transitions(shape: TreeShape, epsilon: f64, special_map: &[usize]) -> TransitionTensor {
    let a_count = shape.branching;
    let mut t = TransitionTensor::zeros(shape.num_contexts(), shape.num_states(), a_count);
    for (c, &special) in special_map.iter().enumerate() {
        for d in 0..shape.depth - 1 {
            for k in 0..a_count.pow(d as u32) {
                let node = shape.node_id(d, k);
                for a in 0..a_count {
                    let row = t.row_mut(c, node, a);
                    if d + 2 < shape.depth {
                        row[shape.node_id(d + 1, k * a_count + a)] = 1.0;
                    } else {
                        let p = tree_edge_probability(shape, epsilon, special, k * a_count + a);
                        row[shape.good_state()] = p;
                        row[shape.bad_state()] = 1.0 - p;
                    }
                }
            }
        }
        for terminal in [shape.good_state(), shape.bad_state()] {
            for a in 0..a_count {
                t.row_mut(c, terminal, a)[terminal] = 1.0;
            }
        }
    }
    t
}

fn tree_rewards(shape: TreeShape) -> RewardTable {
    let mut r = RewardTable::zeros(shape.num_states(), shape.branching);
    for a in 0..shape.branching {
        r.set(shape.good_state(), a, 1.0);
    }
    r
}

fn check_special_map(shape: TreeShape, special_map: &[usize]) -> Result<()> {
    if special_map.len() != shape.num_contexts() {
        return Err(Error::InvalidParameter(format!(
            "special map has {} entries, tree has {} contexts",
            special_map.len(),
            shape.num_contexts()
        )));
    }
    if let Some(c) = special_map.iter().position(|&e| e >= shape.rightmost_edge()) {
        return Err(Error::InvalidParameter(format!(
            "special edge {} of context {c} is the rightmost edge or beyond",
            special_map[c]
        )));
    }
    Ok(())
}

fn tree_optimal(epsilon: f64) -> f64 {
    0.5 + 4.0 * epsilon / 3.0
}

fn tree_expert(epsilon: f64) -> f64 {
    (1.0 + epsilon) / 2.0
}

/// Tree instance with special edge `special_map[θ]` for context `θ`, uniform
/// context prior, the always-rightmost expert and the optimal and expert
/// values as certificate.
pub fn make_tree_cmdp(
    branching: usize,
    depth: usize,
    epsilon: f64,
    special_map: &[usize],
) -> Result<(TabularCmdp, Policy, Certificate)> {
    check_epsilon(epsilon, 3.0 / 8.0, "tree family")?;
    let shape = TreeShape::new(branching, depth)?;
    check_special_map(shape, special_map)?;
    let cmdp = TabularCmdp::new(
        depth,
        uniform(shape.num_contexts()),
        point_mass(shape.num_states(), 0),
        tree_transitions(shape, epsilon, special_map),
        tree_rewards(shape),
    )?;
    let expert = Policy::constant(shape.num_contexts(), depth, shape.num_states(), branching - 1);
    let certificate = Certificate {
        family: "tree".into(),
        value_scale: 1.0,
        per_truth: vec![TruthValues {
            optimal: tree_optimal(epsilon),
            expert: tree_expert(epsilon),
            hypotheses: Vec::new(),
            planned_models: Vec::new(),
        }],
        lower_bound_constant: 1.0,
        lower_bound_samples: None,
    };
    Ok((cmdp, expert, certificate))
}

/// Rejects anything but a fixed-point-free permutation of `0..n`.
pub fn check_derangement(sigma: &[usize], n: usize) -> Result<()> {
    if sigma.len() != n {
        return Err(Error::InvalidParameter(format!("derangement has {} entries, expected {n}", sigma.len())));
    }
    let mut seen = vec![false; n];
    for (i, &x) in sigma.iter().enumerate() {
        if x >= n || seen[x] {
            return Err(Error::InvalidParameter(format!("derangement is not a permutation at entry {i}")));
        }
        seen[x] = true;
        if x == i {
            return Err(Error::NotADerangement(i));
        }
    }
    Ok(())
}

/// `{identity, σ}` as special-edge maps on the tree.
pub fn make_derangement_class(branching: usize, depth: usize, epsilon: f64, sigma: &[usize]) -> Result<ModelClass> {
    let shape = TreeShape::new(branching, depth)?;
    check_derangement(sigma, shape.num_contexts())?;
    let identity: Vec<usize> = (0..shape.num_contexts()).collect();
    let (base, _, _) = make_tree_cmdp(branching, depth, epsilon, &identity)?;
    let other = tree_transitions(shape, epsilon, sigma);
    ModelClass::new(vec![base.transitions().clone(), other], &base)
}

/// Uniformly random derangement of `0..n` by rejection, seeded.
pub fn random_derangement(n: usize, seed: u64) -> Result<Vec<usize>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("no derangement of {n} points")));
    }
    let mut rng = rng_from_seed(seed);
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        p.shuffle(&mut rng);
        if p.iter().enumerate().all(|(i, &x)| i != x) {
            return Ok(p);
        }
    }
}

/// The `K` powers of the `K`-cycle: member `j` maps `θ ↦ θ + j mod K`.
pub fn cyclic_permutations(k: usize) -> Vec<Vec<usize>> {
    (0..k).map(|j| (0..k).map(|x| (x + j) % k).collect()).collect()
}

/// Tree family over the ground truths `{identity, σ}` with policy class
/// `[PLAN(identity), PLAN(σ), expert]`. With a single context no derangement
/// exists and the family has the identity truth only.
pub fn make_tree_family(branching: usize, depth: usize, epsilon: f64, sigma: Option<Vec<usize>>) -> Result<Family> {
    let shape = TreeShape::new(branching, depth)?;
    let n = shape.num_contexts();
    let identity: Vec<usize> = (0..n).collect();
    let (base, expert, _) = make_tree_cmdp(branching, depth, epsilon, &identity)?;
    let mut maps = vec![identity];
    match sigma {
        Some(s) => {
            check_derangement(&s, n)?;
            maps.push(s);
        }
        None if n >= 2 => maps.push((0..n).map(|x| (x + 1) % n).collect()),
        None => {}
    }
    let models: Vec<TransitionTensor> = maps.iter().map(|m| tree_transitions(shape, epsilon, m)).collect();
    let model_class = ModelClass::new(models, &base)?;
    let mut hypotheses = Vec::with_capacity(maps.len() + 1);
    for m in model_class.models() {
        hypotheses.push(plan(m, model_class.rewards(), depth)?.0);
    }
    hypotheses.push(expert.clone());
    let policy_class = PolicyClass::new(hypotheses)?;

    let planned_in = |j: usize, k: usize| -> f64 {
        let hits = (0..n).filter(|&c| maps[j][c] == maps[k][c]).count() as f64;
        let frac = hits / n as f64;
        frac * tree_optimal(epsilon) + (1.0 - frac) * 0.5
    };
    let per_truth = (0..maps.len())
        .map(|k| {
            let planned: Vec<f64> = (0..maps.len()).map(|j| planned_in(j, k)).collect();
            let mut hyp = planned.clone();
            hyp.push(tree_expert(epsilon));
            TruthValues { optimal: tree_optimal(epsilon), expert: tree_expert(epsilon), hypotheses: hyp, planned_models: planned }
        })
        .collect();
    let instances = (0..maps.len()).map(|k| model_class.instance(k)).collect::<Result<Vec<_>>>()?;
    Ok(Family {
        spec: FamilySpec::Tree { branching, depth, epsilon, derangement: maps.get(1).cloned() },
        experts: vec![expert; instances.len()],
        instances,
        policy_class,
        model_class: Some(model_class),
        certificate: Certificate {
            family: "tree".into(),
            value_scale: 1.0,
            per_truth,
            lower_bound_constant: 1.0,
            lower_bound_samples: None,
        },
        warnings: Vec::new(),
    })
}

/// `θ ↦ θ mod |A|`.
pub fn default_labeling(num_contexts: usize, num_actions: usize) -> Vec<usize> {
    (0..num_contexts).map(|c| c % num_actions.max(1)).collect()
}

const DPL_START: usize = 0;
const DPL_GOOD: usize = 1;
const DPL_BAD: usize = 2;

fn check_labeling(labeling: &[usize], num_actions: usize, num_contexts: usize) -> Result<()> {
    if labeling.len() != num_contexts {
        return Err(Error::InvalidParameter(format!(
            "labeling has {} entries, expected {num_contexts}",
            labeling.len()
        )));
    }
    if let Some(c) = labeling.iter().position(|&a| a >= num_actions) {
        return Err(Error::InvalidParameter(format!("label {} of context {c} is not an action", labeling[c])));
    }
    Ok(())
}

fn dpl_lower_transitions(num_actions: usize, labeling: &[usize]) -> TransitionTensor {
    let mut t = TransitionTensor::zeros(labeling.len(), 3, num_actions);
    for (c, &good) in labeling.iter().enumerate() {
        for a in 0..num_actions {
            t.row_mut(c, DPL_START, a)[if a == good { DPL_GOOD } else { DPL_BAD }] = 1.0;
            t.row_mut(c, DPL_GOOD, a)[DPL_GOOD] = 1.0;
            t.row_mut(c, DPL_BAD, a)[DPL_BAD] = 1.0;
        }
    }
    t
}

fn dpl_lower_rewards(num_actions: usize) -> RewardTable {
    let mut r = RewardTable::zeros(3, num_actions);
    for a in 0..num_actions {
        r.set(DPL_GOOD, a, 1.0);
    }
    r
}

/// Policy taking `labeling[θ]` in the start state and action 0 elsewhere.
pub fn labeling_policy(labeling: &[usize], horizon: usize) -> Policy {
    Policy::from_fn(labeling.len(), horizon, 3, |c, _, s| if s == DPL_START { labeling[c] } else { 0 })
}

/// Instance where the first action reaches the rewarding absorbing state iff it
/// equals `labeling[θ]`; the expert follows the labeling.
pub fn make_dpl_lower_family(
    num_actions: usize,
    horizon: usize,
    labeling: &[usize],
    num_contexts: usize,
) -> Result<(TabularCmdp, Policy, Certificate)> {
    if num_actions < 2 || horizon < 2 || num_contexts == 0 {
        return Err(Error::InvalidParameter(format!(
            "dpl_lower needs |A| >= 2, L >= 2, |Θ| >= 1; got {num_actions}, {horizon}, {num_contexts}"
        )));
    }
    check_tensor_size(num_contexts as u128, 3, num_actions as u128)?;
    check_labeling(labeling, num_actions, num_contexts)?;
    let cmdp = TabularCmdp::new(
        horizon,
        uniform(num_contexts),
        point_mass(3, DPL_START),
        dpl_lower_transitions(num_actions, labeling),
        dpl_lower_rewards(num_actions),
    )?;
    let best = (horizon - 1) as f64;
    let certificate = Certificate {
        family: "dpl_lower".into(),
        value_scale: 1.0,
        per_truth: vec![TruthValues { optimal: best, expert: best, hypotheses: Vec::new(), planned_models: Vec::new() }],
        lower_bound_constant: 1.0,
        lower_bound_samples: None,
    };
    Ok((cmdp, labeling_policy(labeling, horizon), certificate))
}

/// The three labelings of the class: wrong everywhere, wrong on context 0 only, and `f`.
pub fn dpl_lower_labelings(labeling: &[usize], num_actions: usize) -> [Vec<usize>; 3] {
    let shift = |a: usize| (a + 1) % num_actions;
    let wrong: Vec<usize> = labeling.iter().map(|&a| shift(a)).collect();
    let mut wrong_first = labeling.to_vec();
    if let Some(first) = wrong_first.first_mut() {
        *first = shift(*first);
    }
    [wrong, wrong_first, labeling.to_vec()]
}

/// DPL-lower family whose ground truths are the three class labelings; the
/// expert of truth `k` follows labeling `k`, so the class is realizable for
/// every truth. The canonical truth is index 2.
pub fn make_dpl_lower_class_family(
    num_actions: usize,
    horizon: usize,
    labeling: &[usize],
    num_contexts: usize,
) -> Result<Family> {
    let (base, _, _) = make_dpl_lower_family(num_actions, horizon, labeling, num_contexts)?;
    let labelings = dpl_lower_labelings(labeling, num_actions);
    let experts: Vec<Policy> = labelings.iter().map(|l| labeling_policy(l, horizon)).collect();
    let models: Vec<TransitionTensor> = labelings.iter().map(|l| dpl_lower_transitions(num_actions, l)).collect();
    let model_class = ModelClass::new(models, &base)?;
    let best = (horizon - 1) as f64;
    let agreement = |x: &[usize], y: &[usize]| x.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / num_contexts as f64;
    let per_truth = labelings
        .iter()
        .map(|truth| {
            let values: Vec<f64> = labelings.iter().map(|l| best * agreement(l, truth)).collect();
            TruthValues { optimal: best, expert: best, hypotheses: values.clone(), planned_models: values }
        })
        .collect();
    Ok(Family {
        spec: FamilySpec::DplLower { num_actions, horizon, num_contexts, labeling: Some(labeling.to_vec()) },
        instances: (0..3).map(|k| model_class.instance(k)).collect::<Result<_>>()?,
        policy_class: PolicyClass::new(experts.clone())?,
        experts,
        model_class: Some(model_class),
        certificate: Certificate {
            family: "dpl_lower".into(),
            value_scale: 1.0,
            per_truth,
            lower_bound_constant: 1.0,
            lower_bound_samples: None,
        },
        warnings: Vec::new(),
    })
}

/// Bandit over `K` arms played for `L` rounds; arm `f*` pays
/// Bernoulli(1/2 + 3ε/2) in round 0 and every other arm-round pays
/// Bernoulli(1/2). Ground truth `k` has `f* = k`; hypothesis `h_k` pulls arm
/// `k` in round 0 and arm 0 afterwards.
pub fn make_first_round_bandit_family(arms: usize, horizon: usize, epsilon: f64) -> Result<Family> {
    if arms == 0 || horizon == 0 {
        return Err(Error::InvalidParameter("first_round_bandit needs K >= 1 and L >= 1".into()));
    }
    check_epsilon(epsilon, 1.0 / 3.0, "first_round_bandit")?;
    check_tensor_size(1, 2, arms as u128)?;
    let mut t = TransitionTensor::zeros(1, 2, arms);
    for a in 0..arms {
        t.row_mut(0, 0, a)[1] = 1.0;
        t.row_mut(0, 1, a)[1] = 1.0;
    }
    let high = 0.5 + 1.5 * epsilon;
    let instances = (0..arms)
        .map(|best| {
            let mut r = RewardTable::zeros(2, arms);
            for a in 0..arms {
                r.set(0, a, if a == best { high } else { 0.5 });
                r.set(1, a, 0.5);
            }
            TabularCmdp::new(horizon, vec![1.0], vec![1.0, 0.0], t.clone(), r)
        })
        .collect::<Result<Vec<_>>>()?;
    let hypotheses: Vec<Policy> =
        (0..arms).map(|k| Policy::from_fn(1, horizon, 2, |_, time, _| if time == 0 { k } else { 0 })).collect();
    let later = 0.5 * (horizon - 1) as f64;
    let per_truth = (0..arms)
        .map(|best| TruthValues {
            optimal: high + later,
            expert: high + later,
            hypotheses: (0..arms).map(|k| if k == best { high } else { 0.5 } + later).collect(),
            planned_models: Vec::new(),
        })
        .collect();
    Ok(Family {
        spec: FamilySpec::FirstRoundBandit { arms, horizon, epsilon },
        instances,
        experts: hypotheses.clone(),
        policy_class: PolicyClass::new(hypotheses)?,
        model_class: None,
        certificate: Certificate {
            family: "first_round_bandit".into(),
            value_scale: 1.0,
            per_truth,
            lower_bound_constant: 1.0,
            lower_bound_samples: (epsilon > 0.0).then(|| arms as f64 / (epsilon * epsilon)),
        },
        warnings: Vec::new(),
    })
}

const PERM_START: usize = 0;
const PERM_WIN: usize = 1;
const PERM_LOSE: usize = 2;

/// Constant of the permutation family's sample-size threshold `K / (162 ε² L)`.
pub const PERMUTATION_LOWER_BOUND_CONSTANT: f64 = 162.0;

/// `K` uniform contexts by `K` arms. Under truth `σ_k` (the `k`-th cyclic
/// permutation) arm `σ_k(θ)` wins with probability 1/2 + 3ε/2 and every other
/// arm with probability 1/2. Every state is a pull state: the outcome of each
/// pull is recorded as the next state (win pays 1), so a horizon of
/// `pulls + 1` scores exactly `pulls` pulls. Values in the certificate are per pull.
pub fn make_permutation_bandit_family(arms: usize, epsilon: f64, pulls: usize) -> Result<Family> {
    if arms < 2 || pulls == 0 {
        return Err(Error::InvalidParameter(format!(
            "permutation_bandit needs K >= 2 and at least one pull; got K={arms}, pulls={pulls}"
        )));
    }
    check_epsilon(epsilon, 1.0 / 3.0, "permutation_bandit")?;
    check_tensor_size(arms as u128, 3, arms as u128)?;
    let mut warnings = Vec::new();
    let validity = 9.0 * epsilon * epsilon * (arms * arms) as f64;
    if validity > 0.5 {
        warnings.push(format!("9 eps^2 K^2 = {validity} exceeds 1/2; the lower-bound argument does not apply"));
    }
    let horizon = pulls + 1;
    let high = 0.5 + 1.5 * epsilon;
    let perms = cyclic_permutations(arms);
    let mut rewards = RewardTable::zeros(3, arms);
    for a in 0..arms {
        rewards.set(PERM_WIN, a, 1.0);
    }
    let models: Vec<TransitionTensor> = perms
        .iter()
        .map(|sigma| {
            let mut t = TransitionTensor::zeros(arms, 3, arms);
            for c in 0..arms {
                for s in [PERM_START, PERM_WIN, PERM_LOSE] {
                    for a in 0..arms {
                        let q = if a == sigma[c] { high } else { 0.5 };
                        let row = t.row_mut(c, s, a);
                        row[PERM_WIN] = q;
                        row[PERM_LOSE] = 1.0 - q;
                    }
                }
            }
            t
        })
        .collect();
    let model_class =
        ModelClass::from_parts(models, rewards, horizon, uniform(arms), point_mass(3, PERM_START))?;
    let policies: Vec<Policy> = perms.iter().map(|rho| Policy::from_fn(arms, horizon, 3, |c, _, _| rho[c])).collect();
    let per_truth = (0..arms)
        .map(|k| {
            let values: Vec<f64> = (0..arms).map(|j| if j == k { high } else { 0.5 }).collect();
            TruthValues { optimal: high, expert: high, hypotheses: values.clone(), planned_models: values }
        })
        .collect();
    Ok(Family {
        spec: FamilySpec::PermutationBandit { arms, epsilon, pulls },
        instances: (0..arms).map(|k| model_class.instance(k)).collect::<Result<_>>()?,
        experts: policies.clone(),
        policy_class: PolicyClass::new(policies)?,
        model_class: Some(model_class),
        certificate: Certificate {
            family: "permutation_bandit".into(),
            value_scale: pulls as f64,
            per_truth,
            lower_bound_constant: PERMUTATION_LOWER_BOUND_CONSTANT,
            lower_bound_samples: (epsilon > 0.0)
                .then(|| arms as f64 / (PERMUTATION_LOWER_BOUND_CONSTANT * epsilon * epsilon * pulls as f64)),
        },
        warnings,
    })
}
