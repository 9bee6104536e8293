//! Exact finite-horizon planning and evaluation.
//!
//! Q-tables are indexed by *level*, the number of remaining steps: level 0 is
//! identically zero and the greedy action at trajectory time `t` is read from
//! level `horizon - t`. Every argmax breaks ties toward the lowest action
//! index.

use serde::{Deserialize, Serialize};

use crate::cmdp::{DataDistribution, Policy, RewardTable, TabularCmdp, TransitionTensor};
use crate::error::{Error, Result};

/// Largest `|A|^(|S|·L)` that [`brute_force_optimal`] will enumerate by default.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 24;

/// Q-values indexed `[context][level 0..=horizon][state][action]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Vec<Vec<f64>>>>", into = "Vec<Vec<Vec<Vec<f64>>>>")]
pub struct QTable {
    num_contexts: usize,
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn zeros(num_contexts: usize, horizon: usize, num_states: usize, num_actions: usize) -> Self {
        Self {
            num_contexts,
            horizon,
            num_states,
            num_actions,
            values: vec![0.0; num_contexts * (horizon + 1) * num_states * num_actions],
        }
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

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    fn offset(&self, context: usize, level: usize) -> usize {
        (context * (self.horizon + 1) + level) * self.num_states * self.num_actions
    }

    /// Values at one `(context, level)`, indexed `s * num_actions + a`.
    #[inline]
    pub fn slice(&self, context: usize, level: usize) -> &[f64] {
        let o = self.offset(context, level);
        &self.values[o..o + self.num_states * self.num_actions]
    }

    #[inline]
    pub fn slice_mut(&mut self, context: usize, level: usize) -> &mut [f64] {
        let o = self.offset(context, level);
        let n = self.num_states * self.num_actions;
        &mut self.values[o..o + n]
    }

    #[inline]
    pub fn get(&self, context: usize, level: usize, state: usize, action: usize) -> f64 {
        self.values[self.offset(context, level) + state * self.num_actions + action]
    }

    pub fn set(&mut self, context: usize, level: usize, state: usize, action: usize, value: f64) {
        let o = self.offset(context, level) + state * self.num_actions + action;
        self.values[o] = value;
    }

    /// `max_a Q(s, a, θ, level)`.
    #[inline]
    pub fn max_value(&self, context: usize, level: usize, state: usize) -> f64 {
        let o = self.offset(context, level) + state * self.num_actions;
        self.values[o..o + self.num_actions].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lowest-index maximizer of `Q(s, ·, θ, level)`.
    pub fn argmax(&self, context: usize, level: usize, state: usize) -> usize {
        let o = self.offset(context, level) + state * self.num_actions;
        argmax_lowest(&self.values[o..o + self.num_actions])
    }

    /// Copies one level, across all contexts, from `other`.
    pub fn copy_level_from(&mut self, other: &QTable, level: usize) {
        for c in 0..self.num_contexts {
            self.slice_mut(c, level).copy_from_slice(other.slice(c, level));
        }
    }

    /// Greedy policy: action at time `t` maximizes level `horizon - t`.
    pub fn greedy_policy(&self) -> Policy {
        Policy::from_fn(self.num_contexts, self.horizon, self.num_states, |c, t, s| {
            self.argmax(c, self.horizon - t, s)
        })
    }

    pub fn check_shape(&self, cmdp: &TabularCmdp) -> Result<()> {
        if self.num_contexts != cmdp.num_contexts()
            || self.horizon != cmdp.horizon()
            || self.num_states != cmdp.num_states()
            || self.num_actions != cmdp.num_actions()
        {
            return Err(Error::Shape("Q-table shape does not match CMDP".into()));
        }
        Ok(())
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<Vec<f64>>>> {
        (0..self.num_contexts)
            .map(|c| {
                (0..=self.horizon)
                    .map(|l| self.slice(c, l).chunks(self.num_actions).map(<[f64]>::to_vec).collect())
                    .collect()
            })
            .collect()
    }

    pub fn from_nested(nested: Vec<Vec<Vec<Vec<f64>>>>) -> Result<Self> {
        let num_contexts = nested.len();
        let levels = nested.first().map_or(0, Vec::len);
        if levels == 0 {
            return Err(Error::Shape("Q-table needs at least level 0".into()));
        }
        let num_states = nested[0][0].len();
        let num_actions = nested[0][0].first().map_or(0, Vec::len);
        let mut q = Self::zeros(num_contexts, levels - 1, num_states, num_actions);
        for (c, per_level) in nested.into_iter().enumerate() {
            if per_level.len() != levels {
                return Err(Error::Shape(format!("Q-table context {c} has {} levels", per_level.len())));
            }
            for (l, per_state) in per_level.into_iter().enumerate() {
                if per_state.len() != num_states || per_state.iter().any(|r| r.len() != num_actions) {
                    return Err(Error::Shape(format!("Q-table slice ({c}, {l}) is ragged")));
                }
                let flat: Vec<f64> = per_state.into_iter().flatten().collect();
                q.slice_mut(c, l).copy_from_slice(&flat);
            }
        }
        Ok(q)
    }
}

impl TryFrom<Vec<Vec<Vec<Vec<f64>>>>> for QTable {
    type Error = Error;

    fn try_from(value: Vec<Vec<Vec<Vec<f64>>>>) -> Result<Self> {
        Self::from_nested(value)
    }
}

impl From<QTable> for Vec<Vec<Vec<Vec<f64>>>> {
    fn from(value: QTable) -> Self {
        value.to_nested()
    }
}

/// Index of the first maximal entry.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Index of the first minimal entry.
pub fn argmin_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// State-action occupancy `P[s_t = s, a_t = a | θ]` indexed `[context][time][state][action]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupancyTensor {
    num_contexts: usize,
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    mass: Vec<f64>,
}

impl OccupancyTensor {
    fn zeros(num_contexts: usize, horizon: usize, num_states: usize, num_actions: usize) -> Self {
        Self {
            num_contexts,
            horizon,
            num_states,
            num_actions,
            mass: vec![0.0; num_contexts * horizon * num_states * num_actions],
        }
    }

    #[inline]
    fn offset(&self, context: usize, time: usize) -> usize {
        (context * self.horizon + time) * self.num_states * self.num_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Distribution over `(s, a)` at `(context, time)`, indexed `s * num_actions + a`.
    pub fn slice(&self, context: usize, time: usize) -> &[f64] {
        let o = self.offset(context, time);
        &self.mass[o..o + self.num_states * self.num_actions]
    }

    pub fn get(&self, context: usize, time: usize, state: usize, action: usize) -> f64 {
        self.mass[self.offset(context, time) + state * self.num_actions + action]
    }

    /// `P[s_t = s | θ]`.
    pub fn state_marginal(&self, context: usize, time: usize, state: usize) -> f64 {
        let o = self.offset(context, time) + state * self.num_actions;
        self.mass[o..o + self.num_actions].iter().sum()
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<Vec<f64>>>> {
        (0..self.num_contexts)
            .map(|c| {
                (0..self.horizon)
                    .map(|t| self.slice(c, t).chunks(self.num_actions).map(<[f64]>::to_vec).collect())
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueReport {
    /// Aggregate value `v^L_π` over the context prior and initial distribution.
    pub v: f64,
    /// `V^L_π(s; θ)` indexed `[context][state]`.
    pub per_context_state: Vec<Vec<f64>>,
}

fn check_model(transitions: &TransitionTensor, rewards: &RewardTable) -> Result<()> {
    if transitions.num_states() != rewards.num_states() || transitions.num_actions() != rewards.num_actions() {
        return Err(Error::Shape(format!(
            "model is {}x{}, rewards are {}x{}",
            transitions.num_states(),
            transitions.num_actions(),
            rewards.num_states(),
            rewards.num_actions()
        )));
    }
    Ok(())
}

fn backup_into(
    transitions: &TransitionTensor,
    rewards: &RewardTable,
    q: &QTable,
    level: usize,
    context: usize,
    out: &mut [f64],
) {
    let ns = transitions.num_states();
    let na = transitions.num_actions();
    let next_values: Vec<f64> = (0..ns).map(|s| q.max_value(context, level, s)).collect();
    for s in 0..ns {
        for a in 0..na {
            let row = transitions.row(context, s, a);
            let mut expected = 0.0;
            for (p, v) in row.iter().zip(&next_values) {
                if *p != 0.0 {
                    expected += p * v;
                }
            }
            out[s * na + a] = rewards.mean(s, a) + expected;
        }
    }
}

/// `(T_l(θ) f)(s, a) = R(s, a) + E_{s' ~ T(·|s,a,θ)} max_a' f(s', a', θ, l)`,
/// returned as `[state][action]`.
pub fn bellman_backup(
    transitions: &TransitionTensor,
    rewards: &RewardTable,
    f: &QTable,
    level: usize,
    context: usize,
) -> Result<Vec<Vec<f64>>> {
    check_model(transitions, rewards)?;
    if level >= f.horizon() {
        return Err(Error::LevelOutOfRange { level, horizon: f.horizon() });
    }
    if context >= transitions.num_contexts() || context >= f.num_contexts() {
        return Err(Error::InvalidContext { context, num_contexts: transitions.num_contexts() });
    }
    if f.num_states() != transitions.num_states() || f.num_actions() != transitions.num_actions() {
        return Err(Error::Shape("Q-table does not match model".into()));
    }
    let mut out = vec![0.0; transitions.num_states() * transitions.num_actions()];
    backup_into(transitions, rewards, f, level, context, &mut out);
    Ok(out.chunks(transitions.num_actions()).map(<[f64]>::to_vec).collect())
}

/// Exact optimal Q by backward induction for every context of `transitions`,
/// and its lowest-index greedy policy.
pub fn plan(transitions: &TransitionTensor, rewards: &RewardTable, horizon: usize) -> Result<(Policy, QTable)> {
    check_model(transitions, rewards)?;
    let mut q = QTable::zeros(transitions.num_contexts(), horizon, transitions.num_states(), transitions.num_actions());
    let mut scratch = vec![0.0; transitions.num_states() * transitions.num_actions()];
    for c in 0..transitions.num_contexts() {
        for level in 1..=horizon {
            backup_into(transitions, rewards, &q, level - 1, c, &mut scratch);
            q.slice_mut(c, level).copy_from_slice(&scratch);
        }
    }
    Ok((q.greedy_policy(), q))
}

/// Optimal aggregate value of `cmdp`, with the planned policy and Q-table.
pub fn optimal(cmdp: &TabularCmdp) -> Result<(f64, Policy, QTable)> {
    let (policy, q) = plan(cmdp.transitions(), cmdp.rewards(), cmdp.horizon())?;
    let mut v = 0.0;
    for (c, &pc) in cmdp.context_prior().iter().enumerate() {
        for (s, &ps) in cmdp.initial_dist().iter().enumerate() {
            if pc != 0.0 && ps != 0.0 {
                v += pc * ps * q.max_value(c, cmdp.horizon(), s);
            }
        }
    }
    Ok((v, policy, q))
}

/// Exact value and occupancy measures of `policy` by forward and backward
/// dynamic programming.
pub fn evaluate_policy(cmdp: &TabularCmdp, policy: &Policy) -> Result<(ValueReport, OccupancyTensor)> {
    policy.check_for(cmdp)?;
    let (ns, na, horizon) = (cmdp.num_states(), cmdp.num_actions(), cmdp.horizon());
    let mut occ = OccupancyTensor::zeros(cmdp.num_contexts(), horizon, ns, na);
    let mut per_context_state = Vec::with_capacity(cmdp.num_contexts());
    for c in 0..cmdp.num_contexts() {
        let mut dist = cmdp.initial_dist().to_vec();
        for t in 0..horizon {
            let o = occ.offset(c, t);
            let mut next = vec![0.0; ns];
            for s in 0..ns {
                if dist[s] == 0.0 {
                    continue;
                }
                let a = policy.action(c, t, s);
                occ.mass[o + s * na + a] = dist[s];
                for (n, p) in next.iter_mut().zip(cmdp.transitions().row(c, s, a)) {
                    *n += dist[s] * p;
                }
            }
            dist = next;
        }

        let mut v = vec![0.0; ns];
        for t in (0..horizon).rev() {
            v = (0..ns)
                .map(|s| {
                    let a = policy.action(c, t, s);
                    let cont: f64 = cmdp.transitions().row(c, s, a).iter().zip(&v).map(|(p, x)| p * x).sum();
                    cmdp.rewards().mean(s, a) + cont
                })
                .collect();
        }
        per_context_state.push(v);
    }
    let mut total = 0.0;
    for (c, &pc) in cmdp.context_prior().iter().enumerate() {
        for (s, &ps) in cmdp.initial_dist().iter().enumerate() {
            total += pc * ps * per_context_state[c][s];
        }
    }
    Ok((ValueReport { v: total, per_context_state }, occ))
}

/// Aggregate value only.
pub fn policy_value(cmdp: &TabularCmdp, policy: &Policy) -> Result<f64> {
    evaluate_policy(cmdp, policy).map(|(r, _)| r.v)
}

/// Per-context value `Σ_s P_s0(s) V^L_π(s; θ)`.
pub fn context_values(report: &ValueReport, initial_dist: &[f64]) -> Vec<f64> {
    report
        .per_context_state
        .iter()
        .map(|vs| vs.iter().zip(initial_dist).map(|(v, p)| v * p).sum())
        .collect()
}

/// `max_π P[s_l = s, a_l = a | θ]` over all (possibly stochastic,
/// time-dependent) policies. The action at step `l` is free, so this equals
/// the maximal probability of being in `state` at step `l`.
pub fn max_reach(cmdp: &TabularCmdp, state: usize, action: usize, level: usize, context: usize) -> Result<f64> {
    cmdp.check_context(context)?;
    if level >= cmdp.horizon() {
        return Err(Error::LevelOutOfRange { level, horizon: cmdp.horizon() });
    }
    if state >= cmdp.num_states() || action >= cmdp.num_actions() {
        return Err(Error::Shape(format!("target ({state}, {action}) out of range")));
    }
    Ok(max_reach_state(cmdp, state, level, context))
}

fn max_reach_state(cmdp: &TabularCmdp, state: usize, level: usize, context: usize) -> f64 {
    let ns = cmdp.num_states();
    let mut w: Vec<f64> = (0..ns).map(|s| f64::from(u8::from(s == state))).collect();
    for _ in 0..level {
        w = (0..ns)
            .map(|s| {
                (0..cmdp.num_actions())
                    .map(|a| cmdp.transitions().row(context, s, a).iter().zip(&w).map(|(p, x)| p * x).sum::<f64>())
                    .fold(0.0, f64::max)
            })
            .collect();
    }
    cmdp.initial_dist().iter().zip(&w).map(|(p, x)| p * x).sum()
}

/// Concentratability coefficient of `mu`: the largest ratio of any admissible
/// state-action probability to `mu(s, a)`, over contexts and steps.
pub fn concentratability(cmdp: &TabularCmdp, mu: &DataDistribution) -> Result<f64> {
    mu.check_for(cmdp)?;
    let mut best = 0.0f64;
    for c in 0..cmdp.num_contexts() {
        for l in 0..cmdp.horizon() {
            for s in 0..cmdp.num_states() {
                let reach = max_reach_state(cmdp, s, l, c);
                for a in 0..cmdp.num_actions() {
                    best = best.max(reach / mu.mass(s, a));
                }
            }
        }
    }
    Ok(best)
}

/// Exhaustive search over deterministic time-dependent policies for one
/// context. Returns the optimal value `Σ_s P_s0(s) V(s; θ)` and a maximizing
/// policy; entries for other contexts are action 0.
pub fn brute_force_optimal(cmdp: &TabularCmdp, context: usize, cap: u128) -> Result<(f64, Policy)> {
    cmdp.check_context(context)?;
    let (ns, na, horizon) = (cmdp.num_states(), cmdp.num_actions(), cmdp.horizon());
    let slots = ns * horizon;
    let count = (na as u128).checked_pow(slots as u32).unwrap_or(u128::MAX);
    if count > cap {
        return Err(Error::CapExceeded { what: "policy enumeration", size: count, cap });
    }
    let mut choice = vec![0usize; slots];
    let mut best_value = f64::NEG_INFINITY;
    let mut best_choice = choice.clone();
    let mut v = vec![0.0; ns];
    let mut next = vec![0.0; ns];
    loop {
        v.iter_mut().for_each(|x| *x = 0.0);
        for t in (0..horizon).rev() {
            for s in 0..ns {
                let a = choice[t * ns + s];
                let cont: f64 = cmdp.transitions().row(context, s, a).iter().zip(&v).map(|(p, x)| p * x).sum();
                next[s] = cmdp.rewards().mean(s, a) + cont;
            }
            std::mem::swap(&mut v, &mut next);
        }
        let value: f64 = cmdp.initial_dist().iter().zip(&v).map(|(p, x)| p * x).sum();
        if value > best_value {
            best_value = value;
            best_choice.copy_from_slice(&choice);
        }
        // Odometer increment.
        let mut i = 0;
        loop {
            if i == slots {
                let policy = Policy::from_fn(cmdp.num_contexts(), horizon, ns, |c, t, s| {
                    if c == context {
                        best_choice[t * ns + s]
                    } else {
                        0
                    }
                });
                return Ok((best_value, policy));
            }
            choice[i] += 1;
            if choice[i] < na {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_cmdp;
    use approx::assert_abs_diff_eq;

    fn single_state_two_actions() -> TabularCmdp {
        let t = TransitionTensor::from_nested(vec![vec![vec![vec![1.0], vec![1.0]]]]).unwrap();
        let r = RewardTable::from_nested(vec![vec![0.2, 0.7]]).unwrap();
        TabularCmdp::new(3, vec![1.0], vec![1.0], t, r).unwrap()
    }

    #[test]
    fn single_state_chain_plans_best_arm() {
        let cmdp = single_state_two_actions();
        let (v, policy, q) = optimal(&cmdp).unwrap();
        assert_abs_diff_eq!(v, 2.1, epsilon = 1e-12);
        for t in 0..3 {
            assert_eq!(policy.action(0, t, 0), 1);
        }
        assert!(q.slice(0, 0).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn plan_matches_brute_force_on_random_instances() {
        for seed in 0..40 {
            let cmdp = random_cmdp(2, 1 + (seed as usize % 3), 1 + (seed as usize % 2) + 1, 1 + seed as usize % 3, seed);
            let (_, _, q) = optimal(&cmdp).unwrap();
            for c in 0..cmdp.num_contexts() {
                let (bf, bf_policy) = brute_force_optimal(&cmdp, c, DEFAULT_ENUMERATION_CAP).unwrap();
                let planned: f64 = (0..cmdp.num_states())
                    .map(|s| cmdp.initial_dist()[s] * q.max_value(c, cmdp.horizon(), s))
                    .sum();
                assert_abs_diff_eq!(bf, planned, epsilon = 1e-12);
                let (report, _) = evaluate_policy(&cmdp, &bf_policy).unwrap();
                let ctx = context_values(&report, cmdp.initial_dist());
                assert_abs_diff_eq!(ctx[c], bf, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn greedy_policy_reproduces_root_value() {
        for seed in 0..20 {
            let cmdp = random_cmdp(3, 4, 3, 4, 100 + seed);
            let (v, policy, q) = optimal(&cmdp).unwrap();
            let (report, _) = evaluate_policy(&cmdp, &policy).unwrap();
            assert_abs_diff_eq!(report.v, v, epsilon = 1e-12);
            for c in 0..3 {
                for s in 0..4 {
                    assert_abs_diff_eq!(report.per_context_state[c][s], q.max_value(c, 4, s), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_reward_gives_zero_value() {
        let cmdp = random_cmdp(2, 3, 2, 3, 9);
        let zero = TabularCmdp::new(3, cmdp.context_prior().to_vec(), cmdp.initial_dist().to_vec(), cmdp.transitions().clone(), RewardTable::zeros(3, 2)).unwrap();
        let policy = Policy::from_fn(2, 3, 3, |c, t, s| (c + t + s) % 2);
        assert_eq!(policy_value(&zero, &policy).unwrap(), 0.0);
        assert_eq!(brute_force_optimal(&zero, 0, DEFAULT_ENUMERATION_CAP).unwrap().0, 0.0);
    }

    #[test]
    fn aggregate_value_is_prior_weighted_sum() {
        let cmdp = random_cmdp(3, 3, 2, 3, 17).with_initial_dist(vec![0.2, 0.5, 0.3]).unwrap();
        let policy = Policy::from_fn(3, 3, 3, |c, t, s| (c * t + s) % 2);
        let (report, occ) = evaluate_policy(&cmdp, &policy).unwrap();
        let mut total = 0.0;
        for c in 0..3 {
            for s in 0..3 {
                total += cmdp.context_prior()[c] * cmdp.initial_dist()[s] * report.per_context_state[c][s];
            }
        }
        assert_abs_diff_eq!(report.v, total, epsilon = 1e-15);
        // Value also equals occupancy-weighted reward.
        let mut via_occ = 0.0;
        for c in 0..3 {
            for t in 0..3 {
                for s in 0..3 {
                    for a in 0..2 {
                        via_occ += cmdp.context_prior()[c] * occ.get(c, t, s, a) * cmdp.rewards().mean(s, a);
                    }
                }
                assert_abs_diff_eq!(occ.slice(c, t).iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(report.v, via_occ, epsilon = 1e-12);
    }

    #[test]
    fn backup_of_zero_is_reward() {
        let cmdp = random_cmdp(1, 3, 2, 2, 3);
        let q = QTable::zeros(1, 2, 3, 2);
        let b = bellman_backup(cmdp.transitions(), cmdp.rewards(), &q, 0, 0).unwrap();
        for s in 0..3 {
            for a in 0..2 {
                assert_eq!(b[s][a], cmdp.rewards().mean(s, a));
            }
        }
        assert!(matches!(
            bellman_backup(cmdp.transitions(), cmdp.rewards(), &q, 2, 0),
            Err(Error::LevelOutOfRange { .. })
        ));
    }

    #[test]
    fn backup_through_point_mass() {
        // State 0 moves deterministically to state 1, where max f = 1.
        let t = TransitionTensor::from_nested(vec![vec![vec![vec![0.0, 1.0]], vec![vec![0.0, 1.0]]]]).unwrap();
        let r = RewardTable::from_nested(vec![vec![0.25], vec![0.0]]).unwrap();
        let mut f = QTable::zeros(1, 2, 2, 1);
        f.set(0, 1, 1, 0, 1.0);
        let b = bellman_backup(&t, &r, &f, 1, 0).unwrap();
        assert_eq!(b[0][0], 1.25);
    }

    #[test]
    fn repeated_backups_reproduce_plan() {
        let cmdp = random_cmdp(2, 4, 3, 5, 5);
        let (_, q) = plan(cmdp.transitions(), cmdp.rewards(), 5).unwrap();
        let mut f = QTable::zeros(2, 5, 4, 3);
        for c in 0..2 {
            for l in 1..=5 {
                let b = bellman_backup(cmdp.transitions(), cmdp.rewards(), &f, l - 1, c).unwrap();
                for s in 0..4 {
                    for a in 0..3 {
                        f.set(c, l, s, a, b[s][a]);
                    }
                }
            }
        }
        for (x, y) in f.values.iter().zip(&q.values) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let t = TransitionTensor::zeros(1, 2, 2);
        assert!(plan(&t, &RewardTable::zeros(3, 2), 2).is_err());
    }

    #[test]
    fn max_reach_at_step_zero_is_initial_mass() {
        let cmdp = random_cmdp(1, 3, 2, 3, 1).with_initial_dist(vec![0.1, 0.6, 0.3]).unwrap();
        for s in 0..3 {
            assert_eq!(max_reach(&cmdp, s, 1, 0, 0).unwrap(), cmdp.initial_dist()[s]);
        }
    }

    #[test]
    fn max_reach_on_forced_chain() {
        let mut t = TransitionTensor::zeros(1, 3, 2);
        for a in 0..2 {
            t.row_mut(0, 0, a)[1] = 1.0;
            t.row_mut(0, 1, a)[2] = 1.0;
            t.row_mut(0, 2, a)[2] = 1.0;
        }
        let cmdp = TabularCmdp::new(3, vec![1.0], vec![1.0, 0.0, 0.0], t, RewardTable::zeros(3, 2)).unwrap();
        assert_eq!(max_reach(&cmdp, 2, 1, 2, 0).unwrap(), 1.0);
        assert_eq!(max_reach(&cmdp, 2, 0, 1, 0).unwrap(), 0.0);
    }

    #[test]
    fn single_state_concentratability_is_action_count() {
        for na in 1..5 {
            let t = TransitionTensor::from_nested(vec![vec![vec![vec![1.0]; na]]]).unwrap();
            let cmdp = TabularCmdp::new(3, vec![1.0], vec![1.0], t, RewardTable::zeros(1, na)).unwrap();
            let c = concentratability(&cmdp, &DataDistribution::uniform(1, na)).unwrap();
            assert_abs_diff_eq!(c, na as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn exact_occupancy_mu_gives_unit_coefficient() {
        let t = TransitionTensor::from_nested(vec![vec![vec![vec![1.0]]]]).unwrap();
        let cmdp = TabularCmdp::new(4, vec![1.0], vec![1.0], t, RewardTable::zeros(1, 1)).unwrap();
        let c = concentratability(&cmdp, &DataDistribution::uniform(1, 1)).unwrap();
        assert_eq!(c, 1.0);
    }

    #[test]
    fn brute_force_respects_cap() {
        let cmdp = random_cmdp(1, 4, 3, 3, 2);
        assert!(matches!(brute_force_optimal(&cmdp, 0, 100), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn qtable_nested_round_trip() {
        let cmdp = random_cmdp(2, 3, 2, 2, 8);
        let (_, q) = plan(cmdp.transitions(), cmdp.rewards(), 2).unwrap();
        assert_eq!(QTable::from_nested(q.to_nested()).unwrap(), q);
    }
}
