//! The two batch-data processes: expert trajectories and one-step samples.
//!
//! Trajectory `i` of a batch generated with seed `seed` uses the stream
//! `derive_seed(seed, i)`; the context is drawn first from that stream and the
//! rollout continues on it. Batches are therefore prefix-stable: the first `a`
//! trajectories of a batch of size `a + b` equal a batch of size `a`.

use std::ops::Range;

use rand::Rng;

use crate::cmdp::{DataDistribution, OneStepSample, Policy, Step, TabularCmdp, Trajectory};
use crate::error::Result;
use crate::seed::{derive_seed, rng_from_seed};

/// Inverse-CDF draw from `probs` with uniform `u ∈ [0, 1)`.
///
/// Falls back to the last index with positive mass when rounding leaves the
/// cumulative sum short of `u`, so the draw never leaves the support.
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

#[inline]
fn bernoulli<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u8 {
    u8::from(rng.gen::<f64>() < mean)
}

/// Rolls out `policy` in `context` on a caller-supplied stream.
pub fn rollout_with_rng<R: Rng + ?Sized>(
    cmdp: &TabularCmdp,
    policy: &Policy,
    context: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    cmdp.check_context(context)?;
    let mut state = sample_index(cmdp.initial_dist(), rng.gen());
    let mut steps = Vec::with_capacity(cmdp.horizon());
    for time in 0..cmdp.horizon() {
        let action = policy.action(context, time, state);
        let reward = bernoulli(rng, cmdp.rewards().mean(state, action));
        steps.push(Step { time, state, action, reward });
        if time + 1 < cmdp.horizon() {
            state = sample_index(cmdp.transitions().row(context, state, action), rng.gen());
        }
    }
    Ok(Trajectory { context, steps })
}

pub fn rollout(cmdp: &TabularCmdp, policy: &Policy, context: usize, seed: u64) -> Result<Trajectory> {
    policy.check_for(cmdp)?;
    rollout_with_rng(cmdp, policy, context, &mut rng_from_seed(seed))
}

/// Trajectories with indices in `range` of the batch generated from `seed`.
pub fn generate_expert_batch_range(
    cmdp: &TabularCmdp,
    expert: &Policy,
    seed: u64,
    range: Range<usize>,
) -> Result<Vec<Trajectory>> {
    expert.check_for(cmdp)?;
    range
        .map(|i| {
            let mut rng = rng_from_seed(derive_seed(seed, i as u64));
            let context = sample_index(cmdp.context_prior(), rng.gen());
            rollout_with_rng(cmdp, expert, context, &mut rng)
        })
        .collect()
}

/// `m` expert trajectories, contexts drawn i.i.d. from the prior.
pub fn generate_expert_batch(
    cmdp: &TabularCmdp,
    expert: &Policy,
    m: usize,
    seed: u64,
) -> Result<Vec<Trajectory>> {
    generate_expert_batch_range(cmdp, expert, seed, 0..m)
}

/// One-step samples for context draws with indices in `range`.
pub fn generate_model_batch_range(
    cmdp: &TabularCmdp,
    mu: &DataDistribution,
    seed: u64,
    range: Range<usize>,
) -> Result<Vec<OneStepSample>> {
    mu.check_for(cmdp)?;
    let num_actions = cmdp.num_actions();
    let mut out = Vec::with_capacity(range.len() * cmdp.horizon());
    for i in range {
        let mut rng = rng_from_seed(derive_seed(seed, i as u64));
        let context = sample_index(cmdp.context_prior(), rng.gen());
        for _ in 0..cmdp.horizon() {
            let pair = sample_index(mu.as_slice(), rng.gen());
            let (state, action) = (pair / num_actions, pair % num_actions);
            let next_state = sample_index(cmdp.transitions().row(context, state, action), rng.gen());
            let reward = bernoulli(&mut rng, cmdp.rewards().mean(state, action));
            out.push(OneStepSample { context, state, action, reward, next_state });
        }
    }
    Ok(out)
}

/// `m` context draws, each contributing `horizon` i.i.d. `(s, a) ~ mu` samples.
pub fn generate_model_batch(
    cmdp: &TabularCmdp,
    mu: &DataDistribution,
    m: usize,
    seed: u64,
) -> Result<Vec<OneStepSample>> {
    generate_model_batch_range(cmdp, mu, seed, 0..m)
}

/// Builds a data distribution from raw mass, rejecting zero entries.
pub fn data_distribution_for(cmdp: &TabularCmdp, mass: Option<Vec<f64>>) -> Result<DataDistribution> {
    match mass {
        None => Ok(DataDistribution::uniform(cmdp.num_states(), cmdp.num_actions())),
        Some(m) => DataDistribution::new(cmdp.num_states(), cmdp.num_actions(), m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmdp::{RewardTable, TransitionTensor};
    use crate::error::Error;
    use crate::random::random_cmdp;

    fn single_state(reward: f64, horizon: usize) -> TabularCmdp {
        let t = TransitionTensor::from_nested(vec![vec![vec![vec![1.0]]]]).unwrap();
        let r = RewardTable::from_nested(vec![vec![reward]]).unwrap();
        TabularCmdp::new(horizon, vec![1.0], vec![1.0], t, r).unwrap()
    }

    #[test]
    fn certain_reward_gives_all_ones() {
        let cmdp = single_state(1.0, 5);
        let policy = Policy::constant(1, 5, 1, 0);
        let traj = rollout(&cmdp, &policy, 0, 3).unwrap();
        assert_eq!(traj.steps.len(), 5);
        assert!(traj.steps.iter().all(|s| s.reward == 1));
        assert_eq!(traj.steps.iter().map(|s| s.time).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn rollout_is_deterministic_given_seed() {
        let cmdp = random_cmdp(2, 4, 3, 6, 11);
        let policy = Policy::from_fn(2, 6, 4, |c, t, s| (c + t + s) % 3);
        let a = rollout(&cmdp, &policy, 1, 99).unwrap();
        let b = rollout(&cmdp, &policy, 1, 99).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn invalid_context_is_rejected() {
        let cmdp = single_state(0.5, 2);
        let policy = Policy::constant(1, 2, 1, 0);
        assert!(matches!(rollout(&cmdp, &policy, 1, 0), Err(Error::InvalidContext { .. })));
    }

    #[test]
    fn rollouts_respect_support() {
        for seed in 0..20 {
            let cmdp = random_cmdp(2, 5, 2, 8, seed);
            let policy = Policy::from_fn(2, 8, 5, |_, t, s| (t * s) % 2);
            for k in 0..20 {
                let traj = rollout(&cmdp, &policy, (k % 2) as usize, seed * 100 + k).unwrap();
                for w in traj.steps.windows(2) {
                    let p = cmdp.transitions().prob(traj.context, w[0].state, w[0].action, w[1].state);
                    assert!(p > 0.0);
                }
            }
        }
    }

    #[test]
    fn expert_batch_shape_and_labels() {
        let cmdp = random_cmdp(3, 2, 2, 3, 5);
        let policy = Policy::constant(3, 3, 2, 1);
        let batch = generate_expert_batch(&cmdp, &policy, 3, 42).unwrap();
        assert_eq!(batch.len(), 3);
        assert!(batch.iter().all(|t| t.context < 3 && t.steps.len() == 3));
        assert!(generate_expert_batch(&cmdp, &policy, 0, 42).unwrap().is_empty());
    }

    #[test]
    fn point_mass_prior_fixes_context() {
        let cmdp = random_cmdp(3, 2, 2, 3, 5).with_context_prior(vec![0.0, 1.0, 0.0]).unwrap();
        let policy = Policy::constant(3, 3, 2, 0);
        let batch = generate_expert_batch(&cmdp, &policy, 50, 1).unwrap();
        assert!(batch.iter().all(|t| t.context == 1));
    }

    #[test]
    fn context_frequencies_match_prior() {
        let cmdp = random_cmdp(3, 2, 2, 2, 5).with_context_prior(vec![0.2, 0.3, 0.5]).unwrap();
        let policy = Policy::constant(3, 2, 2, 0);
        let batch = generate_expert_batch(&cmdp, &policy, 10_000, 8).unwrap();
        let mut counts = [0usize; 3];
        for t in &batch {
            counts[t.context] += 1;
        }
        for (c, &p) in [0.2, 0.3, 0.5].iter().enumerate() {
            let freq = counts[c] as f64 / 10_000.0;
            assert!((freq - p).abs() <= 0.02, "context {c}: {freq} vs {p}");
        }
    }

    #[test]
    fn batch_concatenation_matches_subranges() {
        let cmdp = random_cmdp(2, 3, 2, 4, 21);
        let policy = Policy::from_fn(2, 4, 3, |c, _, s| (c + s) % 2);
        let full = generate_expert_batch(&cmdp, &policy, 7, 1234).unwrap();
        let mut parts = generate_expert_batch_range(&cmdp, &policy, 1234, 0..3).unwrap();
        parts.extend(generate_expert_batch_range(&cmdp, &policy, 1234, 3..7).unwrap());
        assert_eq!(full, parts);
    }

    #[test]
    fn deterministic_model_batch_follows_table() {
        // 0 -a0-> 1, 0 -a1-> 0, 1 -> 1.
        let t = TransitionTensor::from_nested(vec![vec![
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![vec![0.0, 1.0], vec![0.0, 1.0]],
        ]])
        .unwrap();
        let cmdp = TabularCmdp::new(2, vec![1.0], vec![1.0, 0.0], t, RewardTable::zeros(2, 2)).unwrap();
        let batch = generate_model_batch(&cmdp, &DataDistribution::uniform(2, 2), 1, 5).unwrap();
        assert_eq!(batch.len(), 2);
        for s in &batch {
            assert_eq!(cmdp.transitions().prob(0, s.state, s.action, s.next_state), 1.0);
        }
    }

    #[test]
    fn pair_frequencies_match_mu() {
        let cmdp = random_cmdp(1, 2, 2, 2, 3);
        let mu = DataDistribution::uniform(2, 2);
        let batch = generate_model_batch(&cmdp, &mu, 10_000, 77).unwrap();
        assert_eq!(batch.len(), 20_000);
        let mut counts = [0usize; 4];
        for s in &batch {
            counts[s.state * 2 + s.action] += 1;
        }
        for c in counts {
            assert!((c as f64 / 20_000.0 - 0.25).abs() <= 0.02);
        }
    }

    #[test]
    fn zero_mass_mu_is_rejected() {
        let cmdp = random_cmdp(1, 2, 2, 2, 3);
        assert!(data_distribution_for(&cmdp, Some(vec![0.5, 0.5, 0.0, 0.0])).is_err());
    }
}
