//! Property checks over randomly generated instances.

use cmdp_lab::analysis::{kl_bernoulli, mixing_profile};
use cmdp_lab::random::random_cmdp;
use cmdp_lab::{
    concentratability, evaluate_policy, max_reach, optimal, policy_value, true_error, DataDistribution, Policy,
    RewardTable, TabularCmdp, TransitionTensor,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
struct Case {
    cmdp: TabularCmdp,
    policy: Policy,
    mu: DataDistribution,
}

fn case(max_contexts: usize, max_states: usize, max_actions: usize, max_horizon: usize) -> impl Strategy<Value = Case> {
    (1..=max_contexts, 1..=max_states, 1..=max_actions, 1..=max_horizon, any::<u64>()).prop_map(
        |(nc, ns, na, horizon, seed)| {
            let cmdp = random_cmdp(nc, ns, na, horizon, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let policy = Policy::from_fn(nc, horizon, ns, |_, _, _| rng.gen_range(0..na));
            let raw: Vec<f64> = (0..ns * na).map(|_| rng.gen_range(0.01..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let mu = DataDistribution::new(ns, na, raw.iter().map(|x| x / total).collect()).unwrap();
            Case { cmdp, policy, mu }
        },
    )
}

/// Every deterministic time-dependent policy shared across contexts.
fn all_policies(cmdp: &TabularCmdp) -> impl Iterator<Item = Policy> + '_ {
    let (ns, na, horizon) = (cmdp.num_states(), cmdp.num_actions(), cmdp.horizon());
    (0..(na as u64).pow((ns * horizon) as u32)).map(move |code| {
        Policy::from_fn(cmdp.num_contexts(), horizon, ns, |_, t, s| {
            ((code / (na as u64).pow((t * ns + s) as u32)) % na as u64) as usize
        })
    })
}

/// Applies a state relabeling `ps` and an action relabeling `pa`.
fn relabel(cmdp: &TabularCmdp, mu: &DataDistribution, ps: &[usize], pa: &[usize]) -> (TabularCmdp, DataDistribution) {
    let (nc, ns, na) = (cmdp.num_contexts(), cmdp.num_states(), cmdp.num_actions());
    let mut t = vec![vec![vec![vec![0.0; ns]; na]; ns]; nc];
    let mut r = vec![vec![0.0; na]; ns];
    let mut m = vec![0.0; ns * na];
    let mut init = vec![0.0; ns];
    for s in 0..ns {
        init[ps[s]] = cmdp.initial_dist()[s];
        for a in 0..na {
            r[ps[s]][pa[a]] = cmdp.rewards().mean(s, a);
            m[ps[s] * na + pa[a]] = mu.mass(s, a);
            for c in 0..nc {
                for n in 0..ns {
                    t[c][ps[s]][pa[a]][ps[n]] = cmdp.transitions().prob(c, s, a, n);
                }
            }
        }
    }
    let out = TabularCmdp::new(
        cmdp.horizon(),
        cmdp.context_prior().to_vec(),
        init,
        TransitionTensor::from_nested(t).unwrap(),
        RewardTable::from_nested(r).unwrap(),
    )
    .unwrap();
    (out, DataDistribution::new(ns, na, m).unwrap())
}

fn permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.gen_range(0..=i));
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn performance_difference_identity(c in case(3, 5, 3, 5)) {
        let (v_star, _, q) = optimal(&c.cmdp).unwrap();
        let (report, occ) = evaluate_policy(&c.cmdp, &c.policy).unwrap();
        let horizon = c.cmdp.horizon();
        let mut rhs = 0.0;
        for (ctx, &prior) in c.cmdp.context_prior().iter().enumerate() {
            for t in 0..horizon {
                for s in 0..c.cmdp.num_states() {
                    for a in 0..c.cmdp.num_actions() {
                        let level = horizon - t;
                        rhs += prior * occ.get(ctx, t, s, a) * (q.max_value(ctx, level, s) - q.get(ctx, level, s, a));
                    }
                }
            }
        }
        prop_assert!((v_star - report.v - rhs).abs() < 1e-10, "{} vs {}", v_star - report.v, rhs);
    }

    #[test]
    fn occupancy_slices_are_distributions(c in case(3, 5, 3, 5)) {
        let (_, occ) = evaluate_policy(&c.cmdp, &c.policy).unwrap();
        for ctx in 0..c.cmdp.num_contexts() {
            for t in 0..c.cmdp.horizon() {
                let slice = occ.slice(ctx, t);
                prop_assert!(slice.iter().all(|&p| p >= 0.0));
                prop_assert!((slice.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn max_reach_matches_enumeration(c in case(2, 3, 2, 3)) {
        let (nc, ns, na, horizon) = (c.cmdp.num_contexts(), c.cmdp.num_states(), c.cmdp.num_actions(), c.cmdp.horizon());
        let mut brute = vec![0.0f64; nc * horizon * ns * na];
        for p in all_policies(&c.cmdp) {
            let (_, occ) = evaluate_policy(&c.cmdp, &p).unwrap();
            for ctx in 0..nc {
                for l in 0..horizon {
                    for s in 0..ns {
                        for a in 0..na {
                            let i = ((ctx * horizon + l) * ns + s) * na + a;
                            // A deterministic policy reaching s may as well play a there.
                            brute[i] = brute[i].max(occ.state_marginal(ctx, l, s));
                        }
                    }
                }
            }
        }
        for ctx in 0..nc {
            for l in 0..horizon {
                for s in 0..ns {
                    for a in 0..na {
                        let got = max_reach(&c.cmdp, s, a, l, ctx).unwrap();
                        let want = brute[((ctx * horizon + l) * ns + s) * na + a];
                        prop_assert!((got - want).abs() < 1e-12, "({ctx},{l},{s},{a}): {got} vs {want}");
                    }
                }
            }
        }
    }

    #[test]
    fn concentratability_is_at_least_one_and_label_invariant(c in case(2, 4, 3, 4), seed in any::<u64>()) {
        let base = concentratability(&c.cmdp, &c.mu).unwrap();
        prop_assert!(base >= 1.0 - 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ps = permutation(&mut rng, c.cmdp.num_states());
        let pa = permutation(&mut rng, c.cmdp.num_actions());
        let (cmdp2, mu2) = relabel(&c.cmdp, &c.mu, &ps, &pa);
        let relabeled = concentratability(&cmdp2, &mu2).unwrap();
        prop_assert!((base - relabeled).abs() <= 1e-12 * base, "{base} vs {relabeled}");
    }

    #[test]
    fn imitation_value_gap_is_at_most_l_squared_error(c in case(3, 4, 3, 4), seed in any::<u64>()) {
        let (v_star, _, _) = optimal(&c.cmdp).unwrap();
        let expert = &c.policy;
        let alpha = v_star - policy_value(&c.cmdp, expert).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = Policy::from_fn(c.cmdp.num_contexts(), c.cmdp.horizon(), c.cmdp.num_states(), |ctx, t, s| {
            if rng.gen_bool(0.3) { rng.gen_range(0..c.cmdp.num_actions()) } else { expert.action(ctx, t, s) }
        });
        let l = c.cmdp.horizon() as f64;
        let value_error = v_star - policy_value(&c.cmdp, &h).unwrap();
        let err = true_error(&c.cmdp, expert, &h).unwrap();
        prop_assert!(value_error <= l * l * err + alpha + 1e-12, "{value_error} > {} + {alpha}", l * l * err);
    }

    #[test]
    fn dbar_is_nonincreasing_and_restarts(c in case(2, 4, 2, 4)) {
        let horizon = c.cmdp.horizon();
        let p = mixing_profile(&c.cmdp, &c.policy, 3 * horizon + 2).unwrap();
        prop_assert!(p.dbar.iter().all(|&d| (0.0..=1.0).contains(&d)));
        prop_assert!(p.dbar.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{:?}", p.dbar);
        prop_assert!(p.dbar[horizon].abs() < 1e-12);
        prop_assert!(p.tau_min <= 8.0 * horizon as f64);
    }

    #[test]
    fn kl_is_nonnegative(p in 0.0f64..=1.0, q in 0.001f64..0.999) {
        let kl = kl_bernoulli(p, q).unwrap();
        prop_assert!(kl >= 0.0);
        prop_assert!(kl_bernoulli(q, q).unwrap() == 0.0);
    }
}
