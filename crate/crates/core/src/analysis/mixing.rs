//! Mixing profile of the concatenated-trajectory chain.
//!
//! Position `i` of the chain (0-based) is step `i mod L` of trajectory
//! `i div L`, with state `(θ, s)`. Inside a trajectory `θ` is fixed and `s`
//! follows the expert; at each trajectory boundary a fresh pair is drawn
//! from `P_Θ ⊗ P_s0`, independently of the past. Kernels therefore depend on
//! `i` only through `i mod L`, and any `t`-step law that crosses a boundary
//! is the same for every starting point.

use serde::{Deserialize, Serialize};

use crate::cmdp::{Policy, TabularCmdp};
use crate::error::{Error, Result};

/// Largest `|Θ|·|S|³·L²` the exact computation accepts.
pub const MIXING_WORK_CAP: u128 = 2_000_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingProfile {
    /// `d̄(t)` for `t = 0..N-1`.
    pub dbar: Vec<f64>,
    /// `(ε, τ(ε))` at each distinct value `ε = d̄(t) < 1`, the only candidates
    /// for the infimum defining `τ_min`.
    pub tau: Vec<(f64, usize)>,
    pub tau_min: f64,
}

/// Total variation, clamped to `[0, 1]` against rounding in the row sums.
fn tv(p: &[f64], q: &[f64]) -> f64 {
    (0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()).min(1.0)
}

/// Exact `d̄`, `τ` and `τ_min` for a chain of `chain_len` positions.
pub fn mixing_profile(cmdp: &TabularCmdp, expert: &Policy, chain_len: usize) -> Result<MixingProfile> {
    expert.check_for(cmdp)?;
    let (nc, ns, horizon) = (cmdp.num_contexts(), cmdp.num_states(), cmdp.horizon());
    if chain_len <= horizon {
        return Err(Error::InvalidParameter(format!(
            "chain length {chain_len} must exceed the horizon {horizon}"
        )));
    }
    let work = (nc as u128) * (ns as u128).pow(3) * (horizon as u128).pow(2);
    if work > MIXING_WORK_CAP {
        return Err(Error::CapExceeded { what: "mixing profile work", size: work, cap: MIXING_WORK_CAP });
    }
    let points = nc * ns;
    let mut dbar = vec![0.0; chain_len];
    dbar[0] = if points >= 2 { 1.0 } else { 0.0 };
    for (t, slot) in dbar.iter_mut().enumerate().skip(1) {
        let residues = horizon.min(chain_len - t);
        let mut worst = 0.0f64;
        for r in 0..residues {
            if r + t >= horizon {
                // Crosses a boundary: the law is the fresh draw pushed forward.
                continue;
            }
            // Different contexts have disjoint supports before the boundary.
            if nc >= 2 {
                worst = 1.0;
                break;
            }
            for c in 0..nc {
                let laws: Vec<Vec<f64>> = (0..ns)
                    .map(|s0| {
                        let mut dist = vec![0.0; ns];
                        dist[s0] = 1.0;
                        for step in r..r + t {
                            let mut next = vec![0.0; ns];
                            for (s, &mass) in dist.iter().enumerate() {
                                if mass == 0.0 {
                                    continue;
                                }
                                let row = cmdp.transitions().row(c, s, expert.action(c, step, s));
                                for (n, p) in next.iter_mut().zip(row) {
                                    *n += mass * p;
                                }
                            }
                            dist = next;
                        }
                        dist
                    })
                    .collect();
                for x in 0..ns {
                    for y in x + 1..ns {
                        worst = worst.max(tv(&laws[x], &laws[y]));
                    }
                }
            }
        }
        *slot = worst;
    }

    let mut tau: Vec<(f64, usize)> = Vec::new();
    for &eps in &dbar {
        if eps < 1.0 && !tau.iter().any(|&(e, _)| e == eps) {
            let t = dbar.iter().position(|&d| d <= eps).expect("eps is attained");
            tau.push((eps, t));
        }
    }
    tau.sort_by(|a, b| a.0.total_cmp(&b.0));
    let tau_min = tau
        .iter()
        .map(|&(eps, t)| t as f64 * ((2.0 - eps) / (1.0 - eps)).powi(2))
        .fold(f64::INFINITY, f64::min);
    Ok(MixingProfile { dbar, tau, tau_min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmdp::{RewardTable, TransitionTensor};
    use crate::constructions::make_tree_family;
    use crate::random::random_cmdp;

    #[test]
    fn restart_gives_zero_at_horizon() {
        for seed in 0..10 {
            let cmdp = random_cmdp(1 + seed as usize % 3, 4, 2, 3, seed);
            let expert = Policy::from_fn(cmdp.num_contexts(), 3, 4, |c, t, s| (c + t + s) % 2);
            let p = mixing_profile(&cmdp, &expert, 10).unwrap();
            assert_eq!(p.dbar[0], 1.0);
            assert!(p.dbar[3].abs() < 1e-12);
            assert!(p.dbar.windows(2).all(|w| w[1] <= w[0] + 1e-12));
            assert!(p.tau_min <= 8.0 * 3.0);
        }
    }

    #[test]
    fn identical_rows_mix_in_one_step() {
        let t = TransitionTensor::from_nested(vec![vec![vec![vec![0.5, 0.5]], vec![vec![0.5, 0.5]]]]).unwrap();
        let cmdp = TabularCmdp::new(4, vec![1.0], vec![1.0, 0.0], t, RewardTable::zeros(2, 1)).unwrap();
        let p = mixing_profile(&cmdp, &Policy::constant(1, 4, 2, 0), 8).unwrap();
        assert_eq!(p.dbar[1], 0.0);
        assert_eq!(p.tau_min, 4.0);
    }

    #[test]
    fn tree_family_bound() {
        let family = make_tree_family(2, 3, 0.3, None).unwrap();
        let p = mixing_profile(family.instance(0), family.expert(0), 9).unwrap();
        assert!(p.dbar[3] == 0.0);
        assert_eq!(p.tau_min, 12.0);
    }

    #[test]
    fn short_chain_rejected() {
        let cmdp = random_cmdp(1, 2, 2, 3, 0);
        assert!(mixing_profile(&cmdp, &Policy::constant(1, 3, 2, 0), 3).is_err());
    }
}
