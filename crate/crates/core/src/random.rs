//! Seeded random instances for tests, benchmarks and sanity sweeps.

use rand::Rng;

use crate::cmdp::{RewardTable, TabularCmdp, TransitionTensor};
use crate::seed::rng_from_seed;

/// Random kernel whose rows keep each successor with probability one half,
/// falling back to a self-loop when a row comes out empty.
pub fn random_transitions<R: Rng + ?Sized>(rng: &mut R, contexts: usize, states: usize, actions: usize) -> TransitionTensor {
    let mut t = TransitionTensor::zeros(contexts, states, actions);
    for c in 0..contexts {
        for s in 0..states {
            for a in 0..actions {
                let row: Vec<f64> = (0..states).map(|_| if rng.gen_bool(0.5) { rng.gen::<f64>() } else { 0.0 }).collect();
                let total: f64 = row.iter().sum();
                let r = t.row_mut(c, s, a);
                if total == 0.0 {
                    r[s] = 1.0;
                } else {
                    for (dst, v) in r.iter_mut().zip(&row) {
                        *dst = v / total;
                    }
                }
            }
        }
    }
    t
}

/// Random CMDP with a uniform context prior, start state 0 and uniform reward means.
pub fn random_cmdp(contexts: usize, states: usize, actions: usize, horizon: usize, seed: u64) -> TabularCmdp {
    let mut rng = rng_from_seed(seed);
    let t = random_transitions(&mut rng, contexts, states, actions);
    let mut rw = RewardTable::zeros(states, actions);
    for s in 0..states {
        for a in 0..actions {
            rw.set(s, a, rng.gen());
        }
    }
    let mut init = vec![0.0; states];
    init[0] = 1.0;
    TabularCmdp::new(horizon, vec![1.0 / contexts as f64; contexts], init, t, rw)
        .expect("shapes are consistent by construction")
}
