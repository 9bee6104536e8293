//! Bernoulli relative entropy.

use crate::error::{Error, Result};

/// `KL(Ber(p) || Ber(q))` in nats, with `0 ln 0 = 0`.
///
/// Returns `+inf` when `q` is 0 or 1 and `p` puts mass where `q` does not.
pub fn kl_bernoulli(p: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("Bernoulli parameters must lie in [0, 1], got p={p}, q={q}")));
    }
    Ok(xlogy_ratio(p, q) + xlogy_ratio(1.0 - p, 1.0 - q))
}

fn xlogy_ratio(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if y == 0.0 {
        f64::INFINITY
    } else {
        x * (x / y).ln()
    }
}

/// Per-pull information `-(1/2) ln(1 - 9ε²)` between a fair arm and one
/// biased by `3ε/2`; equals `kl_bernoulli(1/2, 1/2 + 3ε/2)`.
pub fn biased_arm_information(epsilon: f64) -> f64 {
    -0.5 * (1.0 - 9.0 * epsilon * epsilon).ln()
}
