//! Natarajan dimension of a finite class restricted to a finite input set.
//!
//! A set `S` is shattered when two labelings `f0, f1` of `S`, distinct at
//! every point, exist such that every mixture (take `f0` on `B`, `f1` on
//! `S \ B`) is realized by some hypothesis. Shattering is hereditary, so the
//! search stops at the first size with no shattered subset.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::PolicyClass;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NatarajanCaps {
    pub max_inputs: usize,
    pub max_hypotheses: usize,
}

impl Default for NatarajanCaps {
    fn default() -> Self {
        Self { max_inputs: 24, max_hypotheses: 1 << 12 }
    }
}

/// A hypothesis-by-input label table: `labels[h][x]`.
pub fn natarajan_dimension(labels: &[Vec<usize>], caps: NatarajanCaps) -> Result<usize> {
    let n = labels.first().map_or(0, Vec::len);
    if labels.iter().any(|row| row.len() != n) {
        return Err(Error::Shape("label table is ragged".into()));
    }
    if n > caps.max_inputs {
        return Err(Error::CapExceeded { what: "Natarajan inputs", size: n as u128, cap: caps.max_inputs as u128 });
    }
    if labels.len() > caps.max_hypotheses {
        return Err(Error::CapExceeded {
            what: "Natarajan hypotheses",
            size: labels.len() as u128,
            cap: caps.max_hypotheses as u128,
        });
    }
    let distinct: HashSet<&Vec<usize>> = labels.iter().collect();
    // A shattered set of size d needs 2^d distinct restrictions.
    let max_d = (usize::BITS - 1 - distinct.len().max(1).leading_zeros()) as usize;
    let mut best = 0;
    for d in 1..=max_d.min(n) {
        if !any_subset_shattered(labels, n, d) {
            break;
        }
        best = d;
    }
    Ok(best)
}

fn any_subset_shattered(labels: &[Vec<usize>], n: usize, d: usize) -> bool {
    let mut subset: Vec<usize> = (0..d).collect();
    loop {
        if shattered(labels, &subset) {
            return true;
        }
        // Next d-combination of 0..n in lexicographic order.
        let mut i = d;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if subset[i] < n - d + i {
                break;
            }
        }
        subset[i] += 1;
        for j in i + 1..d {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

fn shattered(labels: &[Vec<usize>], subset: &[usize]) -> bool {
    let patterns: HashSet<Vec<usize>> = labels.iter().map(|h| subset.iter().map(|&x| h[x]).collect()).collect();
    let d = subset.len();
    if patterns.len() < 1 << d {
        return false;
    }
    let list: Vec<&Vec<usize>> = patterns.iter().collect();
    let mut mix = vec![0usize; d];
    for (i, f0) in list.iter().enumerate() {
        for f1 in &list[i + 1..] {
            if f0.iter().zip(f1.iter()).any(|(a, b)| a == b) {
                continue;
            }
            let all = (0u64..1 << d).all(|mask| {
                for (k, m) in mix.iter_mut().enumerate() {
                    *m = if mask >> k & 1 == 1 { f0[k] } else { f1[k] };
                }
                patterns.contains(&mix)
            });
            if all {
                return true;
            }
        }
    }
    false
}

/// Input point of a policy: `(context, time, state)`.
pub type PolicyInput = (usize, usize, usize);

/// Every `(θ, t, s)` point of the class's shape.
pub fn all_policy_inputs(class: &PolicyClass) -> Vec<PolicyInput> {
    let p = class.get(0);
    let mut out = Vec::with_capacity(p.num_contexts() * p.horizon() * p.num_states());
    for c in 0..p.num_contexts() {
        for t in 0..p.horizon() {
            for s in 0..p.num_states() {
                out.push((c, t, s));
            }
        }
    }
    out
}

/// One representative input per distinct label column, skipping columns on
/// which every hypothesis agrees. A shattered set never contains a constant
/// column or two equal columns, so the dimension on this reduced set equals
/// the dimension on all inputs.
pub fn distinct_policy_inputs(class: &PolicyClass) -> Vec<PolicyInput> {
    let mut seen = HashSet::new();
    all_policy_inputs(class)
        .into_iter()
        .filter(|&(c, t, s)| {
            let column: Vec<usize> = class.hypotheses().iter().map(|h| h.action(c, t, s)).collect();
            column.iter().any(|&a| a != column[0]) && seen.insert(column)
        })
        .collect()
}

/// Label table of `class` restricted to `inputs`.
pub fn restrict_policy_class(class: &PolicyClass, inputs: &[PolicyInput]) -> Result<Vec<Vec<usize>>> {
    let p = class.get(0);
    if let Some(&(c, t, s)) = inputs.iter().find(|&&(c, t, s)| c >= p.num_contexts() || t >= p.horizon() || s >= p.num_states()) {
        return Err(Error::Shape(format!("input ({c}, {t}, {s}) outside policy shape")));
    }
    Ok(class.hypotheses().iter().map(|h| inputs.iter().map(|&(c, t, s)| h.action(c, t, s)).collect()).collect())
}

/// Natarajan dimension of a policy class on `inputs`.
pub fn policy_class_dimension(class: &PolicyClass, inputs: &[PolicyInput], caps: NatarajanCaps) -> Result<usize> {
    natarajan_dimension(&restrict_policy_class(class, inputs)?, caps)
}
