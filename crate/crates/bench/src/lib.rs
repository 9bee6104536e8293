//! Shared fixtures for the criterion benches.

use cmdp_lab::random::random_cmdp;
use cmdp_lab::{Family, FamilySpec, TabularCmdp};

/// Random instances as `(label, cmdp)`, growing in states and horizon.
pub fn random_instances() -> Vec<(String, TabularCmdp)> {
    [(2, 5, 3, 5), (4, 20, 4, 10), (8, 50, 5, 20)]
        .into_iter()
        .map(|(nc, ns, na, horizon)| (format!("c{nc}_s{ns}_a{na}_l{horizon}"), random_cmdp(nc, ns, na, horizon, 7)))
        .collect()
}

pub fn tree(branching: usize, depth: usize) -> Family {
    Family::build(&FamilySpec::Tree { branching, depth, epsilon: 0.3, derangement: None }).expect("valid tree spec")
}

pub fn dpl_lower() -> Family {
    Family::build(&FamilySpec::DplLower { num_actions: 3, horizon: 6, num_contexts: 12, labeling: None })
        .expect("valid labeling spec")
}
