//! Planner recomputation of every value a generator claims.

use serde::{Deserialize, Serialize};

use crate::constructions::Family;
use crate::error::{Error, Result};
use crate::planner::{optimal, plan, policy_value};

/// Largest allowed gap between a claimed value and its recomputation.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub truth: usize,
    pub label: String,
    pub claimed: f64,
    pub computed: f64,
}

impl CertificateCheck {
    pub fn deviation(&self) -> f64 {
        (self.claimed - self.computed).abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub family: String,
    pub checks: Vec<CertificateCheck>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CertificationReport {
    /// `Err(CertificateFailed)` unless the report passed.
    pub fn ensure_passed(&self) -> Result<()> {
        if self.passed {
            Ok(())
        } else {
            Err(Error::CertificateFailed { deviation: self.max_deviation, tolerance: self.tolerance })
        }
    }
}

/// Recomputes optimal, expert, per-hypothesis and planned-model values for
/// every ground truth of `family`.
pub fn certify_family(family: &Family) -> Result<CertificationReport> {
    let cert = family.certificate();
    let scale = cert.value_scale;
    if cert.per_truth.len() != family.num_truths() {
        return Err(Error::Shape(format!(
            "certificate lists {} truths, family has {}",
            cert.per_truth.len(),
            family.num_truths()
        )));
    }
    let planned_policies = match family.model_class() {
        Some(mc) => mc
            .models()
            .iter()
            .map(|m| plan(m, mc.rewards(), mc.horizon()).map(|(p, _)| p))
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    let mut checks = Vec::new();
    for (k, claimed) in cert.per_truth.iter().enumerate() {
        let cmdp = family.instance(k);
        let mut push = |label: String, claimed: f64, computed: f64| {
            checks.push(CertificateCheck { truth: k, label, claimed, computed: computed / scale });
        };
        push("optimal".into(), claimed.optimal, optimal(cmdp)?.0);
        push("expert".into(), claimed.expert, policy_value(cmdp, family.expert(k))?);
        if claimed.hypotheses.len() != family.policy_class().len() {
            return Err(Error::Shape("certificate hypothesis count differs from the policy class".into()));
        }
        for (j, &v) in claimed.hypotheses.iter().enumerate() {
            push(format!("hypothesis {j}"), v, policy_value(cmdp, family.policy_class().get(j))?);
        }
        if claimed.planned_models.len() != planned_policies.len() {
            return Err(Error::Shape("certificate planned-model count differs from the model class".into()));
        }
        for (j, &v) in claimed.planned_models.iter().enumerate() {
            push(format!("plan(model {j})"), v, policy_value(cmdp, &planned_policies[j])?);
        }
    }
    let max_deviation = checks.iter().map(CertificateCheck::deviation).fold(0.0, f64::max);
    Ok(CertificationReport {
        family: cert.family.clone(),
        checks,
        max_deviation,
        tolerance: CERTIFICATE_TOLERANCE,
        passed: max_deviation <= CERTIFICATE_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::FamilySpec;

    #[test]
    fn shipped_presets_certify() {
        let specs = [
            FamilySpec::Tree { branching: 2, depth: 3, epsilon: 0.3, derangement: None },
            FamilySpec::Tree { branching: 2, depth: 2, epsilon: 0.3, derangement: None },
            FamilySpec::Tree { branching: 3, depth: 3, epsilon: 0.2, derangement: Some(vec![3, 0, 1, 2, 5, 4, 7, 6]) },
            FamilySpec::Tree { branching: 2, depth: 5, epsilon: 0.1, derangement: None },
            FamilySpec::DplLower { num_actions: 2, horizon: 5, num_contexts: 10, labeling: None },
            FamilySpec::DplLower { num_actions: 4, horizon: 3, num_contexts: 1, labeling: None },
            FamilySpec::FirstRoundBandit { arms: 5, horizon: 4, epsilon: 0.2 },
            FamilySpec::PermutationBandit { arms: 4, epsilon: 0.1, pulls: 1 },
            FamilySpec::PermutationBandit { arms: 6, epsilon: 0.05, pulls: 3 },
        ];
        for spec in &specs {
            let report = certify_family(&Family::build(spec).unwrap()).unwrap();
            assert!(report.passed, "{}: deviation {}", spec.kind(), report.max_deviation);
        }
    }

    #[test]
    fn tree_gaps() {
        let family = Family::build(&FamilySpec::Tree { branching: 2, depth: 3, epsilon: 0.3, derangement: None }).unwrap();
        let report = certify_family(&family).unwrap();
        let get = |label: &str| report.checks.iter().find(|c| c.truth == 0 && c.label == label).unwrap().computed;
        assert!((get("optimal") - get("expert") - 0.25).abs() < 1e-12);
        assert!((get("plan(model 1)") - 0.5).abs() < 1e-12);
    }
}
