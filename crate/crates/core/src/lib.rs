//! Tabular contextual-MDP laboratory.
//!
//! Exact finite-horizon planning and policy evaluation, direct policy
//! learning by ERM, model-based learning by MLE selection and fitted
//! Q-iteration, generators for the hard instance families that separate
//! the two paradigms, and the analysis tools used to study them: bound
//! evaluators, Natarajan dimension, mixing profiles, certificate checks and
//! Monte-Carlo sample-complexity curves.
//!
//! Conventions shared by every module:
//! - indices are 0-based; transitions are `[θ][s][a][s']`, rewards `[s][a]`,
//!   policies `[θ][t][s]`, Q-tables `[θ][level][s][a]`;
//! - a Q-table level counts remaining steps, so time `t` reads level `L - t`
//!   and level 0 is identically zero;
//! - every argmax and argmin breaks ties toward the lowest index;
//! - values are exact dynamic-programming quantities, never Monte-Carlo
//!   estimates;
//! - every random stream is a pure function of a 64-bit seed (see [`seed`]).

pub mod analysis;
pub mod cmdp;
pub mod constructions;
pub mod error;
pub mod experiment;
pub mod harness;
pub mod io;
pub mod learners;
pub mod planner;
pub mod random;
pub mod sampling;
pub mod seed;

pub use cmdp::{
    validate_cmdp, DataDistribution, OneStepSample, Policy, Reachability, RewardTable, Step, TabularCmdp, Trajectory,
    TransitionTensor, ValidationOptions, ValidationReport, Violation, ViolationKind,
};
pub use constructions::{Certificate, Family, FamilySpec, TruthValues};
pub use error::{Error, Result};
pub use experiment::{DataProcess, EpisodeOutcome, Experiment, GroundTruth, LearnerKind, MuSpec};
pub use learners::{
    build_q_class, dpl_erm, empirical_error, fqi, model_based_learn, select_model_mle, true_error, BatchRef, ModelClass,
    PolicyClass, QClass,
};
pub use planner::{
    bellman_backup, brute_force_optimal, concentratability, evaluate_policy, max_reach, optimal, plan, policy_value,
    OccupancyTensor, QTable, ValueReport,
};
pub use sampling::{generate_expert_batch, generate_model_batch, rollout};
pub use seed::{derive_seed, rng_from_seed};
