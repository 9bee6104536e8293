//! Bound evaluators, Natarajan dimension, mixing profiles, KL diagnostics,
//! certificate checks and empirical sample-complexity curves.

pub mod bounds;
pub mod certify;
pub mod complexity;
pub mod kl;
pub mod mixing;
pub mod natarajan;

pub use bounds::{eval_bound, fqi_error, fqi_samples_for_error, BoundId, BoundInputs, BoundValue, Convention, Quantity};
pub use certify::{certify_family, CertificateCheck, CertificationReport, CERTIFICATE_TOLERANCE};
pub use complexity::{
    assemble_curve, cell_seed, check_grid, estimate_sample_complexity, run_cells, wilson_halfwidth, ComplexityCurve, CurvePoint,
    Z_95,
};
pub use kl::kl_bernoulli;
pub use mixing::{mixing_profile, MixingProfile};
pub use natarajan::{
    all_policy_inputs, distinct_policy_inputs, natarajan_dimension, policy_class_dimension, restrict_policy_class, NatarajanCaps, PolicyInput,
};
