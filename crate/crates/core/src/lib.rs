//! Latent hub networks from grouped observations.
//!
//! Each observed group is a subset of `n` nodes formed around one hub (a
//! leader among the first `n_L` nodes), or, in the null-component variant,
//! possibly around no hub at all. This crate provides
//!
//! * the model types and likelihoods ([`model`], [`likelihood`]),
//! * parameter generation and data sampling ([`simulate`]),
//! * profile-likelihood hard EM with random restarts ([`estimate`]),
//! * identifiability condition checks and an exhaustive distribution oracle
//!   ([`identify`]),
//! * accuracy metrics and a replicate harness ([`evaluate`]).

pub mod error;
pub mod estimate;
pub mod evaluate;
pub mod identify;
pub mod likelihood;
pub mod math;
pub mod model;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
pub use estimate::{
    exhaustive_profile_max, hard_em_fit, scoring_matrix, FitConfig, FitResult, InitStrategy,
    Termination,
};
pub use evaluate::{mislabel_fraction, rmse_a, run_replicates, ReplicateSummary};
pub use likelihood::{
    complete_data_log_lik, marginal_log_lik, mle_given_labels, population_profile_lik,
    profile_log_lik, LabelEstimate,
};
pub use model::{GroupedData, HubParams, LabelAssignment, NullHubParams, Params, Variant};
pub use simulate::{generate_params, sample_data, SimDesign};
