//! Conditional Gibbs sampler for normalized generalized gamma mixtures.

mod chain;
mod config;
mod latent_u;
mod state;
mod steps;
mod trace;

pub use chain::{
    chain_configs, run_chain, run_chain_indexed, run_chain_set, run_chain_set_sequential,
    run_chains, Progress,
};
pub use config::{default_base_measure, validate_data, ModelKind, SamplerConfig};
pub use latent_u::{
    latent_u_log_density, sample_latent_u, sample_latent_u_adaptive, u_log_acceptance,
    u_proposal_ln_density, AdaptiveU,
};
pub use state::{AcceptanceStats, AllocationState, ChainState, MeasureState};
pub use steps::{
    accelerate_unique_values, atom_log_target, common_scale_log_target, gibbs_step, initial_state,
    refresh_measure, resample_allocations, sample_common_scale, sample_fixed_jump,
    update_hyperparameters,
};
pub use trace::{ChainTrace, TraceRow};
