//! Mixture kernels, base measures and the censored-data likelihood.

mod base;
mod data;
mod kernel;

pub use base::{
    scale_prior_logdensity, scale_prior_sample, BaseMeasureSpec, Hyperprior, LocationFamily,
    ScalePrior,
};
pub use data::{finite_bounds, CensoringKind, Observation};
pub use kernel::{
    kernel_cdf, kernel_density, ln_norm_cdf, mixture_cdf, mixture_density, observation_loglik,
    AtomParams, KernelFamily, KernelSpec, Support,
};
