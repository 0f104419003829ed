//! Bayesian nonparametric density estimation with normalized generalized
//! gamma mixtures.

pub mod cli;
pub mod clustering;
pub mod diagnostics;
pub mod error;
pub mod model;
pub mod posterior;
pub mod priors;
pub mod process;
pub mod sampler;
pub mod special;

pub use error::{Error, Result};
pub use process::NggParams;
