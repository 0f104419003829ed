//! Generalized gamma completely random measures.
//!
//! Tail-mass evaluation and inversion, Ferguson–Klass jump simulation, exact
//! moments of the total mass, and moment-matching truncation control.

mod levy;
mod moments;
mod truncation;

pub use levy::{
    invert_tail_mass, levy_density, levy_tail_mass, levy_tail_mass_eval, sample_unfixed_jumps,
    JumpSeries, TailMassEval, INVERSION_TOL, TAIL_MASS_CAP,
};
pub use moments::{
    cumulant, empirical_moments, moment_match_index, moment_match_index_from,
    moments_from_cumulants, remainder_cumulant, total_mass_moment, truncated_moment_estimates,
    MAX_MOMENT_ORDER,
};
pub use truncation::{
    search_truncation_level, truncation_level_for, TruncationCache, TruncationLevel,
    TruncationPolicy,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::ln_gamma;

/// Parameters `(α, κ, γ)` of the generalized gamma Lévy intensity
/// `α e^{−κv} v^{−1−γ} / Γ(1−γ) dv`.
///
/// `γ = 0` is the Dirichlet process, `κ = 0` the normalized stable process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NggParams {
    alpha: f64,
    kappa: f64,
    gamma: f64,
}

impl NggParams {
    pub fn new(alpha: f64, kappa: f64, gamma: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::invalid(format!(
                "kappa must be non-negative, got {kappa}"
            )));
        }
        if !(gamma.is_finite() && (0.0..1.0).contains(&gamma)) {
            return Err(Error::invalid(format!(
                "gamma must lie in [0, 1), got {gamma}"
            )));
        }
        if kappa == 0.0 && gamma == 0.0 {
            return Err(Error::invalid("kappa and gamma cannot both be zero"));
        }
        Ok(Self {
            alpha,
            kappa,
            gamma,
        })
    }

    /// Dirichlet process with total mass `alpha`.
    pub fn dirichlet(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0, 0.0)
    }

    /// Normalized stable process with discount `gamma`.
    pub fn stable(gamma: f64) -> Result<Self> {
        Self::new(1.0, 0.0, gamma)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Exponential rate of the tilted intensity, `κ + u`.
    pub fn tilted_rate(&self, u: f64) -> f64 {
        self.kappa + u
    }

    /// `ln(α / Γ(1−γ))`, the intensity's normalizing constant.
    pub(crate) fn ln_scale(&self) -> f64 {
        self.alpha.ln() - ln_gamma(1.0 - self.gamma)
    }

    pub(crate) fn check_tilt(&self, u: f64) -> Result<()> {
        if !(u.is_finite() && u >= 0.0) {
            return Err(Error::invalid(format!(
                "tilt u must be non-negative, got {u}"
            )));
        }
        Ok(())
    }
}
