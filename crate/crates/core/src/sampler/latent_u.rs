use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::process::NggParams;
use crate::special::ln_gamma;

/// Unnormalized log density of the latent `U` given `n` observations in `r`
/// clusters: `(n−1) ln u + (rγ−n) ln(u+κ) − (α/γ)((u+κ)^γ − κ^γ)`.
///
/// The last term is written as `α κ^γ expm1(γ ln(1+u/κ)) / γ`, whose `γ → 0`
/// limit `α ln(1+u/κ)` is the Dirichlet-process case.
pub fn latent_u_log_density(u: f64, n: usize, r: usize, p: &NggParams) -> f64 {
    if !(u > 0.0 && u.is_finite()) {
        return f64::NEG_INFINITY;
    }
    let (alpha, kappa, gamma) = (p.alpha(), p.kappa(), p.gamma());
    let n = n as f64;
    let exponent = r as f64 * gamma - n;
    let psi = if kappa > 0.0 {
        let l = (u / kappa).ln_1p();
        if gamma > 0.0 {
            alpha * kappa.powf(gamma) * (gamma * l).exp_m1() / gamma
        } else {
            alpha * l
        }
    } else {
        alpha * u.powf(gamma) / gamma
    };
    (n - 1.0) * u.ln() + exponent * (u + kappa).ln() - psi
}

/// `ln q(to | from)` for the gamma proposal `Ga(δ, rate δ/from)` centred at `from`.
pub fn u_proposal_ln_density(to: f64, from: f64, delta: f64) -> f64 {
    let rate = delta / from;
    delta * rate.ln() - ln_gamma(delta) + (delta - 1.0) * to.ln() - rate * to
}

/// Log Metropolis–Hastings ratio of moving from `u` to `proposal` under the
/// gamma proposal.
pub fn u_log_acceptance(
    u: f64,
    proposal: f64,
    n: usize,
    r: usize,
    p: &NggParams,
    delta: f64,
) -> f64 {
    latent_u_log_density(proposal, n, r, p) - latent_u_log_density(u, n, r, p)
        + u_proposal_ln_density(u, proposal, delta)
        - u_proposal_ln_density(proposal, u, delta)
}

/// One Metropolis–Hastings update of `U` with the gamma proposal. Returns the
/// new value and whether the proposal was accepted.
pub fn sample_latent_u<R: Rng + ?Sized>(
    u: f64,
    n: usize,
    r: usize,
    p: &NggParams,
    delta: f64,
    rng: &mut R,
) -> (f64, bool) {
    let proposal: f64 = Gamma::new(delta, u / delta)
        .expect("positive proposal parameters")
        .sample(rng);
    if !(proposal > 0.0 && proposal.is_finite()) {
        return (u, false);
    }
    let log_ratio = u_log_acceptance(u, proposal, n, r, p, delta);
    let e: f64 = rng.random();
    if log_ratio >= 0.0 || e.ln() < log_ratio {
        (proposal, true)
    } else {
        (u, false)
    }
}

/// Robbins–Monro tuned random walk on `ln U`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveU {
    pub log_step: f64,
    pub updates: usize,
    pub frozen: bool,
}

impl Default for AdaptiveU {
    fn default() -> Self {
        Self {
            log_step: 0.0,
            updates: 0,
            frozen: false,
        }
    }
}

impl AdaptiveU {
    pub const TARGET_ACCEPTANCE: f64 = 0.44;
    pub const DECAY: f64 = 0.6;

    pub fn step(&self) -> f64 {
        self.log_step.exp()
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }
}

/// Random-walk update of `ln U` with the Jacobian term `ln u`; the step
/// size adapts toward acceptance 0.44 until [`AdaptiveU::freeze`] is called.
pub fn sample_latent_u_adaptive<R: Rng + ?Sized>(
    u: f64,
    n: usize,
    r: usize,
    p: &NggParams,
    adapt: &mut AdaptiveU,
    rng: &mut R,
) -> (f64, bool) {
    let z: f64 = rng.sample(StandardNormal);
    let log_u = u.ln();
    let proposal = (log_u + adapt.step() * z).exp();
    let log_ratio = if proposal > 0.0 && proposal.is_finite() {
        latent_u_log_density(proposal, n, r, p) + proposal.ln()
            - latent_u_log_density(u, n, r, p)
            - log_u
    } else {
        f64::NEG_INFINITY
    };
    let e: f64 = rng.random();
    let accepted = log_ratio >= 0.0 || e.ln() < log_ratio;
    if !adapt.frozen {
        adapt.updates += 1;
        let prob = if log_ratio.is_nan() {
            0.0
        } else {
            log_ratio.min(0.0).exp()
        };
        let rate = (adapt.updates as f64).powf(-AdaptiveU::DECAY);
        adapt.log_step += rate * (prob - AdaptiveU::TARGET_ACCEPTANCE);
    }
    (if accepted { proposal } else { u }, accepted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_move_has_unit_ratio() {
        let p = NggParams::new(1.0, 1.0, 0.4).unwrap();
        assert_eq!(u_log_acceptance(2.5, 2.5, 50, 5, &p, 2.0), 0.0);
    }

    #[test]
    fn dirichlet_limit_is_continuous() {
        let dp = NggParams::new(1.0, 1.0, 0.0).unwrap();
        let near = NggParams::new(1.0, 1.0, 1e-9).unwrap();
        for &u in &[0.1, 1.0, 30.0] {
            let a = latent_u_log_density(u, 20, 3, &dp);
            let b = latent_u_log_density(u, 20, 3, &near);
            assert!((a - b).abs() < 1e-6);
            // direct Dirichlet form: u^{n−1} (1+u)^{−n} (1+u)^{−α}
            let direct = 19.0 * u.ln() - 20.0 * (1.0 + u).ln() - (1.0 + u).ln();
            assert!((a - direct).abs() < 1e-12);
        }
    }
}
