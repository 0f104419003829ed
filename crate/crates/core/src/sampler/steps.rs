use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{observation_loglik, AtomParams, BaseMeasureSpec, KernelFamily, Observation};
use crate::process::{sample_unfixed_jumps, NggParams, TruncationCache};
use crate::special::log_sum_exp;

use super::config::{location_values, ModelKind, SamplerConfig};
use super::latent_u::{sample_latent_u, sample_latent_u_adaptive, AdaptiveU};
use super::state::{AcceptanceStats, AllocationState, ChainState, MeasureState};

fn metropolis<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    if log_ratio.is_nan() {
        return false;
    }
    if log_ratio >= 0.0 {
        return true;
    }
    let e: f64 = rng.random();
    e.ln() < log_ratio
}

/// Fixed jump at a cluster of size `n_j`: `Ga(n_j − γ, rate κ+u)`.
pub fn sample_fixed_jump<R: Rng + ?Sized>(n_j: usize, p: &NggParams, u: f64, rng: &mut R) -> f64 {
    let shape = n_j as f64 - p.gamma();
    let rate = p.tilted_rate(u);
    Gamma::new(shape, 1.0 / rate)
        .expect("positive fixed-jump parameters")
        .sample(rng)
}

/// New atom from the base measure; the semiparametric model keeps the
/// common scale.
fn sample_atom<R: Rng + ?Sized>(
    base: &BaseMeasureSpec,
    phi: [f64; 2],
    common_sigma: Option<f64>,
    rng: &mut R,
) -> AtomParams {
    let mu = base.sample_location(phi, rng);
    let sigma = common_sigma.unwrap_or_else(|| base.scale.sample(rng));
    AtomParams::new(mu, sigma)
}

/// Draws the truncated measure given `u` and the current allocation: `Q`
/// unfixed jumps with base-measure locations, and a gamma fixed jump per
/// distinct atom.
pub fn refresh_measure<R: Rng + ?Sized>(
    state: &ChainState,
    config: &SamplerConfig,
    cache: &TruncationCache,
    rng: &mut R,
) -> Result<MeasureState> {
    let u = state.u;
    let q = cache.level_for(&config.truncation, &config.ngg, u)?.jumps;
    let unfixed = sample_unfixed_jumps(&config.ngg, u, q, rng)?;
    let unfixed_atoms = (0..unfixed.len())
        .map(|_| sample_atom(&config.base, state.phi, state.sigma, rng))
        .collect();
    let fixed_jumps = state
        .alloc
        .multiplicities
        .iter()
        .map(|&n_j| sample_fixed_jump(n_j, &config.ngg, u, rng))
        .collect();
    Ok(MeasureState {
        unfixed,
        unfixed_atoms,
        fixed_jumps,
        fixed_atoms: state.alloc.distinct_atoms.clone(),
        u,
    })
}

/// Allocates each observation to an atom with probability proportional to
/// `J̄_j · exp(loglik)`, in the log domain. Returns the new allocation and the
/// data log-likelihood under the normalized mixture.
pub fn resample_allocations<R: Rng + ?Sized>(
    data: &[Observation],
    measure: &MeasureState,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<(AllocationState, f64)> {
    let (choices, log_lik) = draw_choices(data, measure, config, rng)?;
    let atoms: Vec<AtomParams> = measure.atoms().copied().collect();
    Ok((AllocationState::from_choices(&choices, &atoms), log_lik))
}

/// Per-observation measure atom indices, in allocation order.
fn draw_choices<R: Rng + ?Sized>(
    data: &[Observation],
    measure: &MeasureState,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<(Vec<usize>, f64)> {
    let atoms: Vec<AtomParams> = measure.atoms().copied().collect();
    let ln_jumps: Vec<f64> = measure.jumps().map(f64::ln).collect();
    let ln_total = measure.total_mass().ln();
    let mut choices = Vec::with_capacity(data.len());
    let mut lw = vec![0.0; atoms.len()];
    let mut log_lik = 0.0;
    for (i, obs) in data.iter().enumerate() {
        for ((slot, a), lj) in lw.iter_mut().zip(&atoms).zip(&ln_jumps) {
            *slot = lj + observation_loglik(obs, &config.kernel, a);
        }
        let lse = log_sum_exp(&lw);
        if lse == f64::NEG_INFINITY || lse.is_nan() {
            return Err(Error::ZeroLikelihood { index: i });
        }
        log_lik += lse - ln_total;
        let target = rng.random::<f64>();
        let mut acc = 0.0;
        let mut pick = None;
        for (j, l) in lw.iter().enumerate() {
            let p = (l - lse).exp();
            if p > 0.0 {
                acc += p;
                pick = Some(j);
                if target < acc {
                    break;
                }
            }
        }
        choices.push(pick.expect("at least one atom has positive weight"));
    }
    Ok((choices, log_lik))
}

fn cluster_log_lik(
    data: &[Observation],
    members: &[usize],
    config: &SamplerConfig,
    a: &AtomParams,
) -> f64 {
    let mut s = 0.0;
    for &i in members {
        s += observation_loglik(&data[i], &config.kernel, a);
        if s == f64::NEG_INFINITY {
            break;
        }
    }
    s
}

fn members_by_cluster(alloc: &AllocationState) -> Vec<Vec<usize>> {
    let mut members = vec![Vec::new(); alloc.num_clusters()];
    for (i, &l) in alloc.labels.iter().enumerate() {
        members[l].push(i);
    }
    members
}

/// Log target of one distinct atom in the acceleration move.
pub fn atom_log_target(
    data: &[Observation],
    members: &[usize],
    config: &SamplerConfig,
    phi: [f64; 2],
    a: &AtomParams,
) -> f64 {
    let mut t = config.base.location_ln_density(a.mu, phi);
    if config.model == ModelKind::FullyNonparametric {
        t += config.base.scale.ln_density(a.sigma);
    }
    if t == f64::NEG_INFINITY {
        return t;
    }
    t + cluster_log_lik(data, members, config, a)
}

/// One random-walk Metropolis–Hastings move per distinct atom: location
/// always, log scale too in the fully nonparametric model.
pub fn accelerate_unique_values<R: Rng + ?Sized>(
    data: &[Observation],
    state: &mut ChainState,
    config: &SamplerConfig,
    rng: &mut R,
) {
    let members = members_by_cluster(&state.alloc);
    let full = config.model == ModelKind::FullyNonparametric;
    for (j, m) in members.iter().enumerate() {
        let current = state.alloc.distinct_atoms[j];
        let z: f64 = rng.sample(StandardNormal);
        let mut proposal = AtomParams::new(current.mu + config.location_step * z, current.sigma);
        let mut jacobian = 0.0;
        if full {
            let w: f64 = rng.sample(StandardNormal);
            proposal.sigma = current.sigma * (config.log_scale_step * w).exp();
            jacobian = proposal.sigma.ln() - current.sigma.ln();
        }
        let log_ratio = atom_log_target(data, m, config, state.phi, &proposal)
            - atom_log_target(data, m, config, state.phi, &current)
            + jacobian;
        state.accept.atom_proposed += 1;
        if metropolis(log_ratio, rng) {
            state.alloc.distinct_atoms[j] = proposal;
            state.accept.atom_accepted += 1;
        }
    }
}

/// Semi-conjugate Gibbs update of the normal location hyperparameters
/// `φ = (mean, precision)` given the distinct locations. Other location
/// families keep `φ` fixed.
pub fn update_hyperparameters<R: Rng + ?Sized>(
    locations: &[f64],
    base: &BaseMeasureSpec,
    phi: [f64; 2],
    rng: &mut R,
) -> [f64; 2] {
    let Some(h) = base.hyperprior else { return phi };
    let [psi1, psi2, psi3, psi4] = h.psi;
    let r = locations.len() as f64;
    let sum: f64 = locations.iter().sum();
    let prec = psi2 + r * phi[1];
    let mean = (psi2 * psi1 + phi[1] * sum) / prec;
    let z: f64 = rng.sample(StandardNormal);
    let phi1 = mean + z / prec.sqrt();
    let ss: f64 = locations.iter().map(|m| (m - phi1).powi(2)).sum();
    let shape = psi3 + 0.5 * r;
    let rate = psi4 + 0.5 * ss;
    let phi2 = Gamma::new(shape, 1.0 / rate)
        .expect("positive posterior parameters")
        .sample(rng);
    [phi1, phi2.max(f64::MIN_POSITIVE)]
}

/// Log target of the common scale: prior times likelihood of the allocated data.
pub fn common_scale_log_target(
    data: &[Observation],
    state: &ChainState,
    config: &SamplerConfig,
    sigma: f64,
) -> f64 {
    let prior = config.base.scale.ln_density(sigma);
    if prior == f64::NEG_INFINITY || sigma <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let mut s = prior;
    for (obs, &l) in data.iter().zip(&state.alloc.labels) {
        let a = AtomParams::new(state.alloc.distinct_atoms[l].mu, sigma);
        s += observation_loglik(obs, &config.kernel, &a);
        if s == f64::NEG_INFINITY {
            break;
        }
    }
    s
}

/// Random-walk Metropolis–Hastings step on `ln σ` for the common scale.
pub fn sample_common_scale<R: Rng + ?Sized>(
    data: &[Observation],
    state: &mut ChainState,
    config: &SamplerConfig,
    rng: &mut R,
) {
    let Some(sigma) = state.sigma else { return };
    let z: f64 = rng.sample(StandardNormal);
    let proposal = sigma * (config.common_scale_step * z).exp();
    let log_ratio = common_scale_log_target(data, state, config, proposal)
        - common_scale_log_target(data, state, config, sigma)
        + proposal.ln()
        - sigma.ln();
    state.accept.scale_proposed += 1;
    if metropolis(log_ratio, rng) {
        state.sigma = Some(proposal);
        state.accept.scale_accepted += 1;
        for a in &mut state.alloc.distinct_atoms {
            a.sigma = proposal;
        }
    }
}

/// Initial state: all observations in one cluster at the median location,
/// scale at the prior median, `u = 1`, and `φ` at the hyperprior centre.
pub fn initial_state(data: &[Observation], config: &SamplerConfig) -> ChainState {
    let mut xs = location_values(data, &config.kernel);
    xs.sort_by(f64::total_cmp);
    let mut mu = if xs.is_empty() { 0.0 } else { xs[xs.len() / 2] };
    if xs.len().is_multiple_of(2) && !xs.is_empty() {
        mu = 0.5 * (xs[xs.len() / 2 - 1] + xs[xs.len() / 2]);
    }
    if config.kernel.family == KernelFamily::Beta {
        mu = mu.clamp(1e-3, 1.0 - 1e-3);
    }
    if config.kernel.family == KernelFamily::Gamma {
        mu = mu.max(f64::MIN_POSITIVE);
    }
    let sigma = config.base.scale.median();
    let phi = match config.base.hyperprior {
        Some(h) => [h.psi[0], h.psi[2] / h.psi[3]],
        None => config.base.phi,
    };
    ChainState {
        alloc: AllocationState::single(data.len(), AtomParams::new(mu, sigma)),
        measure: None,
        u: 1.0,
        phi,
        sigma: (config.model == ModelKind::Semiparametric).then_some(sigma),
        adapt: AdaptiveU::default(),
        accept: AcceptanceStats::default(),
        log_likelihood: f64::NAN,
    }
}

/// One sweep: `U`, measure refresh, allocations, acceleration,
/// hyperparameters, then the common scale for the semiparametric model.
/// `burnin_done` freezes the adaptive `U` kernel.
pub fn gibbs_step<R: Rng + ?Sized>(
    data: &[Observation],
    state: &mut ChainState,
    config: &SamplerConfig,
    cache: &TruncationCache,
    burnin_done: bool,
    rng: &mut R,
) -> Result<()> {
    let n = data.len();
    let r = state.alloc.num_clusters();
    let (u, accepted) = if config.adaptive_u {
        if burnin_done {
            state.adapt.freeze();
        }
        sample_latent_u_adaptive(state.u, n, r, &config.ngg, &mut state.adapt, rng)
    } else {
        sample_latent_u(state.u, n, r, &config.ngg, config.u_proposal_delta, rng)
    };
    state.u = u;
    state.accept.u_proposed += 1;
    state.accept.u_accepted += accepted as usize;

    let measure = refresh_measure(state, config, cache, rng)?;
    let (choices, log_lik) = draw_choices(data, &measure, config, rng)?;
    let atoms: Vec<AtomParams> = measure.atoms().copied().collect();
    state.alloc = AllocationState::from_choices(&choices, &atoms);
    state.log_likelihood = log_lik;
    // measure atom behind each cluster, in cluster order
    let mut sources = Vec::with_capacity(state.alloc.num_clusters());
    for (i, &c) in choices.iter().enumerate() {
        if state.alloc.labels[i] == sources.len() {
            sources.push(c);
        }
    }

    accelerate_unique_values(data, state, config, rng);
    let locations: Vec<f64> = state.alloc.distinct_atoms.iter().map(|a| a.mu).collect();
    state.phi = update_hyperparameters(&locations, &config.base, state.phi, rng);
    if config.model == ModelKind::Semiparametric {
        sample_common_scale(data, state, config, rng);
    }

    // The recorded measure carries the updated cluster values and scale.
    let mut measure = measure;
    for (&src, a) in sources.iter().zip(&state.alloc.distinct_atoms) {
        measure.set_atom(src, *a);
    }
    if let Some(sigma) = state.sigma {
        measure
            .fixed_atoms
            .iter_mut()
            .chain(measure.unfixed_atoms.iter_mut())
            .for_each(|a| a.sigma = sigma);
    }
    state.measure = Some(measure);
    Ok(())
}
