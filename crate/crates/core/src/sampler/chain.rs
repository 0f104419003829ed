use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::Observation;
use crate::process::TruncationCache;

use super::config::{validate_data, SamplerConfig};
use super::state::ChainState;
use super::steps::{gibbs_step, initial_state};
use super::trace::{ChainTrace, TraceRow};

/// Progress callback, called with `(chain, iteration)`.
pub type Progress<'a> = &'a (dyn Fn(usize, usize) + Sync);

fn shared_cache() -> &'static TruncationCache {
    static CACHE: OnceLock<TruncationCache> = OnceLock::new();
    CACHE.get_or_init(TruncationCache::new)
}

/// Multiplicative jitter of `u` and the common scale for chains after the
/// first. A jittered scale is kept only where its prior density is positive.
fn jitter(state: &mut ChainState, config: &SamplerConfig, rng: &mut ChaCha8Rng) {
    let zu: f64 = rng.sample(StandardNormal);
    state.u *= (0.5 * zu).exp();
    let zs: f64 = rng.sample(StandardNormal);
    let factor = (0.2 * zs).exp();
    let mut atoms = state.alloc.distinct_atoms.clone();
    for a in &mut atoms {
        a.sigma *= factor;
    }
    if atoms
        .iter()
        .all(|a| config.base.scale.ln_density(a.sigma).is_finite())
    {
        state.alloc.distinct_atoms = atoms;
        state.sigma = state.sigma.map(|s| s * factor);
    }
}

/// Runs one chain with seed `config.seed`; chains with a nonzero index start
/// from a jittered state.
pub fn run_chain_indexed(
    data: &[Observation],
    config: &SamplerConfig,
    chain: usize,
    cache: &TruncationCache,
    progress: Option<Progress>,
) -> Result<ChainTrace> {
    config.validate()?;
    validate_data(data, &config.kernel)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = initial_state(data, config);
    if chain > 0 {
        jitter(&mut state, config, &mut rng);
    }
    let cadence = (config.iterations / 10).max(1);
    let mut rows = Vec::with_capacity(config.kept_iterations());
    for t in 1..=config.iterations {
        gibbs_step(data, &mut state, config, cache, t > config.burnin, &mut rng)?;
        if config.keeps(t) {
            rows.push(record(&state, t));
        }
        if let Some(cb) = progress {
            if t % cadence == 0 || t == config.iterations {
                cb(chain, t);
            }
        }
    }
    Ok(ChainTrace {
        chain,
        seed: config.seed,
        model: config.model,
        kernel: config.kernel,
        rows,
        acceptance: state.accept,
        u_log_step: config.adaptive_u.then_some(state.adapt.log_step),
    })
}

fn record(state: &ChainState, t: usize) -> TraceRow {
    let measure = state
        .measure
        .as_ref()
        .expect("measure refreshed during the sweep");
    TraceRow {
        iteration: t,
        weights: measure.weights(),
        atoms: measure.atoms().copied().collect(),
        u: measure.u,
        log_likelihood: state.log_likelihood,
        n_components: state.alloc.num_clusters(),
        labels: state.alloc.labels.clone(),
        sigma: state.sigma,
        phi: state.phi,
    }
}

/// Single chain with the process-wide truncation cache.
pub fn run_chain(data: &[Observation], config: &SamplerConfig) -> Result<ChainTrace> {
    run_chain_indexed(data, config, 0, shared_cache(), None)
}

/// Runs one chain per configuration concurrently, chain `i` with
/// `configs[i]`. Failures are reported per chain.
pub fn run_chain_set(
    data: &[Observation],
    configs: &[SamplerConfig],
    progress: Option<Progress>,
) -> Vec<Result<ChainTrace>> {
    let cache = shared_cache();
    configs
        .par_iter()
        .enumerate()
        .map(|(i, cfg)| {
            run_chain_indexed(data, cfg, i, cache, progress).map_err(|e| Error::Chain {
                chain: i,
                source: Box::new(e),
            })
        })
        .collect()
}

/// [`run_chain_set`] on the calling thread, one chain after another.
pub fn run_chain_set_sequential(
    data: &[Observation],
    configs: &[SamplerConfig],
    progress: Option<Progress>,
) -> Vec<Result<ChainTrace>> {
    let cache = shared_cache();
    configs
        .iter()
        .enumerate()
        .map(|(i, cfg)| {
            run_chain_indexed(data, cfg, i, cache, progress).map_err(|e| Error::Chain {
                chain: i,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Configurations of an `n_chains` run: chain `i` uses seed `seed + i`.
pub fn chain_configs(config: &SamplerConfig, n_chains: usize) -> Vec<SamplerConfig> {
    (0..n_chains)
        .map(|i| SamplerConfig {
            seed: config.seed.wrapping_add(i as u64),
            ..*config
        })
        .collect()
}

/// `n_chains` chains with seeds `seed + i`, run concurrently; results are
/// ordered by chain index.
pub fn run_chains(
    data: &[Observation],
    config: &SamplerConfig,
    n_chains: usize,
) -> Result<Vec<Result<ChainTrace>>> {
    if n_chains == 0 {
        return Err(Error::invalid("at least one chain is required"));
    }
    Ok(run_chain_set(data, &chain_configs(config, n_chains), None))
}
