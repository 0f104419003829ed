mod common;

use nggmix::model::{KernelFamily, Observation};
use nggmix::process::{
    sample_unfixed_jumps, truncation_level_for, TruncationCache, TruncationPolicy,
};
use nggmix::sampler::{
    chain_configs, gibbs_step, initial_state, latent_u_log_density, run_chain, run_chain_set,
    run_chain_set_sequential, sample_latent_u, sample_latent_u_adaptive, u_log_acceptance,
    u_proposal_ln_density, AdaptiveU, ModelKind, SamplerConfig,
};
use nggmix::NggParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

fn small_config(data: &[Observation], model: ModelKind) -> SamplerConfig {
    let mut cfg = SamplerConfig::for_data(data, model, KernelFamily::Normal).unwrap();
    cfg.iterations = 200;
    cfg.burnin = 50;
    cfg.thinning = 5;
    cfg.seed = 11;
    cfg
}

/// CDF of the latent-variable target by quadrature in `ln u`.
fn u_target_cdf(n: usize, r: usize, p: NggParams) -> impl Fn(f64) -> f64 {
    let f = move |t: f64| (latent_u_log_density(t.exp(), n, r, &p) + t).exp();
    let (lo, hi) = (-30.0, 30.0);
    let norm = common::adaptive_simpson(f, lo, hi, 1e-12);
    move |u: f64| common::adaptive_simpson(f, lo, u.ln(), 1e-12) / norm
}

#[test]
fn latent_u_kernels_leave_the_target_invariant() {
    let p = NggParams::new(1.0, 1.0, 0.4).unwrap();
    let (n, r) = (50, 5);
    let cdf = u_target_cdf(n, r, p);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut gamma_draws = Vec::new();
    let mut u = 10.0;
    for t in 0..22_000 {
        u = sample_latent_u(u, n, r, &p, 2.0, &mut rng).0;
        if t >= 2_000 {
            gamma_draws.push(u);
        }
    }
    let mut adapt = AdaptiveU::default();
    let mut rw_draws = Vec::new();
    u = 10.0;
    for t in 0..22_000 {
        if t == 2_000 {
            adapt.freeze();
        }
        u = sample_latent_u_adaptive(u, n, r, &p, &mut adapt, &mut rng).0;
        if t >= 2_000 {
            rw_draws.push(u);
        }
    }
    // thin to weaken autocorrelation before comparing distributions
    let mut g: Vec<f64> = gamma_draws.iter().step_by(4).copied().collect();
    let mut w: Vec<f64> = rw_draws.iter().step_by(4).copied().collect();
    assert!(common::ks_statistic(&mut g, &cdf) < 0.05);
    assert!(common::ks_statistic(&mut w, &cdf) < 0.05);
}

#[test]
fn same_seed_same_trace() {
    let data = common::exact(&common::bimodal_sample(3)[..60]);
    for model in [ModelKind::Semiparametric, ModelKind::FullyNonparametric] {
        let cfg = small_config(&data, model);
        assert_eq!(
            run_chain(&data, &cfg).unwrap(),
            run_chain(&data, &cfg).unwrap()
        );
    }
}

#[test]
fn degenerate_intervals_reproduce_the_exact_trace() {
    let data = common::exact(&common::bimodal_sample(4)[..60]);
    let degenerate: Vec<Observation> = data.iter().map(|o| o.as_degenerate_interval()).collect();
    let cfg = small_config(&data, ModelKind::FullyNonparametric);
    assert_eq!(
        run_chain(&data, &cfg).unwrap().rows,
        run_chain(&degenerate, &cfg).unwrap().rows
    );
}

#[test]
fn concurrent_and_sequential_chains_agree() {
    let data = common::exact(&common::bimodal_sample(5)[..50]);
    let configs = chain_configs(&small_config(&data, ModelKind::Semiparametric), 3);
    let a: Vec<_> = run_chain_set(&data, &configs, None)
        .into_iter()
        .map(Result::unwrap)
        .collect();
    let b: Vec<_> = run_chain_set_sequential(&data, &configs, None)
        .into_iter()
        .map(Result::unwrap)
        .collect();
    assert_eq!(a, b);
    assert_ne!(a[0].rows, a[1].rows);
}

#[test]
fn trace_rows_are_consistent() {
    let data = common::exact(&common::bimodal_sample(6)[..80]);
    for model in [ModelKind::Semiparametric, ModelKind::FullyNonparametric] {
        let cfg = small_config(&data, model);
        let trace = run_chain(&data, &cfg).unwrap();
        assert_eq!(trace.len(), cfg.kept_iterations());
        for row in &trace.rows {
            assert!((row.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert_eq!(row.weights.len(), row.atoms.len());
            let mut labels = row.labels.clone();
            labels.sort();
            labels.dedup();
            assert_eq!(labels.len(), row.n_components);
            assert!(row.u > 0.0 && row.log_likelihood.is_finite());
            assert_eq!(row.sigma.is_some(), model == ModelKind::Semiparametric);
            if let Some(s) = row.sigma {
                assert!(row.atoms.iter().all(|a| a.sigma == s));
            }
        }
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let data = common::exact(&[0.1, 0.2, 0.3]);
    let mut cfg = small_config(&data, ModelKind::Semiparametric);
    cfg.burnin = cfg.iterations;
    assert!(run_chain(&data, &cfg).unwrap_err().is_validation());
    let cfg = SamplerConfig::for_data(
        &common::exact(&[-1.0, 2.0]),
        ModelKind::Semiparametric,
        KernelFamily::Gamma,
    );
    assert!(cfg.is_err());
}

#[test]
fn censored_data_runs_and_respects_support() {
    let data = vec![
        Observation::exact(1.2).unwrap(),
        Observation::left_censored(0.5).unwrap(),
        Observation::right_censored(3.0).unwrap(),
        Observation::interval(0.8, 1.6).unwrap(),
        Observation::exact(2.1).unwrap(),
        Observation::exact(1.7).unwrap(),
    ];
    let mut cfg = SamplerConfig::for_data(
        &data,
        ModelKind::FullyNonparametric,
        KernelFamily::Lognormal,
    )
    .unwrap();
    cfg.iterations = 150;
    cfg.burnin = 50;
    cfg.thinning = 1;
    let trace = run_chain(&data, &cfg).unwrap();
    assert_eq!(trace.len(), 100);
    assert!(trace.rows.iter().all(|r| r.cdf(0.0, &trace.kernel) == 0.0));
}

#[test]
fn gamma_proposal_satisfies_detailed_balance() {
    let p = NggParams::new(2.0, 0.5, 0.3).unwrap();
    let (n, r, delta) = (40, 6, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..500 {
        let x = (rng.random::<f64>() * 8.0 - 4.0).exp();
        let y = (rng.random::<f64>() * 8.0 - 4.0).exp();
        let flow = |from: f64, to: f64| {
            let a = u_log_acceptance(from, to, n, r, &p, delta).min(0.0);
            a + latent_u_log_density(from, n, r, &p) + u_proposal_ln_density(to, from, delta)
        };
        let (f, b) = (flow(x, y), flow(y, x));
        assert!(
            (f - b).abs() < 1e-10 * f.abs().max(1.0),
            "{x} {y}: {f} vs {b}"
        );
    }
}

#[test]
fn failing_chain_is_isolated() {
    let data = common::exact(&common::bimodal_sample(7)[..40]);
    let mut configs = chain_configs(&small_config(&data, ModelKind::Semiparametric), 3);
    configs[1].thinning = 0;
    let out = run_chain_set(&data, &configs, None);
    assert!(out[0].is_ok() && out[2].is_ok());
    assert!(out[1].as_ref().unwrap_err().is_validation());
}

/// Mean and batch-means standard error.
fn mean_and_se(xs: &[f64], batches: usize) -> (f64, f64) {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let size = xs.len() / batches;
    let means: Vec<f64> = xs
        .chunks_exact(size)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let b = means.len() as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1.0);
    (m, (var / b).sqrt())
}

/// Forward simulation of the prior against successive-conditional
/// simulation (Gibbs sweep, then fresh data given the state) on five points:
/// both target the same joint law, so `E[u]` and `E[R_n]` must agree.
#[test]
fn successive_conditional_matches_forward_simulation() {
    let n = 5;
    let p = NggParams::new(1.0, 1.0, 0.4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);

    let policy = TruncationPolicy::default();
    let q = truncation_level_for(&policy, &p, 0.0)
        .unwrap()
        .jumps
        .max(200);
    let (mut fwd_u, mut fwd_r) = (Vec::new(), Vec::new());
    for _ in 0..40_000 {
        let series = sample_unfixed_jumps(&p, 0.0, q, &mut rng).unwrap();
        let total = series.total();
        let mut picked = Vec::new();
        for _ in 0..n {
            let mut target = rng.random::<f64>() * total;
            let mut j = 0;
            for (i, &w) in series.jumps().iter().enumerate() {
                j = i;
                if target < w {
                    break;
                }
                target -= w;
            }
            if !picked.contains(&j) {
                picked.push(j);
            }
        }
        let g: f64 = rand_distr::Gamma::new(n as f64, 1.0)
            .unwrap()
            .sample(&mut rng);
        fwd_u.push(g / total);
        fwd_r.push(picked.len() as f64);
    }

    let mut data = common::exact(&[-1.0, -0.5, 0.0, 0.5, 1.0]);
    let mut cfg =
        SamplerConfig::for_data(&data, ModelKind::FullyNonparametric, KernelFamily::Normal)
            .unwrap();
    cfg.ngg = p;
    let cache = TruncationCache::new();
    let mut state = initial_state(&data, &cfg);
    let (mut sc_u, mut sc_r) = (Vec::new(), Vec::new());
    for t in 0..42_000 {
        gibbs_step(&data, &mut state, &cfg, &cache, true, &mut rng).unwrap();
        let atoms = state.alloc.distinct_atoms.clone();
        data = state
            .alloc
            .labels
            .iter()
            .map(|&l| {
                let a = atoms[l];
                let x = a.mu + a.sigma * rng.sample::<f64, _>(rand_distr::StandardNormal);
                Observation::exact(x).unwrap()
            })
            .collect();
        if t >= 2_000 {
            sc_u.push(state.u);
            sc_r.push(state.alloc.num_clusters() as f64);
        }
    }

    for (name, fwd, sc) in [("u", &fwd_u, &sc_u), ("R_n", &fwd_r, &sc_r)] {
        let (m1, se1) = mean_and_se(fwd, 100);
        let (m2, se2) = mean_and_se(sc, 50);
        let z = (m1 - m2).abs() / (se1 * se1 + se2 * se2).sqrt();
        assert!(
            z < 3.0,
            "{name}: forward {m1} ± {se1}, successive {m2} ± {se2}"
        );
    }
}
