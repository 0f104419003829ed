//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use nggmix::model::Observation;
use nggmix::NggParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `eps`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, eps: f64) -> f64 {
    // split first so that narrow features are not missed by the coarse rule
    let pieces = 64;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (fa, fb, fm) = (f(lo), f(hi), f(0.5 * (lo + hi)));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson_step(&f, lo, hi, fa, fm, fb, whole, eps / pieces as f64, 40)
        })
        .sum()
}

/// `∫_v^∞ α e^{−(κ+u)w} w^{−1−γ} / Γ(1−γ) dw` by quadrature in `t = ln w`.
pub fn tail_mass_by_quadrature(v: f64, p: &NggParams, u: f64) -> f64 {
    let c = p.kappa() + u;
    assert!(c > 0.0);
    let (a, g) = (p.alpha(), p.gamma());
    let scale = a / statrs::function::gamma::gamma(1.0 - g);
    let t0 = v.ln();
    let t1 = (750.0 / c).ln().max(t0 + 1.0);
    let f = |t: f64| (-c * t.exp() - g * t).exp();
    // rough size of the result for a relative tolerance
    let size = adaptive_simpson(f, t0, t1, 1e-6).abs().max(1e-300);
    scale * adaptive_simpson(f, t0, t1, size * 1e-13)
}

/// Two-sample-free KS statistic of sorted samples against a CDF.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// 150 draws from `½N(−2, 0.7²) + ½N(2, 0.7²)`.
pub fn bimodal_sample(seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Normal::new(0.0, 0.7).unwrap();
    (0..150)
        .map(|_| {
            let m = if rng.random::<bool>() { 2.0 } else { -2.0 };
            m + n.sample(&mut rng)
        })
        .collect()
}

pub fn bimodal_density(x: f64) -> f64 {
    let s = 0.7;
    let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    0.5 * phi((x + 2.0) / s) / s + 0.5 * phi((x - 2.0) / s) / s
}

pub fn exact(values: &[f64]) -> Vec<Observation> {
    values
        .iter()
        .map(|&x| Observation::exact(x).unwrap())
        .collect()
}

/// About 40% of the values replaced by censoring: intervals of width 1,
/// left-censoring below −3 and right-censoring above 3.
pub fn censor_forty_percent(values: &[f64], seed: u64) -> Vec<Observation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    values
        .iter()
        .map(|&x| {
            if rng.random::<f64>() >= 0.4 {
                return Observation::exact(x).unwrap();
            }
            if x < -3.0 {
                Observation::left_censored(-3.0).unwrap()
            } else if x > 3.0 {
                Observation::right_censored(3.0).unwrap()
            } else {
                let l = (x * 2.0).floor() / 2.0 - 0.25;
                Observation::interval(l, l + 1.0).unwrap()
            }
        })
        .collect()
}

pub fn path(rel: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

/// Trace built from `(weights, atoms, labels)` rows.
pub fn hand_trace(
    family: nggmix::model::KernelFamily,
    rows: Vec<(Vec<f64>, Vec<nggmix::model::AtomParams>, Vec<usize>)>,
) -> nggmix::sampler::ChainTrace {
    use nggmix::sampler::{ChainTrace, ModelKind, TraceRow};
    ChainTrace {
        chain: 0,
        seed: 0,
        model: ModelKind::FullyNonparametric,
        kernel: nggmix::model::KernelSpec::new(family),
        rows: rows
            .into_iter()
            .enumerate()
            .map(|(t, (weights, atoms, labels))| {
                let mut distinct = labels.clone();
                distinct.sort();
                distinct.dedup();
                TraceRow {
                    iteration: t + 1,
                    n_components: distinct.len(),
                    weights,
                    atoms,
                    labels,
                    u: 1.0,
                    log_likelihood: 0.0,
                    sigma: None,
                    phi: [0.0, 1.0],
                }
            })
            .collect(),
        acceptance: Default::default(),
        u_log_step: None,
    }
}
