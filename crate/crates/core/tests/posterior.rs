mod common;

use nggmix::model::{AtomParams, KernelFamily, KernelSpec, Observation};
use nggmix::posterior::{
    cdf_estimate, cpo, default_grid, density_estimate, iteration_quantile, quantile_estimate,
    trapezoid, QUANTILE_TOL,
};
use nggmix::sampler::{run_chain, ModelKind, SamplerConfig};
use proptest::prelude::*;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

fn standard_normal_trace(rows: usize) -> nggmix::sampler::ChainTrace {
    common::hand_trace(
        KernelFamily::Normal,
        (0..rows)
            .map(|_| (vec![1.0], vec![AtomParams::new(0.0, 1.0)], vec![0, 0]))
            .collect(),
    )
}

fn short_run(
    data: &[Observation],
    model: ModelKind,
    family: KernelFamily,
    iterations: usize,
) -> nggmix::sampler::ChainTrace {
    let mut cfg = SamplerConfig::for_data(data, model, family).unwrap();
    cfg.iterations = iterations;
    cfg.burnin = 100;
    cfg.thinning = 5;
    cfg.seed = 3;
    run_chain(data, &cfg).unwrap()
}

#[test]
fn identical_iterations_collapse_the_band() {
    let trace = standard_normal_trace(7);
    let grid: Vec<f64> = (0..21).map(|i| -3.0 + 0.3 * i as f64).collect();
    let est = density_estimate(&trace, &grid, 0.95).unwrap();
    for i in 0..grid.len() {
        assert_eq!(est.lower[i], est.mean[i]);
        assert_eq!(est.upper[i], est.mean[i]);
    }
    let one = standard_normal_trace(1);
    let est = cdf_estimate(&one, &grid, 0.9).unwrap();
    assert_eq!(est.lower, est.upper);
    assert!(density_estimate(&trace, &[], 0.95).is_err());
    assert!(density_estimate(&trace, &[1.0, 0.0], 0.95).is_err());
}

#[test]
fn symmetric_quantile_is_zero() {
    let est = quantile_estimate(&standard_normal_trace(3), 0.5, 0.95).unwrap();
    assert!(est.point.abs() <= QUANTILE_TOL);
    assert!(quantile_estimate(&standard_normal_trace(3), 0.0, 0.95).is_err());
    assert!(quantile_estimate(&standard_normal_trace(3), 1.0, 0.95).is_err());
}

#[test]
fn two_atom_quantile_matches_grid_inversion() {
    let w = [0.3, 0.7];
    let atoms = vec![AtomParams::new(-1.0, 0.5), AtomParams::new(2.0, 1.5)];
    let trace = common::hand_trace(
        KernelFamily::Normal,
        vec![(w.to_vec(), atoms.clone(), vec![0])],
    );
    let comps: Vec<Normal> = atoms
        .iter()
        .map(|a| Normal::new(a.mu, a.sigma).unwrap())
        .collect();
    let cdf = |x: f64| w[0] * comps[0].cdf(x) + w[1] * comps[1].cdf(x);
    for p in [0.05, 0.25, 0.5, 0.9, 0.99] {
        // dense grid, then linear interpolation inside the bracketing cell
        let step = 1e-4;
        let mut x = -6.0;
        while cdf(x + step) < p {
            x += step;
        }
        let (f0, f1) = (cdf(x), cdf(x + step));
        let oracle = x + step * (p - f0) / (f1 - f0);
        let q = quantile_estimate(&trace, p, 0.95).unwrap().point;
        assert!((q - oracle).abs() < 1e-5, "p={p}: {q} vs {oracle}");
    }
}

#[test]
fn cpo_of_constant_and_single_iteration() {
    let data = common::exact(&[-0.5, 0.0, 1.3]);
    let trace = standard_normal_trace(5);
    let values = cpo(&trace, &data).unwrap().values;
    let n = Normal::new(0.0, 1.0).unwrap();
    for (v, o) in values.iter().zip(&data) {
        let f = n.pdf(o.point().unwrap());
        assert!((v - f).abs() < 1e-14 * f);
    }
    let censored = vec![Observation::interval(-1.0, 1.0).unwrap()];
    let v = cpo(&standard_normal_trace(1), &censored).unwrap().values[0];
    assert!((v - libm::erf(std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-14);
}

#[test]
fn cpo_flags_zero_predictive() {
    let data = vec![
        Observation::exact(-1.0).unwrap(),
        Observation::exact(2.0).unwrap(),
    ];
    let trace = common::hand_trace(
        KernelFamily::Gamma,
        vec![(vec![1.0], vec![AtomParams::new(1.0, 0.5)], vec![0, 0])],
    );
    let out = cpo(&trace, &data).unwrap();
    assert_eq!(out.zero_density, vec![0]);
    assert_eq!(out.values[0], 0.0);
    assert!(out.values[1] > 0.0);
}

#[test]
fn bundled_run_summaries() {
    let data = nggmix::cli::parse_dataset(&common::path("data/acidity.csv")).unwrap();
    let trace = short_run(&data, ModelKind::Semiparametric, KernelFamily::Normal, 600);
    let kernel = KernelSpec::new(KernelFamily::Normal);
    let grid = default_grid(&data, &kernel, 200).unwrap();
    let dens = density_estimate(&trace, &grid, 0.95).unwrap();
    assert!((trapezoid(&dens.grid, &dens.mean) - 1.0).abs() < 1e-2);
    for i in 0..grid.len() {
        assert!(dens.lower[i] <= dens.mean[i] && dens.mean[i] <= dens.upper[i]);
    }
    let cdf = cdf_estimate(&trace, &grid, 0.95).unwrap();
    assert!(cdf.mean.windows(2).all(|w| w[0] <= w[1]));
    for row in &trace.rows {
        let f: Vec<f64> = grid.iter().map(|&x| row.cdf(x, &kernel)).collect();
        assert!(f.windows(2).all(|w| w[0] <= w[1]));
        for p in [0.05, 0.5] {
            let q = iteration_quantile(row, &kernel, p);
            assert!((row.cdf(q, &kernel) - p).abs() < 1e-6);
        }
    }

    let c = cpo(&trace, &data).unwrap();
    assert!(c.values.iter().all(|v| v.is_finite() && *v > 0.0));
    let mut reversed = trace.clone();
    reversed.rows.reverse();
    assert_eq!(cpo(&reversed, &data).unwrap(), c);
}

#[test]
fn single_observation_gives_unimodal_density() {
    let data = common::exact(&[1.5]);
    let trace = short_run(
        &data,
        ModelKind::FullyNonparametric,
        KernelFamily::Normal,
        5000,
    );
    let grid: Vec<f64> = (0..201).map(|i| -8.5 + 0.1 * i as f64).collect();
    let mean = density_estimate(&trace, &grid, 0.95).unwrap().mean;
    let mode = (0..mean.len())
        .max_by(|&a, &b| mean[a].total_cmp(&mean[b]))
        .unwrap();
    assert!((grid[mode] - 1.5).abs() < 1.0);
    // away from the mode only small Monte Carlo ripples remain
    let peak = mean[mode];
    for i in 1..mean.len() - 1 {
        if i != mode && mean[i] > mean[i - 1] && mean[i] > mean[i + 1] {
            assert!(mean[i] < 0.1 * peak, "secondary mode at {}", grid[i]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantile_round_trip(
        w in 0.05f64..0.95,
        m1 in -5.0f64..5.0,
        m2 in -5.0f64..5.0,
        s1 in 0.1f64..3.0,
        s2 in 0.1f64..3.0,
        p in 0.01f64..0.99,
        laplace in any::<bool>(),
    ) {
        let family = if laplace { KernelFamily::DoubleExponential } else { KernelFamily::Normal };
        let trace = common::hand_trace(
            family,
            vec![(vec![w, 1.0 - w], vec![AtomParams::new(m1, s1), AtomParams::new(m2, s2)], vec![0])],
        );
        let q = iteration_quantile(&trace.rows[0], &trace.kernel, p);
        prop_assert!((trace.rows[0].cdf(q, &trace.kernel) - p).abs() < 1e-6);
    }
}
