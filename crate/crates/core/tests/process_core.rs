mod common;

use nggmix::process::{
    cumulant, invert_tail_mass, levy_density, levy_tail_mass, moment_match_index,
    sample_unfixed_jumps, total_mass_moment, truncation_level_for, TruncationPolicy,
};
use nggmix::special::{exp_integral_e1, upper_gamma_neg};
use nggmix::NggParams;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn tail_mass_matches_quadrature() {
    for &g in &[0.0, 0.3, 0.6, 0.9] {
        for &(kappa, u) in &[(1.0, 0.0), (0.0, 2.0), (0.5, 10.0)] {
            let Ok(p) = NggParams::new(1.5, kappa, g) else {
                continue;
            };
            for &v in &[1e-5, 0.01, 0.3, 2.0] {
                let got = levy_tail_mass(v, &p, u);
                let want = common::tail_mass_by_quadrature(v, &p, u);
                assert!(
                    ((got - want) / want).abs() < 1e-9,
                    "g={g} kappa={kappa} u={u} v={v}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn untilted_stable_tail_is_a_power_law() {
    let p = NggParams::stable(0.5).unwrap();
    let gamma_half = std::f64::consts::PI.sqrt();
    for &v in &[1e-4f64, 1.0, 50.0] {
        let want = v.powf(-0.5) / (0.5 * gamma_half);
        assert!((levy_tail_mass(v, &p, 0.0) / want - 1.0).abs() < 1e-13);
    }
}

#[test]
fn dirichlet_tail_is_exponential_integral() {
    let p = NggParams::dirichlet(2.0).unwrap();
    for &v in &[1e-3, 0.5, 4.0] {
        let want = 2.0 * exp_integral_e1(1.5 * v);
        assert!((levy_tail_mass(v, &p, 0.5) / want - 1.0).abs() < 1e-13);
    }
}

#[test]
fn incomplete_gamma_recurrence_against_statrs() {
    // Γ(−γ, x) = (x^{−γ} e^{−x} − Γ(1−γ, x)) / γ with Γ(1−γ, x) from statrs
    for &g in &[0.1, 0.5, 0.85] {
        for &x in &[0.01, 0.7, 3.0, 25.0] {
            let upper = statrs::function::gamma::gamma_ur(1.0 - g, x)
                * statrs::function::gamma::gamma(1.0 - g);
            let want = (x.powf(-g) * (-x).exp() - upper) / g;
            let got = upper_gamma_neg(g, x);
            assert!(
                ((got - want) / want).abs() < 1e-10,
                "g={g} x={x}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn cumulants_match_integrated_intensity() {
    let p = NggParams::new(0.8, 1.0, 0.4).unwrap();
    for k in 1..=3 {
        let f = |t: f64| {
            let w = t.exp();
            w.powi(k as i32) * levy_density(w, &p, 0.7) * w
        };
        let want = common::adaptive_simpson(f, (1e-12f64).ln(), (400.0f64).ln(), 1e-14);
        let got = cumulant(k, &p, 0.7).unwrap();
        assert!(((got - want) / want).abs() < 1e-7, "k={k}: {got} vs {want}");
    }
}

#[test]
fn truncation_budget_is_met() {
    let p = NggParams::new(1.0, 1.0, 0.4).unwrap();
    let policy = TruncationPolicy::default();
    let level = truncation_level_for(&policy, &p, 0.0).unwrap();
    assert!(level.reached);
    assert!(level.index <= 0.01);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let series: Vec<_> = (0..200)
        .map(|_| sample_unfixed_jumps(&p, 0.0, level.jumps, &mut rng).unwrap())
        .collect();
    assert!(moment_match_index(&series, &p, 4).unwrap() < 0.05);
    // finer budgets never need fewer jumps
    let fine =
        truncation_level_for(&TruncationPolicy::new(0.001, 4, 1000).unwrap(), &p, 0.0).unwrap();
    assert!(fine.jumps >= level.jumps);
}

#[test]
fn total_mass_mean_of_stable_under_tilt() {
    // E[T] = α Γ(1−γ) u^{γ−1} / Γ(1−γ) = u^{γ−1}
    let p = NggParams::stable(0.4).unwrap();
    assert!((total_mass_moment(1, &p, 2.0).unwrap() - 2f64.powf(-0.6)).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inversion_round_trips(g in 0.0f64..0.95, kappa in 0.0f64..3.0, u in 0.0f64..20.0, log_xi in -8.0f64..8.0) {
        prop_assume!(kappa + u > 1e-3);
        let p = NggParams::new(1.0, kappa, g).unwrap();
        let xi = 10f64.powf(log_xi);
        let v = invert_tail_mass(xi, &p, u).unwrap();
        let back = levy_tail_mass(v, &p, u);
        prop_assert!((back / xi - 1.0).abs() < 1e-6);
    }

    #[test]
    fn jumps_strictly_decrease(g in 0.0f64..0.9, kappa in 0.01f64..3.0, u in 0.0f64..10.0, seed in any::<u64>()) {
        let p = NggParams::new(1.0, kappa, g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = sample_unfixed_jumps(&p, u, 60, &mut rng).unwrap();
        prop_assert!(!s.is_empty());
        prop_assert!(s.jumps().iter().all(|&j| j > 0.0 && j.is_finite()));
        prop_assert!(s.jumps().windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn tail_mass_decreases(g in 0.0f64..0.95, v in 1e-6f64..10.0, factor in 1.001f64..5.0) {
        let p = NggParams::new(1.0, 1.0, g).unwrap();
        prop_assert!(levy_tail_mass(v * factor, &p, 0.3) < levy_tail_mass(v, &p, 0.3));
    }
}
