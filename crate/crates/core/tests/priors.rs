use nggmix::priors::{
    dirichlet_cluster_pmf, dirichlet_cluster_pmf_exact, dirichlet_expected_clusters,
    prior_components_table, stable_cluster_pmf, stable_cluster_pmf_exact, stable_expected_clusters,
    stirling_first_unsigned, MAX_PRIOR_N,
};
use nggmix::process::sample_unfixed_jumps;
use nggmix::NggParams;
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn harmonic_oracle(n: usize, alpha: f64) -> f64 {
    (1..=n).map(|i| alpha / (alpha + i as f64 - 1.0)).sum()
}

#[test]
fn stirling_rows_sum_to_factorial() {
    let mut fact = BigUint::from(1u32);
    for n in 1..=30usize {
        fact *= BigUint::from(n);
        let row = stirling_first_unsigned(n);
        assert_eq!(row.len(), n + 1);
        assert_eq!(row.iter().sum::<BigUint>(), fact);
        assert_eq!(row[n], BigUint::from(1u32));
    }
}

#[test]
fn paper_anchors() {
    assert!((dirichlet_expected_clusters(100, 1.0).unwrap() - 5.187378).abs() < 1e-5);
    assert!((stable_expected_clusters(100, 0.4).unwrap() - 7.102731).abs() < 1e-4);
}

#[test]
fn dirichlet_small_cases() {
    let p = dirichlet_cluster_pmf(2, 1.0).unwrap();
    assert_eq!(p.pmf, vec![0.5, 0.5]);
    for alpha in [0.1, 1.0, 7.5] {
        assert_eq!(dirichlet_expected_clusters(1, alpha).unwrap(), 1.0);
    }
    let big = dirichlet_expected_clusters(50, 1e12).unwrap();
    assert!((big - 50.0).abs() < 1e-8);
}

#[test]
fn dirichlet_expectation_matches_harmonic_sum() {
    for n in [1, 5, 37, 100, 200] {
        for alpha in [0.3, 1.0, 2.5, 10.0] {
            let e = dirichlet_expected_clusters(n, alpha).unwrap();
            let oracle = harmonic_oracle(n, alpha);
            assert!((e - oracle).abs() < 1e-10 * oracle, "n={n} α={alpha}");
            let from_pmf = dirichlet_cluster_pmf(n, alpha).unwrap();
            let mean: f64 = from_pmf
                .pmf
                .iter()
                .enumerate()
                .map(|(k, p)| (k + 1) as f64 * p)
                .sum();
            assert!((mean - oracle).abs() < 1e-10 * oracle);
            assert!((from_pmf.expectation - oracle).abs() < 1e-10 * oracle);
        }
    }
}

#[test]
fn pmfs_are_normalized() {
    for n in [1, 2, 10, 50, 100] {
        assert!(dirichlet_cluster_pmf_exact(n, 1.0).unwrap().is_normalized());
        assert!(dirichlet_cluster_pmf_exact(n, 0.37)
            .unwrap()
            .is_normalized());
        for gamma in [0.2, 0.4, 0.8] {
            assert!(stable_cluster_pmf_exact(n, gamma).unwrap().is_normalized());
        }
    }
    for n in [10, 50, 100, 200] {
        for gamma in [0.2, 0.4, 0.8] {
            let p = stable_cluster_pmf(n, gamma).unwrap();
            assert!((p.pmf.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            assert!(p.pmf.iter().all(|&x| x >= 0.0));
        }
        let d = dirichlet_cluster_pmf(n, 1.0).unwrap();
        assert!((d.pmf.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn stable_small_cases() {
    let one = stable_cluster_pmf(1, 0.3).unwrap();
    assert_eq!(one.pmf, vec![1.0]);
    assert_eq!(one.expectation, 1.0);
    // two draws share an atom with probability 1 − γ
    let two = stable_cluster_pmf(2, 0.25).unwrap();
    assert!((two.pmf[0] - 0.75).abs() < 1e-15);
    assert!((two.pmf[1] - 0.25).abs() < 1e-15);
}

/// `P(K_n = k)` by the seating recursion
/// `P(K_{m+1} = k) = P(K_m = k)·stay(m, k) + P(K_m = k − 1)·(1 − stay(m, k − 1))`.
fn seating_pmf(n: usize, stay: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[1] = 1.0;
    for m in 1..n {
        for k in (1..=m + 1).rev() {
            let keep = if k <= m { p[k] * stay(m, k) } else { 0.0 };
            let open = if k > 1 {
                p[k - 1] * (1.0 - stay(m, k - 1))
            } else {
                0.0
            };
            p[k] = keep + open;
        }
    }
    p.remove(0);
    p
}

fn entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|x| x * x.ln())
        .sum::<f64>()
}

#[test]
fn pmfs_match_seating_recursion() {
    for n in [10, 100, 200] {
        for gamma in [0.1, 0.4, 0.9] {
            let oracle = seating_pmf(n, |m, k| (m as f64 - k as f64 * gamma) / m as f64);
            let pmf = stable_cluster_pmf(n, gamma).unwrap().pmf;
            for (a, b) in pmf.iter().zip(&oracle) {
                assert!(
                    (a - b).abs() < 1e-12 * b.max(1e-300) + 1e-300,
                    "n={n} γ={gamma}"
                );
            }
        }
        for alpha in [0.5, 1.0, 4.0] {
            let oracle = seating_pmf(n, |m, _| m as f64 / (m as f64 + alpha));
            let pmf = dirichlet_cluster_pmf(n, alpha).unwrap().pmf;
            for (a, b) in pmf.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-12 * b.max(1e-300) + 1e-300);
            }
        }
    }
}

/// Flatter priors for larger γ, until the mass piles up near `k = n` as
/// γ → 1: at `n = 100` the entropy peaks between 0.8 and 0.9.
#[test]
fn stable_entropy_grows_with_gamma() {
    let entropies: Vec<f64> = (1..=9)
        .map(|i| stable_cluster_pmf(100, i as f64 / 10.0).unwrap().entropy())
        .collect();
    assert!(
        entropies[..8].windows(2).all(|w| w[0] < w[1]),
        "{entropies:?}"
    );
    let oracle: Vec<f64> = [0.8, 0.9]
        .iter()
        .map(|g| {
            entropy(&seating_pmf(100, |m, k| {
                (m as f64 - k as f64 * g) / m as f64
            }))
        })
        .collect();
    assert!((entropies[7] - oracle[0]).abs() < 1e-10);
    assert!((entropies[8] - oracle[1]).abs() < 1e-10);
    assert!(oracle[1] < oracle[0]);
    assert!(stable_cluster_pmf(100, 0.99).unwrap().entropy() < entropies[8]);
}

#[test]
fn plot_table_compares_the_two_priors() {
    let table = prior_components_table(100, 1.0, 0.4).unwrap();
    assert_eq!(table.len(), 100);
    assert!(table.iter().enumerate().all(|(i, r)| r.k == i + 1));
    let (sd, ss) = table
        .iter()
        .fold((0.0, 0.0), |(a, b), r| (a + r.dirichlet, b + r.stable));
    assert!((sd - 1.0).abs() < 1e-10 && (ss - 1.0).abs() < 1e-10);
    let dp = dirichlet_cluster_pmf(100, 1.0).unwrap();
    let st = stable_cluster_pmf(100, 0.4).unwrap();
    assert!(st.entropy() > dp.entropy());
}

#[test]
fn invalid_inputs() {
    assert!(stable_cluster_pmf(10, 0.0).is_err());
    assert!(stable_cluster_pmf(10, 1.0).is_err());
    assert!(dirichlet_cluster_pmf(10, 0.0).is_err());
    assert!(dirichlet_cluster_pmf(0, 1.0).is_err());
    assert!(dirichlet_cluster_pmf(MAX_PRIOR_N + 1, 1.0).is_err());
    assert!(dirichlet_cluster_pmf(MAX_PRIOR_N, 1.0).is_ok());
}

/// Largest per-k deviation of the simulated frequencies in units of their
/// binomial standard error.
fn max_z(pmf: &[f64], counts: &[usize], draws: usize) -> f64 {
    pmf.iter()
        .zip(counts)
        .filter(|(p, _)| **p > 1e-4)
        .map(|(p, &c)| {
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            (c as f64 / draws as f64 - p).abs() / se
        })
        .fold(0.0, f64::max)
}

/// Sequential seating: a new table with probability `kγ/m`, table `j` with
/// probability `(m_j − γ)/m`.
#[test]
fn stable_pmf_matches_seating_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let draws = 40_000;
    for (n, gamma) in [(5, 0.4), (12, 0.4), (12, 0.8), (9, 0.15)] {
        let mut counts = vec![0usize; n];
        for _ in 0..draws {
            let mut tables: Vec<f64> = vec![1.0];
            for m in 1..n {
                let m = m as f64;
                let k = tables.len() as f64;
                let mut target = rng.random::<f64>() * m;
                if target < k * gamma {
                    tables.push(1.0);
                    continue;
                }
                target -= k * gamma;
                let last = tables.len() - 1;
                for (j, t) in tables.iter_mut().enumerate() {
                    if target < *t - gamma || j == last {
                        *t += 1.0;
                        break;
                    }
                    target -= *t - gamma;
                }
            }
            counts[tables.len() - 1] += 1;
        }
        let pmf = stable_cluster_pmf(n, gamma).unwrap().pmf;
        let z = max_z(&pmf, &counts, draws);
        assert!(z < 4.5, "n={n} γ={gamma}: z={z}");
    }
}

/// Samples from the normalized jumps of the untilted stable process.
#[test]
fn stable_pmf_matches_jump_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let draws = 20_000;
    let (n, gamma) = (10, 0.4);
    let p = NggParams::stable(gamma).unwrap();
    let mut counts = vec![0usize; n];
    for _ in 0..draws {
        // the mass left after 3000 jumps is of relative order 3000^{1 − 1/γ}
        let series = sample_unfixed_jumps(&p, 0.0, 3000, &mut rng).unwrap();
        let total = series.total();
        let mut seen = Vec::new();
        for _ in 0..n {
            let mut target = rng.random::<f64>() * total;
            let mut pick = series.len() - 1;
            for (i, &j) in series.jumps().iter().enumerate() {
                if target < j {
                    pick = i;
                    break;
                }
                target -= j;
            }
            if !seen.contains(&pick) {
                seen.push(pick);
            }
        }
        counts[seen.len() - 1] += 1;
    }
    let pmf = stable_cluster_pmf(n, gamma).unwrap().pmf;
    let z = max_z(&pmf, &counts, draws);
    assert!(z < 4.5, "z={z}");
}
