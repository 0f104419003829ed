//! Prior distribution of the number of clusters `K_n` among `n` draws from a
//! Dirichlet or normalized stable process, in exact integer arithmetic.
//!
//! Real parameters are converted to their exact binary rationals, so the only
//! rounding happens when a final probability is turned into an `f64`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` for which full PMFs are computed.
pub const MAX_PRIOR_N: usize = 500;

/// Above this `n` the Dirichlet expectation is summed in floating point.
const EXACT_SUM_LIMIT: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterCountPrior {
    pub n: usize,
    /// `pmf[k − 1] = P(K_n = k)`.
    pub pmf: Vec<f64>,
    pub expectation: f64,
}

/// Exact PMF over `k = 1..=n` as integer numerators on a common denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactPmf {
    pub numerators: Vec<BigUint>,
    pub denominator: BigUint,
}

impl ExactPmf {
    /// True when the numerators add up to the denominator exactly.
    pub fn is_normalized(&self) -> bool {
        self.numerators.iter().sum::<BigUint>() == self.denominator
    }

    pub fn probability(&self, k: usize) -> BigRational {
        BigRational::new(
            BigInt::from(self.numerators[k - 1].clone()),
            BigInt::from(self.denominator.clone()),
        )
    }

    fn rounded(&self) -> ClusterCountPrior {
        let pmf = self
            .numerators
            .iter()
            .map(|x| ratio_to_f64(x, &self.denominator))
            .collect();
        let mean: BigUint = self
            .numerators
            .iter()
            .enumerate()
            .map(|(k, x)| x * (k + 1))
            .sum();
        ClusterCountPrior {
            n: self.numerators.len(),
            pmf,
            expectation: ratio_to_f64(&mean, &self.denominator),
        }
    }
}

/// `num / den` rounded to within an ulp or so, for any magnitudes.
fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    // scale so the integer quotient carries about 64 significant bits
    let shift = num.bits() as i64 - den.bits() as i64 - 64;
    let q = if shift >= 0 {
        num / (den << shift as u64)
    } else {
        (num << (-shift) as u64) / den
    };
    let mut x = q.to_f64().expect("quotient fits in f64");
    let mut e = shift;
    // apply 2^e in steps so the scale factor itself never under- or overflows
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    x * 2f64.powi(e as i32)
}

impl ClusterCountPrior {
    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        self.pmf
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|p| -p * p.ln())
            .sum()
    }

    pub fn probability(&self, k: usize) -> f64 {
        if k == 0 || k > self.n {
            0.0
        } else {
            self.pmf[k - 1]
        }
    }
}

/// Exact `(numerator, denominator)` of a positive finite float.
fn exact_ratio(x: f64, what: &str) -> Result<(BigUint, BigUint)> {
    let r = BigRational::from_float(x)
        .ok_or_else(|| Error::invalid(format!("{what} must be finite")))?;
    let (num, den) = (r.numer().to_biguint(), r.denom().to_biguint());
    match (num, den) {
        (Some(n), Some(d)) if !n.is_zero() => Ok((n, d)),
        _ => Err(Error::invalid(format!("{what} must be positive"))),
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if n > MAX_PRIOR_N {
        return Err(Error::invalid(format!(
            "n = {n} exceeds the supported maximum {MAX_PRIOR_N}"
        )));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )));
    }
    Ok(())
}

type Row = Arc<Vec<BigUint>>;

fn stirling_cache() -> &'static RwLock<HashMap<usize, Row>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Row>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Unsigned Stirling numbers of the first kind `|s(n, k)|` for `k = 0..=n`.
pub fn stirling_first_unsigned(n: usize) -> Row {
    if let Some(row) = stirling_cache()
        .read()
        .expect("stirling cache poisoned")
        .get(&n)
    {
        return row.clone();
    }
    let mut row = vec![BigUint::one()];
    for m in 1..=n {
        // |s(m, k)| = |s(m−1, k−1)| + (m−1)|s(m−1, k)|
        let mut next = vec![BigUint::zero(); m + 1];
        for k in 1..=m {
            let mut v = row[k - 1].clone();
            if k < m {
                v += &row[k] * (m - 1);
            }
            next[k] = v;
        }
        row = next;
    }
    let row = Arc::new(row);
    stirling_cache()
        .write()
        .expect("stirling cache poisoned")
        .insert(n, row.clone());
    row
}

/// Generalized factorial coefficients `C(n, k; g/d)` scaled by `d^n`, which
/// keeps them integral: `C'(n,k) = g C'(n−1,k−1) + ((n−1)d − k g) C'(n−1,k)`.
fn scaled_factorial_coefficients(n: usize, g: &BigUint, d: &BigUint) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for m in 1..=n {
        let mut next = vec![BigUint::zero(); m + 1];
        let base = d * (m - 1);
        for k in 1..=m {
            let mut v = g * &row[k - 1];
            if k < m {
                // (m−1)d − k g > 0 because k ≤ m−1 and g < d
                v += &row[k] * (&base - g * k);
            }
            next[k] = v;
        }
        row = next;
    }
    row
}

/// Exact `P(K_n = k) = |s(n,k)| α^k / (α)_n`, `k = 1..=n`.
pub fn dirichlet_cluster_pmf_exact(n: usize, alpha: f64) -> Result<ExactPmf> {
    check_n(n)?;
    check_alpha(alpha)?;
    let (a, b) = exact_ratio(alpha, "alpha")?;
    let stirling = stirling_first_unsigned(n);
    // with α = a/b: P(k) = |s(n,k)| a^k b^{n−k} / Π_{i<n} (a + i b)
    let mut rising = BigUint::one();
    for i in 0..n {
        rising *= &a + &b * i;
    }
    let mut a_pow = BigUint::one();
    let b_pows: Vec<BigUint> = {
        let mut v = vec![BigUint::one(); n + 1];
        for i in 1..=n {
            v[i] = &v[i - 1] * &b;
        }
        v
    };
    let mut numerators = Vec::with_capacity(n);
    for k in 1..=n {
        a_pow *= &a;
        numerators.push(&stirling[k] * &a_pow * &b_pows[n - k]);
    }
    Ok(ExactPmf {
        numerators,
        denominator: rising,
    })
}

pub fn dirichlet_cluster_pmf(n: usize, alpha: f64) -> Result<ClusterCountPrior> {
    Ok(dirichlet_cluster_pmf_exact(n, alpha)?.rounded())
}

/// `E[K_n] = Σ_{i=1}^{n} α / (α + i − 1)`.
pub fn dirichlet_expected_clusters(n: usize, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    check_alpha(alpha)?;
    if n > EXACT_SUM_LIMIT {
        // compensated summation; the terms decrease monotonically
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for i in (0..n).rev() {
            let t = alpha / (alpha + i as f64);
            let s = sum + t;
            comp += if sum.abs() >= t {
                (sum - s) + t
            } else {
                (t - s) + sum
            };
            sum = s;
        }
        return Ok(sum + comp);
    }
    let (a, b) = exact_ratio(alpha, "alpha")?;
    let a = BigInt::from(a);
    let b = BigInt::from(b);
    let mut total = BigRational::zero();
    for i in 0..n {
        total += BigRational::new(a.clone(), &a + &b * i);
    }
    let (num, den) = (total.numer().magnitude(), total.denom().magnitude());
    Ok(ratio_to_f64(num, den))
}

/// Exact stable-process `P(K_n = k) = (k−1)! C(n,k;γ) / (γ (n−1)!)`.
pub fn stable_cluster_pmf_exact(n: usize, gamma: f64) -> Result<ExactPmf> {
    check_n(n)?;
    check_gamma(gamma)?;
    let (g, d) = exact_ratio(gamma, "gamma")?;
    let coeffs = scaled_factorial_coefficients(n, &g, &d);
    // C(n,k) = C'(n,k) / d^n, so P(k) = (k−1)! C'(n,k) / (g d^{n−1} (n−1)!)
    let mut denom = g;
    for _ in 1..n {
        denom *= &d;
    }
    for i in 1..n {
        denom *= i;
    }
    let mut fact = BigUint::one(); // (k−1)!
    let mut numerators = Vec::with_capacity(n);
    for k in 1..=n {
        if k > 1 {
            fact *= k - 1;
        }
        numerators.push(&fact * &coeffs[k]);
    }
    Ok(ExactPmf {
        numerators,
        denominator: denom,
    })
}

pub fn stable_cluster_pmf(n: usize, gamma: f64) -> Result<ClusterCountPrior> {
    Ok(stable_cluster_pmf_exact(n, gamma)?.rounded())
}

pub fn stable_expected_clusters(n: usize, gamma: f64) -> Result<f64> {
    Ok(stable_cluster_pmf(n, gamma)?.expectation)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorComponentsRow {
    pub k: usize,
    pub dirichlet: f64,
    pub stable: f64,
}

/// Side-by-side prior PMFs of `K_n` for a Dirichlet(`alpha`) and a
/// stable(`gamma`) process, one row per `k = 1..=n`.
pub fn prior_components_table(n: usize, alpha: f64, gamma: f64) -> Result<Vec<PriorComponentsRow>> {
    let dp = dirichlet_cluster_pmf(n, alpha)?;
    let st = stable_cluster_pmf(n, gamma)?;
    Ok((1..=n)
        .map(|k| PriorComponentsRow {
            k,
            dirichlet: dp.pmf[k - 1],
            stable: st.pmf[k - 1],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_stirling_rows() {
        let r = stirling_first_unsigned(4);
        let v: Vec<u64> = r.iter().map(|x| x.to_u64().unwrap()).collect();
        assert_eq!(v, vec![0, 6, 11, 6, 1]);
    }

    #[test]
    fn two_draws() {
        let p = dirichlet_cluster_pmf(2, 1.0).unwrap();
        assert_eq!(p.pmf, vec![0.5, 0.5]);
        // stable: second draw joins the first with probability 1 − γ
        let s = stable_cluster_pmf(2, 0.25).unwrap();
        assert_eq!(s.pmf, vec![0.75, 0.25]);
    }

    #[test]
    fn ratio_conversion_reaches_subnormals() {
        let one = BigUint::one();
        let x = ratio_to_f64(&one, &(BigUint::one() << 1070u32));
        assert_eq!(x, 2f64.powi(-1070));
        assert_eq!(
            ratio_to_f64(&BigUint::from(1u32), &BigUint::from(3u32)),
            1.0 / 3.0
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(dirichlet_cluster_pmf(MAX_PRIOR_N + 1, 1.0).is_err());
        assert!(dirichlet_cluster_pmf(0, 1.0).is_err());
        assert!(stable_cluster_pmf(10, 1.0).is_err());
        assert!(stable_cluster_pmf(10, 0.0).is_err());
        assert!(dirichlet_expected_clusters(10, -1.0).is_err());
    }
}
