use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor};

use super::{Monitored, ScalarTraceSet};
use crate::error::{Error, Result};

/// Coverage of the upper confidence limit.
pub const PSRF_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsrfValue {
    pub point: f64,
    pub upper: f64,
    /// Zero within-chain variance, or no spread at all across chains and
    /// within-chain variances, so the degrees-of-freedom correction is undefined.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsrfReport {
    pub univariate: Vec<(Monitored, PsrfValue)>,
    /// Over the non-degenerate quantities; `None` if fewer than one remains
    /// or their pooled within-chain covariance is singular.
    pub multivariate: Option<f64>,
    pub multivariate_names: Vec<Monitored>,
    pub chains: usize,
    pub iterations: usize,
}

impl PsrfReport {
    pub fn get(&self, name: Monitored) -> Option<PsrfValue> {
        self.univariate
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn covariance(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / (x.len() - 1) as f64
}

/// Upper `p` quantile of `F(d1, d2)`, with the chi-square limit for huge `d2`.
fn f_quantile(p: f64, d1: f64, d2: f64) -> f64 {
    if d2.is_finite() && d2 < 1e8 {
        if let Ok(f) = FisherSnedecor::new(d1, d2) {
            return f.inverse_cdf(p);
        }
    }
    ChiSquared::new(d1)
        .expect("positive degrees of freedom")
        .inverse_cdf(p)
        / d1
}

fn univariate(chains: &[&[f64]]) -> PsrfValue {
    let m = chains.len() as f64;
    let n = chains[0].len() as f64;
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let s2: Vec<f64> = chains.iter().map(|c| covariance(c, c)).collect();
    let w = mean(&s2);
    let b = n * covariance(&means, &means);
    if w <= 0.0 {
        let point = if b <= 0.0 { 1.0 } else { f64::INFINITY };
        return PsrfValue {
            point,
            upper: point,
            degenerate: true,
        };
    }
    let mu = mean(&means);
    let var_w = covariance(&s2, &s2) / m;
    let var_b = 2.0 * b * b / (m - 1.0);
    let sq: Vec<f64> = means.iter().map(|x| x * x).collect();
    let cov_wb = (n / m) * (covariance(&s2, &sq) - 2.0 * mu * covariance(&s2, &means));
    let v = (n - 1.0) * w / n + (1.0 + 1.0 / m) * b / n;
    let var_v = ((n - 1.0).powi(2) * var_w
        + (1.0 + 1.0 / m).powi(2) * var_b
        + 2.0 * (n - 1.0) * (1.0 + 1.0 / m) * cov_wb)
        / (n * n);
    let fixed = (n - 1.0) / n;
    let random = (1.0 + 1.0 / m) * (b / w) / n;
    if var_v <= 0.0 {
        let point = (fixed + random).sqrt();
        return PsrfValue {
            point,
            upper: point,
            degenerate: true,
        };
    }
    let df_v = 2.0 * v * v / var_v;
    let df_adj = (df_v + 3.0) / (df_v + 1.0);
    let w_df = if var_w > 0.0 {
        2.0 * w * w / var_w
    } else {
        f64::INFINITY
    };
    let q = f_quantile((1.0 + PSRF_CONFIDENCE) / 2.0, m - 1.0, w_df);
    PsrfValue {
        point: (df_adj * (fixed + random)).sqrt(),
        upper: (df_adj * (fixed + q * random)).sqrt(),
        degenerate: false,
    }
}

/// Largest-eigenvalue multivariate reduction factor of Brooks and Gelman.
fn multivariate(set: &ScalarTraceSet, vars: &[usize]) -> Option<f64> {
    let p = vars.len();
    let m = set.num_chains();
    let n = set.len(0) as f64;
    let mut w = DMatrix::<f64>::zeros(p, p);
    let mut means = DMatrix::<f64>::zeros(m, p);
    for c in 0..m {
        let chain = set.chain(c);
        for (a, &i) in vars.iter().enumerate() {
            means[(c, a)] = mean(&chain[i]);
            for (b, &j) in vars.iter().enumerate() {
                w[(a, b)] += covariance(&chain[i], &chain[j]) / m as f64;
            }
        }
    }
    let mut b_over_n = DMatrix::<f64>::zeros(p, p);
    for a in 0..p {
        for b in 0..p {
            let x: Vec<f64> = means.column(a).iter().copied().collect();
            let y: Vec<f64> = means.column(b).iter().copied().collect();
            b_over_n[(a, b)] = covariance(&x, &y);
        }
    }
    let chol = w.cholesky()?;
    let l = chol.l();
    let l_inv = l.clone().try_inverse()?;
    let sym = &l_inv * &b_over_n * l_inv.transpose();
    let sym = (&sym + sym.transpose()) * 0.5;
    let emax = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let r = (n - 1.0) / n + (1.0 + 1.0 / m as f64) * emax;
    Some(r.max(0.0).sqrt())
}

/// Potential scale reduction factors across at least two chains of equal length.
pub fn psrf(set: &ScalarTraceSet) -> Result<PsrfReport> {
    let m = set.num_chains();
    if m < 2 {
        return Err(Error::invalid("PSRF needs at least two chains"));
    }
    let n = set.len(0);
    if (1..m).any(|c| set.len(c) != n) {
        return Err(Error::invalid("chains must have equal kept lengths"));
    }
    if n < 2 {
        return Err(Error::invalid(
            "PSRF needs at least two iterations per chain",
        ));
    }
    let mut univ = Vec::new();
    let mut usable = Vec::new();
    for (i, &name) in set.names().iter().enumerate() {
        let chains: Vec<&[f64]> = (0..m).map(|c| set.chain(c)[i].as_slice()).collect();
        let v = univariate(&chains);
        if !v.degenerate {
            usable.push(i);
        }
        univ.push((name, v));
    }
    let mv = if usable.is_empty() {
        None
    } else {
        multivariate(set, &usable)
    };
    Ok(PsrfReport {
        univariate: univ,
        multivariate: mv,
        multivariate_names: usable.iter().map(|&i| set.names()[i]).collect(),
        chains: m,
        iterations: n,
    })
}
