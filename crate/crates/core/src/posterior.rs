//! Posterior summaries of a chain: mean density and CDF with pointwise
//! bands, quantiles of the random distribution, and conditional predictive
//! ordinates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{finite_bounds, observation_loglik, KernelSpec, Observation, Support};
use crate::sampler::{ChainTrace, TraceRow};
use crate::special::log_sum_exp;

/// Tolerance in `x` of the per-iteration quantile bisection.
pub const QUANTILE_TOL: f64 = 1e-8;

/// Pointwise posterior mean and central credible band of a function on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub grid: Vec<f64>,
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Type 7 sample quantile (linear interpolation between order statistics)
/// of already sorted values.
pub fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Type 7 quantile of unsorted values.
pub fn sample_quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    sorted_quantile(&v, p)
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "credible level must lie in (0, 1), got {level}"
        )))
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("evaluation grid is empty"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid(
            "evaluation grid must be strictly increasing",
        ));
    }
    Ok(())
}

fn pointwise<F>(trace: &ChainTrace, grid: &[f64], level: f64, f: F) -> Result<DensityEstimate>
where
    F: Fn(&TraceRow, f64) -> f64 + Sync,
{
    check_grid(grid)?;
    check_level(level)?;
    if trace.is_empty() {
        return Err(Error::invalid("trace has no kept iterations"));
    }
    let a = 1.0 - level;
    let cols: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|&x| {
            let mut vals: Vec<f64> = trace.rows.iter().map(|r| f(r, x)).collect();
            // shifted so that identical values give their own value back
            let v0 = vals[0];
            let mean = v0 + vals.iter().map(|v| v - v0).sum::<f64>() / vals.len() as f64;
            vals.sort_by(f64::total_cmp);
            let lo = sorted_quantile(&vals, a / 2.0).min(mean);
            let hi = sorted_quantile(&vals, 1.0 - a / 2.0).max(mean);
            (mean, lo, hi)
        })
        .collect();
    Ok(DensityEstimate {
        grid: grid.to_vec(),
        mean: cols.iter().map(|c| c.0).collect(),
        lower: cols.iter().map(|c| c.1).collect(),
        upper: cols.iter().map(|c| c.2).collect(),
    })
}

/// Posterior mean of the mixture density on `grid` with a central band of
/// probability `level` (e.g. 0.95).
pub fn density_estimate(trace: &ChainTrace, grid: &[f64], level: f64) -> Result<DensityEstimate> {
    let k = trace.kernel;
    pointwise(trace, grid, level, |r, x| r.density(x, &k))
}

/// Posterior mean of the mixture CDF on `grid` with a central band.
pub fn cdf_estimate(trace: &ChainTrace, grid: &[f64], level: f64) -> Result<DensityEstimate> {
    let k = trace.kernel;
    pointwise(trace, grid, level, |r, x| r.cdf(x, &k))
}

/// `points` equispaced values over the finite data range padded by 10% on
/// each side, clipped to the kernel support.
pub fn default_grid(data: &[Observation], kernel: &KernelSpec, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::invalid("a grid needs at least two points"));
    }
    let xs = finite_bounds(data);
    if xs.is_empty() {
        return Err(Error::Data("no finite values to build a grid from".into()));
    }
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = if max > min {
        0.1 * (max - min)
    } else {
        0.5 * min.abs().max(1.0)
    };
    let (mut lo, mut hi) = (min - pad, max + pad);
    match kernel.support() {
        Support::Real => {}
        Support::Positive => lo = lo.max(min.min(hi) * 1e-3).max(f64::MIN_POSITIVE),
        Support::UnitInterval => {
            lo = lo.max(1e-6);
            hi = hi.min(1.0 - 1e-6);
        }
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo + step * i as f64
            }
        })
        .collect())
}

/// Inverts one iteration's mixture CDF at `p` by bracketing and bisection.
pub fn iteration_quantile(row: &TraceRow, kernel: &KernelSpec, p: f64) -> f64 {
    let f = |x: f64| row.cdf(x, kernel);
    let (mut lo, mut hi) = match kernel.support() {
        Support::UnitInterval => (0.0, 1.0),
        Support::Positive => {
            let mut lo = 1.0;
            while f(lo) >= p && lo > 1e-300 {
                lo *= 1e-2;
            }
            let mut hi = 1.0;
            while f(hi) < p && hi < 1e300 {
                hi *= 1e2;
            }
            (if lo < 1.0 { lo } else { 0.0 }, hi)
        }
        Support::Real => {
            let center: f64 = row
                .weights
                .iter()
                .zip(&row.atoms)
                .map(|(w, a)| w * a.mu)
                .sum();
            let width = row.atoms.iter().map(|a| a.sigma).fold(1e-8, f64::max);
            let mut step = width;
            let mut lo = center - step;
            while f(lo) >= p {
                step *= 2.0;
                lo = center - step;
            }
            step = width;
            let mut hi = center + step;
            while f(hi) < p {
                step *= 2.0;
                hi = center + step;
            }
            (lo, hi)
        }
    };
    for _ in 0..2000 {
        if hi - lo <= QUANTILE_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Posterior of the `p`-quantile of the random distribution: median over
/// iterations and the central band of probability `level`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileEstimate {
    pub p: f64,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub per_iteration: Vec<f64>,
}

pub fn quantile_estimate(trace: &ChainTrace, p: f64, level: f64) -> Result<QuantileEstimate> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!(
            "quantile probability must lie in (0, 1), got {p}"
        )));
    }
    check_level(level)?;
    if trace.is_empty() {
        return Err(Error::invalid("trace has no kept iterations"));
    }
    let k = trace.kernel;
    let per_iteration: Vec<f64> = trace
        .rows
        .par_iter()
        .map(|r| iteration_quantile(r, &k, p))
        .collect();
    let mut sorted = per_iteration.clone();
    sorted.sort_by(f64::total_cmp);
    let a = 1.0 - level;
    Ok(QuantileEstimate {
        p,
        point: sorted_quantile(&sorted, 0.5),
        lower: sorted_quantile(&sorted, a / 2.0),
        upper: sorted_quantile(&sorted, 1.0 - a / 2.0),
        per_iteration,
    })
}

/// Conditional predictive ordinates, one per observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpoVector {
    pub values: Vec<f64>,
    /// Observations with a zero predictive in some iteration; their CPO is 0.
    pub zero_density: Vec<usize>,
}

impl CpoVector {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn median(&self) -> f64 {
        sample_quantile(&self.values, 0.5)
    }

    pub fn log_pseudo_marginal(&self) -> f64 {
        self.values.iter().map(|v| v.ln()).sum()
    }
}

/// Harmonic-mean estimate `CPO_i = (T⁻¹ Σ_t 1/f_t(x_i))⁻¹`, where `f_t` is
/// the iteration-`t` mixture probability of observation `i` (a density for
/// exact data, a censoring probability otherwise).
///
/// The inner sum runs in log space over sorted terms, so it does not depend
/// on the order of the iterations.
pub fn cpo(trace: &ChainTrace, data: &[Observation]) -> Result<CpoVector> {
    if trace.is_empty() {
        return Err(Error::invalid("trace has no kept iterations"));
    }
    let k = trace.kernel;
    let t = trace.len() as f64;
    let per_obs: Vec<Option<f64>> = data
        .par_iter()
        .map(|obs| {
            let mut neg_ln_f: Vec<f64> = trace
                .rows
                .iter()
                .map(|r| {
                    let terms: Vec<f64> = r
                        .weights
                        .iter()
                        .zip(&r.atoms)
                        .map(|(w, a)| w.ln() + observation_loglik(obs, &k, a))
                        .collect();
                    -log_sum_exp(&terms)
                })
                .collect();
            if neg_ln_f.iter().any(|v| *v == f64::INFINITY || v.is_nan()) {
                return None;
            }
            neg_ln_f.sort_by(f64::total_cmp);
            Some((-(log_sum_exp(&neg_ln_f) - t.ln())).exp())
        })
        .collect();
    let zero_density = per_obs
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_none())
        .map(|(i, _)| i)
        .collect();
    Ok(CpoVector {
        values: per_obs.into_iter().map(|v| v.unwrap_or(0.0)).collect(),
        zero_density,
    })
}

/// Trapezoid integral of `y` over `x`.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}
