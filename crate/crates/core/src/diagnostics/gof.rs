use serde::{Deserialize, Serialize};

use super::turnbull::{turnbull, TurnbullEstimate};
use crate::error::{Error, Result};
use crate::model::{KernelSpec, Observation, Support};
use crate::posterior::cdf_estimate;
use crate::sampler::ChainTrace;

/// EM settings for the empirical side of the tables.
const TURNBULL_TOL: f64 = 1e-10;
const TURNBULL_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpPoint {
    pub x: f64,
    pub empirical: f64,
    pub model: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QqPoint {
    pub p: f64,
    pub empirical: f64,
    pub model: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofTables {
    pub pp: Vec<PpPoint>,
    pub qq: Vec<QqPoint>,
    /// Iterations of the thinned chain used for the model CDF.
    pub iterations_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlayPoint {
    pub x: f64,
    pub empirical: f64,
    pub model: f64,
    pub lower: f64,
    pub upper: f64,
}

fn mean_cdf(trace: &ChainTrace, x: f64) -> f64 {
    trace
        .rows
        .iter()
        .map(|r| r.cdf(x, &trace.kernel))
        .sum::<f64>()
        / trace.rows.len() as f64
}

/// Posterior mean CDF and density at `x`.
fn mean_cdf_density(trace: &ChainTrace, x: f64) -> (f64, f64) {
    let (mut f, mut d) = (0.0, 0.0);
    for r in &trace.rows {
        f += r.cdf(x, &trace.kernel);
        d += r.density(x, &trace.kernel);
    }
    let n = trace.rows.len() as f64;
    (f / n, d / n)
}

/// `x` with `F̄(x) = p` for the posterior mean CDF `F̄` of the trace,
/// starting the bracket search at `hint`.
pub fn invert_mean_cdf(trace: &ChainTrace, p: f64, hint: f64) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::invalid("trace has no kept iterations"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!(
            "probability must lie in (0, 1), got {p}"
        )));
    }
    invert(|x| mean_cdf_density(trace, x), &trace.kernel, p, hint)
}

/// Safeguarded Newton on a CDF given with its density, started at `hint`.
/// Every evaluation narrows a bracket; steps leaving it, or not halving the
/// error, are replaced by bisection or, while the bracket is open, by a
/// doubling step outwards.
fn invert<F: Fn(f64) -> (f64, f64)>(fd: F, kernel: &KernelSpec, p: f64, hint: f64) -> Result<f64> {
    let (mut lo, mut hi, default) = match kernel.support() {
        Support::Real => (f64::NEG_INFINITY, f64::INFINITY, 0.0),
        Support::Positive => (0.0, f64::INFINITY, 1.0),
        Support::UnitInterval => (0.0, 1.0, 0.5),
    };
    let mut x = if hint > lo && hint < hi && hint.is_finite() {
        hint
    } else {
        default
    };
    let mut step = x.abs().max(1.0);
    let mut last_err = f64::INFINITY;
    for _ in 0..1000 {
        let (fx, dx) = fd(x);
        let err = fx - p;
        if err.abs() <= 1e-12 {
            return Ok(x);
        }
        if err < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let closed = lo.is_finite() && hi.is_finite();
        if closed && hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            return Ok(x);
        }
        let newton = x - err / dx;
        let newton_ok =
            dx > 0.0 && newton > lo && newton < hi && (err.abs() < 0.5 * last_err || !closed);
        last_err = err.abs();
        x = if newton_ok {
            newton
        } else if closed {
            0.5 * (lo + hi)
        } else if err < 0.0 {
            step *= 2.0;
            x + step
        } else if lo.is_finite() {
            0.5 * (lo + x)
        } else {
            step *= 2.0;
            x - step
        };
        if !x.is_finite() {
            break;
        }
    }
    if lo.is_finite() && hi.is_finite() {
        Ok(0.5 * (lo + hi))
    } else {
        Err(Error::invalid(format!(
            "could not bracket model quantile at p = {p}"
        )))
    }
}

/// Percentile-percentile and quantile-quantile tables of the data against the
/// posterior mean CDF computed on the chain thinned by `thin`.
///
/// The empirical side is the Turnbull estimate, which is the ordinary
/// empirical CDF when nothing is censored. Points sit at the finite right
/// ends of the Turnbull support; QQ probabilities are the mid-steps
/// `(F(x−) + F(x)) / 2`.
pub fn gof_data(trace: &ChainTrace, data: &[Observation], thin: usize) -> Result<GofTables> {
    let thinned = trace.thinned(thin)?;
    if thinned.is_empty() {
        return Err(Error::invalid("thinned trace has no iterations"));
    }
    let est = turnbull(data, TURNBULL_TOL, TURNBULL_MAX_ITER)?;
    let support = support_points(&est);
    let mut pp = Vec::with_capacity(support.len());
    let mut qq = Vec::with_capacity(support.len());
    for &x in &support {
        let empirical = est.cdf(x);
        pp.push(PpPoint {
            x,
            empirical,
            model: mean_cdf(&thinned, x),
        });
        let p = 0.5 * (est.cdf_left(x) + empirical);
        if p > 0.0 && p < 1.0 {
            let model = invert(|y| mean_cdf_density(&thinned, y), &thinned.kernel, p, x)?;
            qq.push(QqPoint {
                p,
                empirical: x,
                model,
            });
        }
    }
    Ok(GofTables {
        pp,
        qq,
        iterations_used: thinned.len(),
    })
}

fn support_points(est: &TurnbullEstimate) -> Vec<f64> {
    let mut xs: Vec<f64> = est
        .intervals
        .iter()
        .map(|iv| iv.right)
        .filter(|x| x.is_finite())
        .collect();
    xs.dedup();
    xs
}

/// Empirical (Turnbull) CDF next to the posterior mean CDF and its pointwise
/// band on a grid.
pub fn cdf_overlay(
    trace: &ChainTrace,
    data: &[Observation],
    grid: &[f64],
    level: f64,
) -> Result<Vec<OverlayPoint>> {
    let est = turnbull(data, TURNBULL_TOL, TURNBULL_MAX_ITER)?;
    let model = cdf_estimate(trace, grid, level)?;
    Ok(grid
        .iter()
        .enumerate()
        .map(|(i, &x)| OverlayPoint {
            x,
            empirical: est.cdf(x),
            model: model.mean[i],
            lower: model.lower[i],
            upper: model.upper[i],
        })
        .collect())
}
