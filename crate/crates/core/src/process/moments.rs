use super::{JumpSeries, NggParams};
use crate::error::{Error, Result};
use crate::special::{gamma_p, ln_gamma};

/// Highest supported moment order.
pub const MAX_MOMENT_ORDER: usize = 10;

/// `k`-th cumulant of the total mass under tilt `u`:
/// `∫ v^k ν_u(dv) = α Γ(k−γ) (κ+u)^{γ−k} / Γ(1−γ)`.
pub fn cumulant(k: usize, p: &NggParams, u: f64) -> Result<f64> {
    p.check_tilt(u)?;
    let rate = p.tilted_rate(u);
    if k == 0 || k > MAX_MOMENT_ORDER || rate <= 0.0 {
        return Err(Error::MomentUnavailable(k));
    }
    let k = k as f64;
    let g = p.gamma();
    Ok((p.ln_scale() + ln_gamma(k - g) + (g - k) * rate.ln()).exp())
}

/// Raw moments `m_1..m_K` from cumulants `c_1..c_K` via
/// `m_n = Σ_{k=1}^{n} C(n−1, k−1) c_k m_{n−k}`.
pub fn moments_from_cumulants(cumulants: &[f64]) -> Vec<f64> {
    let order = cumulants.len();
    let mut m = vec![1.0; order + 1];
    for n in 1..=order {
        let mut acc = 0.0;
        let mut binom = 1.0; // C(n−1, k−1)
        for k in 1..=n {
            acc += binom * cumulants[k - 1] * m[n - k];
            binom = binom * (n - k) as f64 / k as f64;
        }
        m[n] = acc;
    }
    m.remove(0);
    m
}

/// `m`-th raw moment of the total mass `Σ J_i` of the process tilted by `u`.
pub fn total_mass_moment(m: usize, p: &NggParams, u: f64) -> Result<f64> {
    if m == 0 || m > MAX_MOMENT_ORDER {
        return Err(Error::MomentUnavailable(m));
    }
    Ok(exact_moments(m, p, u)?[m - 1])
}

fn exact_moments(order: usize, p: &NggParams, u: f64) -> Result<Vec<f64>> {
    let cumulants = (1..=order)
        .map(|k| cumulant(k, p, u))
        .collect::<Result<Vec<_>>>()?;
    Ok(moments_from_cumulants(&cumulants))
}

/// `k`-th cumulant of the mass left out below `level`:
/// `∫_0^level v^k ν_u(dv)`.
pub fn remainder_cumulant(k: usize, level: f64, p: &NggParams, u: f64) -> f64 {
    debug_assert!(k >= 1);
    if level <= 0.0 {
        return 0.0;
    }
    let rate = p.tilted_rate(u);
    let g = p.gamma();
    let s = k as f64 - g;
    if rate > 0.0 {
        let full = (p.ln_scale() + ln_gamma(s) - s * rate.ln()).exp();
        full * gamma_p(s, rate * level)
    } else {
        (p.ln_scale() + s * level.ln()).exp() / s
    }
}

/// Plain Monte Carlo moments `mean(T^k)`, `k = 1..=order`, of the truncated
/// sums `T` of the replicates.
pub fn empirical_moments(replicates: &[JumpSeries], order: usize) -> Vec<f64> {
    let n = replicates.len() as f64;
    let mut out = vec![0.0; order];
    for series in replicates {
        let t = series.total();
        let mut pow = 1.0;
        for slot in out.iter_mut() {
            pow *= t;
            *slot += pow;
        }
    }
    out.iter().map(|s| s / n).collect()
}

/// Estimates of `E[T_Q^k]`, `k = 1..=order`, for truncated sums `T_Q`.
///
/// Given the smallest retained jump `J_Q`, the discarded part is an
/// independent process restricted to `(0, J_Q)` with known cumulants, so
/// `E[(T+R)^k | T, J_Q] − T^k` is available in closed form. Averaging that
/// deficit over replicates and subtracting it from the exact moment gives an
/// unbiased estimate whose error scales with the truncation error itself.
pub fn truncated_moment_estimates(
    replicates: &[JumpSeries],
    p: &NggParams,
    order: usize,
) -> Result<Vec<f64>> {
    let (exact, deficits) = moment_deficits(replicates, p, order)?;
    Ok(exact.iter().zip(&deficits).map(|(m, d)| m - d).collect())
}

fn moment_deficits(
    replicates: &[JumpSeries],
    p: &NggParams,
    order: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let first = replicates
        .first()
        .ok_or_else(|| Error::invalid("at least one replicate series is required"))?;
    let u = first.tilt();
    if replicates.iter().any(|s| s.tilt() != u || s.is_empty()) {
        return Err(Error::invalid(
            "replicates must be nonempty and share one tilt",
        ));
    }
    if order == 0 || order > MAX_MOMENT_ORDER {
        return Err(Error::MomentUnavailable(order));
    }
    let exact = exact_moments(order, p, u)?;
    let sums: Vec<(f64, f64)> = replicates
        .iter()
        .map(|s| (s.total(), s.last().unwrap_or(0.0)))
        .collect();
    let deficits = mean_deficits(&sums, p, u, order);
    Ok((exact, deficits))
}

/// Average conditional moment deficits for `(truncated sum, last jump)` pairs.
pub(crate) fn mean_deficits(sums: &[(f64, f64)], p: &NggParams, u: f64, order: usize) -> Vec<f64> {
    let mut acc = vec![0.0; order];
    let mut rem_cum = vec![0.0; order];
    for &(total, last) in sums {
        for (k, c) in rem_cum.iter_mut().enumerate() {
            *c = remainder_cumulant(k + 1, last, p, u);
        }
        let rem = moments_from_cumulants(&rem_cum);
        for (k, slot) in acc.iter_mut().enumerate() {
            let order_k = k + 1;
            // Σ_{i=1}^{k} C(k, i) T^{k−i} E[R^i]
            let mut binom = 1.0;
            let mut d = 0.0;
            for i in 1..=order_k {
                binom = binom * (order_k - i + 1) as f64 / i as f64;
                d += binom * total.powi((order_k - i) as i32) * rem[i - 1];
            }
            *slot += d;
        }
    }
    let n = sums.len() as f64;
    acc.iter().map(|a| a / n).collect()
}

/// Moment-matching error `ℓ = max_k |m̂_k − m_k| / m_k` of replicated
/// truncated series against the exact moments of the full total mass, using
/// the first `order` moments.
pub fn moment_match_index(replicates: &[JumpSeries], p: &NggParams, order: usize) -> Result<f64> {
    let (exact, deficits) = moment_deficits(replicates, p, order)?;
    let estimates: Vec<f64> = exact.iter().zip(&deficits).map(|(m, d)| m - d).collect();
    Ok(moment_match_index_from(&estimates, &exact))
}

/// `max_k |empirical_k − exact_k| / exact_k`.
pub fn moment_match_index_from(empirical: &[f64], exact: &[f64]) -> f64 {
    empirical
        .iter()
        .zip(exact)
        .map(|(e, m)| ((e - m) / m).abs())
        .fold(0.0, f64::max)
}
