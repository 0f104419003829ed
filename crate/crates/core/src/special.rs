//! Incomplete gamma integrals with a non-positive first argument.
//!
//! The tail mass of a generalized gamma intensity needs
//! `Γ(−γ, x) = ∫_x^∞ t^{−γ−1} e^{−t} dt` for `γ ∈ [0, 1)`. At `γ = 0` this is
//! the exponential integral `E₁(x)`. Positive-parameter incomplete gamma
//! functions come from `statrs`.

/// Split point between the power series and the continued fraction.
const SPLIT: f64 = 1.5;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// `Γ(−γ, x)` for `γ ∈ [0, 1)` and `x > 0`.
///
/// Returns `+∞` at `x = 0` and `0` once `e^{−x}` underflows.
pub fn upper_gamma_neg(gamma: f64, x: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&gamma));
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return f64::INFINITY;
    }
    if x >= SPLIT {
        continued_fraction(-gamma, x)
    } else {
        split_value(gamma) + head_integral(gamma, x, SPLIT)
    }
}

/// `Γ(−γ, SPLIT)`, remembered per thread for the last `γ` seen since the
/// sampler evaluates long runs of tail masses at one `γ`.
fn split_value(gamma: f64) -> f64 {
    use std::cell::Cell;
    thread_local! {
        static LAST: Cell<(u64, f64)> = const { Cell::new((u64::MAX, 0.0)) };
    }
    LAST.with(|last| {
        let (key, value) = last.get();
        if key == gamma.to_bits() {
            return value;
        }
        let value = continued_fraction(-gamma, SPLIT);
        last.set((gamma.to_bits(), value));
        value
    })
}

/// Exponential integral `E₁(x)`.
pub fn exp_integral_e1(x: f64) -> f64 {
    upper_gamma_neg(0.0, x)
}

/// Lentz evaluation of the Legendre continued fraction for `Γ(a, x)`.
/// Converges for `x > a + 1`; callers keep `x ≥ 1.5` and `a ≤ 0`.
fn continued_fraction(a: f64, x: f64) -> f64 {
    let log_prefactor = -x + a * x.ln();
    if log_prefactor < -745.0 {
        return 0.0;
    }
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let fi = i as f64;
        let an = -fi * (fi - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    log_prefactor.exp() * h
}

/// `∫_x^{x0} t^{−γ−1} e^{−t} dt` by termwise integration of the exponential
/// series, `Σ_k (−1)^k/k! · (x0^s − x^s)/s` with `s = k − γ`.
///
/// Terms with `|s| < 1/2` use `x^s·expm1(s·ln(x0/x))/s`, which stays accurate
/// as `s → 0` (the `γ = 0` and `γ → 1` edges); the rest reuse running powers.
fn head_integral(gamma: f64, x: f64, x0: f64) -> f64 {
    let log_x = x.ln();
    let log_ratio = x0.ln() - log_x;
    let mut x_pow = (-gamma * log_x).exp(); // x^{k−γ}
    let mut x0_pow = (-gamma * x0.ln()).exp(); // x0^{k−γ}
    let mut sum = 0.0;
    let mut coeff = 1.0; // (−1)^k / k!
    for k in 0..200 {
        let s = k as f64 - gamma;
        let power = if s == 0.0 {
            log_ratio
        } else if s.abs() < 0.5 {
            x_pow * (s * log_ratio).exp_m1() / s
        } else {
            (x0_pow - x_pow) / s
        };
        let term = coeff * power;
        sum += term;
        if k > 2 && (term.abs() < EPS * sum.abs() || sum.is_infinite()) {
            break;
        }
        coeff *= -1.0 / (k as f64 + 1.0);
        x_pow *= x;
        x0_pow *= x0;
    }
    sum
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `Γ(x)`.
pub fn gamma_fn(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    statrs::function::gamma::gamma_lr(a, x)
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    statrs::function::gamma::gamma_ur(a, x)
}

/// Stable `ln(e^a − e^b)` for `a ≥ b`.
pub fn ln_diff_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a <= b {
        return f64::NEG_INFINITY;
    }
    a + (-(b - a).exp_m1()).ln()
}

/// `ln Σ exp(x_i)`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
