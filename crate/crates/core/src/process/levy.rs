use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::NggParams;
use crate::error::{Error, Result};
use crate::special::{ln_gamma, upper_gamma_neg};

/// Saturation value for the tail mass near the origin.
pub const TAIL_MASS_CAP: f64 = 1e300;

/// Default relative tolerance of [`invert_tail_mass`]: `|N(J) − ξ| ≤ tol·ξ`.
pub const INVERSION_TOL: f64 = 1e-9;

/// Jumps below this are numerically zero and end a simulated series.
const MIN_JUMP: f64 = 1e-300;
const LN_MIN_JUMP: f64 = -690.7755278982137;
const LN_MAX_JUMP: f64 = 690.7755278982137;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Tail mass together with a flag telling whether it hit [`TAIL_MASS_CAP`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailMassEval {
    pub value: f64,
    pub saturated: bool,
}

/// Decreasing Ferguson–Klass jumps of the tilted intensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpSeries {
    jumps: Vec<f64>,
    tilt: f64,
}

impl JumpSeries {
    /// Builds a series, checking positivity and strict decrease.
    pub fn new(jumps: Vec<f64>, tilt: f64) -> Result<Self> {
        if !(tilt.is_finite() && tilt >= 0.0) {
            return Err(Error::invalid(format!(
                "tilt must be non-negative, got {tilt}"
            )));
        }
        if jumps.iter().any(|j| !(j.is_finite() && *j > 0.0)) {
            return Err(Error::invalid("jumps must be positive and finite"));
        }
        if jumps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid("jumps must be strictly decreasing"));
        }
        Ok(Self { jumps, tilt })
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    /// Sum of the retained jumps.
    pub fn total(&self) -> f64 {
        self.jumps.iter().sum()
    }

    /// Smallest retained jump, `J_Q`.
    pub fn last(&self) -> Option<f64> {
        self.jumps.last().copied()
    }

    pub fn into_jumps(self) -> Vec<f64> {
        self.jumps
    }
}

/// Density of the tilted Lévy intensity, `α e^{−(κ+u)v} v^{−1−γ} / Γ(1−γ)`.
pub fn levy_density(v: f64, p: &NggParams, u: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    ln_levy_density(v, p, u).exp()
}

fn ln_levy_density(v: f64, p: &NggParams, u: f64) -> f64 {
    p.ln_scale() - p.tilted_rate(u) * v - (1.0 + p.gamma()) * v.ln()
}

/// `ln N(v)` without saturation; `+∞` at the origin, `−∞` once it underflows.
fn ln_tail_mass(v: f64, p: &NggParams, u: f64) -> f64 {
    if v <= 0.0 {
        return f64::INFINITY;
    }
    if v == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    let rate = p.tilted_rate(u);
    let g = p.gamma();
    if rate > 0.0 {
        p.ln_scale() + g * rate.ln() + upper_gamma_neg(g, rate * v).ln()
    } else {
        // κ + u = 0 forces γ > 0: N(v) = α v^{−γ} / (γ Γ(1−γ))
        p.ln_scale() - g * v.ln() - g.ln()
    }
}

/// Tail mass `N(v) = ∫_v^∞ ν_u(x) dx` of the intensity tilted by `u`, with a
/// saturation flag.
pub fn levy_tail_mass_eval(v: f64, p: &NggParams, u: f64) -> TailMassEval {
    let ln_n = ln_tail_mass(v, p, u);
    if ln_n.is_nan() {
        return TailMassEval {
            value: f64::NAN,
            saturated: false,
        };
    }
    let value = ln_n.exp();
    if value >= TAIL_MASS_CAP {
        TailMassEval {
            value: TAIL_MASS_CAP,
            saturated: true,
        }
    } else {
        TailMassEval {
            value,
            saturated: false,
        }
    }
}

/// Tail mass `N(v)`, saturated at [`TAIL_MASS_CAP`] near the origin.
pub fn levy_tail_mass(v: f64, p: &NggParams, u: f64) -> f64 {
    levy_tail_mass_eval(v, p, u).value
}

/// Solves `N(J) = ξ` for `J`, to relative tolerance [`INVERSION_TOL`] on `N`.
pub fn invert_tail_mass(xi: f64, p: &NggParams, u: f64) -> Result<f64> {
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::invalid(format!("xi must be positive, got {xi}")));
    }
    p.check_tilt(u)?;
    invert_from(xi, p, u, initial_guess(xi, p, u), f64::INFINITY)
}

/// Log-scale starting point from the small-jump asymptotics of `N`.
fn initial_guess(xi: f64, p: &NggParams, u: f64) -> f64 {
    let g = p.gamma();
    let y = if g > 0.0 {
        -(xi.ln() + g.ln() + ln_gamma(1.0 - g) - p.alpha().ln()) / g
    } else {
        -xi / p.alpha() - EULER_GAMMA - p.tilted_rate(u).ln()
    };
    y.clamp(LN_MIN_JUMP, LN_MAX_JUMP)
}

/// Safeguarded Newton iteration on `y = ln J` for `ln N(e^y) = ln ξ`,
/// restricted to jumps strictly below `cap`.
///
/// Newton steps that leave the current bracket fall back to bisection once
/// both sides are known, and to a doubling search for the missing side
/// otherwise.
fn invert_from(xi: f64, p: &NggParams, u: f64, guess: f64, cap: f64) -> Result<f64> {
    let target = xi.ln();
    let upper = cap.ln().min(LN_MAX_JUMP);
    // (ln N(e^y) − ln ξ, d ln N / d y) with d ln N / d ln v = −v ν(v) / N(v)
    let eval = |y: f64| {
        let v = y.exp();
        let ln_n = ln_tail_mass(v, p, u);
        (ln_n - target, -(ln_levy_density(v, p, u) + y - ln_n).exp())
    };

    let (mut lo, mut hi) = (LN_MIN_JUMP, upper);
    let (mut lo_known, mut hi_known) = (false, false);
    let mut step = 1.0;
    let mut y = guess.clamp(LN_MIN_JUMP, upper);
    for _ in 0..500 {
        let (fy, slope) = eval(y);
        if fy.abs() <= INVERSION_TOL * 0.5 {
            break;
        }
        if fy > 0.0 {
            if y >= upper {
                // N(cap) > ξ: only possible when the cap is the previous jump
                return Ok(prev_float(cap.min(LN_MAX_JUMP.exp())));
            }
            lo = y;
            lo_known = true;
        } else {
            if y <= LN_MIN_JUMP {
                return Err(Error::Bracket {
                    xi,
                    lo: MIN_JUMP,
                    hi: guess.exp(),
                });
            }
            hi = y;
            hi_known = true;
        }
        if lo_known && hi_known && hi - lo <= 4.0 * f64::EPSILON * y.abs().max(1.0) {
            break;
        }
        let newton = y - fy / slope;
        let inside = newton.is_finite() && newton > lo && newton < hi;
        y = if inside && (lo_known || newton > LN_MIN_JUMP) {
            newton
        } else if lo_known && hi_known {
            0.5 * (lo + hi)
        } else if lo_known {
            step *= 2.0;
            (lo + step).min(upper)
        } else {
            step *= 2.0;
            (hi - step).max(LN_MIN_JUMP)
        };
    }
    let jump = y.exp();
    if jump >= cap {
        Ok(prev_float(cap))
    } else {
        Ok(jump)
    }
}

fn prev_float(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    f64::from_bits(x.to_bits() - 1)
}

/// Incremental Ferguson–Klass generator: each call to [`JumpStream::next_jump`]
/// draws the next Poisson arrival and returns the next (smaller) jump.
pub(crate) struct JumpStream<'a> {
    params: &'a NggParams,
    tilt: f64,
    xi: f64,
    cap: f64,
    guess: Option<f64>,
    exhausted: bool,
}

impl<'a> JumpStream<'a> {
    pub(crate) fn new(params: &'a NggParams, tilt: f64) -> Self {
        Self {
            params,
            tilt,
            xi: 0.0,
            cap: f64::INFINITY,
            guess: None,
            exhausted: false,
        }
    }

    /// `Ok(None)` once jumps drop below the representable range.
    pub(crate) fn next_jump<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Option<f64>> {
        if self.exhausted {
            return Ok(None);
        }
        let e: f64 = rng.sample(Exp1);
        self.xi += e;
        let (p, u, xi) = (self.params, self.tilt, self.xi);
        let start = self.guess.unwrap_or_else(|| initial_guess(xi, p, u));
        let jump = match invert_from(xi, p, u, start, self.cap) {
            Ok(j) => j,
            Err(Error::Bracket { .. }) if self.guess.is_some() => {
                self.exhausted = true;
                return Ok(None);
            }
            Err(e) => return Err(e),
        };
        if jump < MIN_JUMP {
            self.exhausted = true;
            return Ok(None);
        }
        self.cap = jump;
        self.guess = Some(jump.ln());
        Ok(Some(jump))
    }
}

/// Simulates the `q` largest jumps of the tilted process by inverting the
/// arrival times of a unit-rate Poisson process through `N`.
///
/// Jumps are strictly decreasing. Jumps that would fall below `1e-300` are
/// numerically zero, so the series stops there and may be shorter than `q`.
pub fn sample_unfixed_jumps<R: Rng + ?Sized>(
    p: &NggParams,
    u: f64,
    q: usize,
    rng: &mut R,
) -> Result<JumpSeries> {
    if q == 0 {
        return Err(Error::invalid("number of jumps must be at least 1"));
    }
    p.check_tilt(u)?;
    let mut stream = JumpStream::new(p, u);
    let mut jumps = Vec::with_capacity(q);
    while jumps.len() < q {
        match stream.next_jump(rng)? {
            Some(j) => jumps.push(j),
            None => break,
        }
    }
    Ok(JumpSeries { jumps, tilt: u })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tail_vanishes_at_infinity() {
        let p = NggParams::new(1.0, 1.0, 0.4).unwrap();
        assert_eq!(levy_tail_mass(f64::INFINITY, &p, 0.0), 0.0);
        assert_eq!(levy_tail_mass(1e4, &p, 0.0), 0.0);
    }

    #[test]
    fn saturates_at_origin() {
        let p = NggParams::new(1.0, 1.0, 0.95).unwrap();
        let eval = levy_tail_mass_eval(1e-320, &p, 0.0);
        assert!(eval.saturated);
        assert_eq!(eval.value, TAIL_MASS_CAP);
        assert_eq!(levy_tail_mass(0.0, &p, 0.0), TAIL_MASS_CAP);
    }

    #[test]
    fn stable_without_tilt_has_power_tail() {
        let p = NggParams::stable(0.5).unwrap();
        // α v^{−γ}/(γ Γ(1−γ)) with Γ(1/2) = √π
        let expected = 1.0 / (0.5 * std::f64::consts::PI.sqrt()) / 2.0;
        assert!((levy_tail_mass(4.0, &p, 0.0) - expected).abs() < 1e-14);
    }

    #[test]
    fn inversion_rejects_bad_xi() {
        let p = NggParams::dirichlet(1.0).unwrap();
        assert!(invert_tail_mass(0.0, &p, 0.0).is_err());
        assert!(invert_tail_mass(f64::NAN, &p, 0.0).is_err());
    }

    #[test]
    fn dirichlet_series_stops_before_underflow() {
        let p = NggParams::dirichlet(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sample_unfixed_jumps(&p, 0.0, 5000, &mut rng).unwrap();
        assert!(s.len() < 5000 && s.len() > 500, "len {}", s.len());
        assert!(s.last().unwrap() >= MIN_JUMP);
    }
}
