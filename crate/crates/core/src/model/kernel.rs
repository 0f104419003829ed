use std::f64::consts::{LN_2, PI};

use libm::erfc;
use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, ln_beta};

use crate::error::{Error, Result};
use crate::model::Observation;
use crate::special::{gamma_p, gamma_q, ln_diff_exp, ln_gamma};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Kernel families, all indexed by a location-like `μ` and a scale-like `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Normal,
    /// Laplace with location `μ` and scale `b = σ`.
    DoubleExponential,
    /// Mean `μ`, standard deviation `σ`: shape `μ²/σ²`, rate `μ/σ²`.
    Gamma,
    /// `ln X ~ N(μ, σ²)`.
    Lognormal,
    /// Mean `μ ∈ (0,1)`, `σ` the inverse concentration: `a = μ/σ`, `b = (1−μ)/σ`.
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    Real,
    Positive,
    UnitInterval,
}

impl Support {
    /// Whether `x` lies in the open support.
    pub fn contains(&self, x: f64) -> bool {
        match self {
            Support::Real => x.is_finite(),
            Support::Positive => x > 0.0 && x.is_finite(),
            Support::UnitInterval => x > 0.0 && x < 1.0,
        }
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(Self::Normal),
            "laplace" | "double_exponential" | "double-exponential" => Ok(Self::DoubleExponential),
            "gamma" => Ok(Self::Gamma),
            "lognormal" => Ok(Self::Lognormal),
            "beta" => Ok(Self::Beta),
            other => Err(Error::invalid(format!("unknown kernel family `{other}`"))),
        }
    }
}

/// Location-scale pair `θ = (μ, σ)` of one mixture component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomParams {
    pub mu: f64,
    pub sigma: f64,
}

impl AtomParams {
    pub fn new(mu: f64, sigma: f64) -> Self {
        Self { mu, sigma }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
}

impl KernelSpec {
    pub fn new(family: KernelFamily) -> Self {
        Self { family }
    }

    pub fn support(&self) -> Support {
        match self.family {
            KernelFamily::Normal | KernelFamily::DoubleExponential => Support::Real,
            KernelFamily::Gamma | KernelFamily::Lognormal => Support::Positive,
            KernelFamily::Beta => Support::UnitInterval,
        }
    }

    /// Whether `(μ, σ)` indexes a proper kernel. Invalid atoms have zero
    /// density everywhere rather than being an error.
    pub fn valid_atom(&self, a: &AtomParams) -> bool {
        if !(a.sigma > 0.0 && a.sigma.is_finite() && a.mu.is_finite()) {
            return false;
        }
        match self.family {
            KernelFamily::Gamma => a.mu > 0.0,
            KernelFamily::Beta => a.mu > 0.0 && a.mu < 1.0,
            _ => true,
        }
    }

    /// Natural parameters of the family: `(μ, σ)` for normal and lognormal,
    /// `(μ, b)` for Laplace, `(shape, rate)` for gamma, `(a, b)` for beta.
    pub fn to_natural(&self, a: &AtomParams) -> (f64, f64) {
        let (m, s) = (a.mu, a.sigma);
        match self.family {
            KernelFamily::Normal | KernelFamily::DoubleExponential | KernelFamily::Lognormal => {
                (m, s)
            }
            KernelFamily::Gamma => (m * m / (s * s), m / (s * s)),
            KernelFamily::Beta => (m / s, (1.0 - m) / s),
        }
    }

    /// Inverse of [`KernelSpec::to_natural`].
    pub fn from_natural(&self, p1: f64, p2: f64) -> AtomParams {
        match self.family {
            KernelFamily::Normal | KernelFamily::DoubleExponential | KernelFamily::Lognormal => {
                AtomParams::new(p1, p2)
            }
            KernelFamily::Gamma => AtomParams::new(p1 / p2, p1.sqrt() / p2),
            KernelFamily::Beta => AtomParams::new(p1 / (p1 + p2), 1.0 / (p1 + p2)),
        }
    }

    /// `ln k(x | μ, σ)`; `−∞` outside the support or for invalid atoms.
    pub fn ln_density(&self, x: f64, a: &AtomParams) -> f64 {
        if x.is_nan() || !self.support().contains(x) || !self.valid_atom(a) {
            return f64::NEG_INFINITY;
        }
        let (m, s) = (a.mu, a.sigma);
        match self.family {
            KernelFamily::Normal => {
                let z = (x - m) / s;
                -0.5 * z * z - s.ln() - LN_SQRT_2PI
            }
            KernelFamily::DoubleExponential => -(x - m).abs() / s - (2.0 * s).ln(),
            KernelFamily::Lognormal => {
                let lx = x.ln();
                let z = (lx - m) / s;
                -0.5 * z * z - s.ln() - LN_SQRT_2PI - lx
            }
            KernelFamily::Gamma => {
                let (k, rate) = self.to_natural(a);
                k * rate.ln() - ln_gamma(k) + (k - 1.0) * x.ln() - rate * x
            }
            KernelFamily::Beta => {
                let (p, q) = self.to_natural(a);
                (p - 1.0) * x.ln() + (q - 1.0) * (-x).ln_1p() - ln_beta(p, q)
            }
        }
    }

    pub fn density(&self, x: f64, a: &AtomParams) -> f64 {
        self.ln_density(x, a).exp()
    }

    /// `ln F(x | μ, σ)`.
    pub fn ln_cdf(&self, x: f64, a: &AtomParams) -> f64 {
        if x.is_nan() || !self.valid_atom(a) {
            return f64::NEG_INFINITY;
        }
        let (m, s) = (a.mu, a.sigma);
        match self.family {
            KernelFamily::Normal => ln_norm_cdf((x - m) / s),
            KernelFamily::DoubleExponential => {
                let z = (x - m) / s;
                if z <= 0.0 {
                    z - LN_2
                } else {
                    (-0.5 * (-z).exp()).ln_1p()
                }
            }
            KernelFamily::Lognormal => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    ln_norm_cdf((x.ln() - m) / s)
                }
            }
            KernelFamily::Gamma => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let (k, rate) = self.to_natural(a);
                gamma_p(k, rate * x).ln()
            }
            KernelFamily::Beta => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                if x >= 1.0 {
                    return 0.0;
                }
                let (p, q) = self.to_natural(a);
                beta_reg(p, q, x).ln()
            }
        }
    }

    /// `ln(1 − F(x | μ, σ))`.
    pub fn ln_sf(&self, x: f64, a: &AtomParams) -> f64 {
        if x.is_nan() || !self.valid_atom(a) {
            return f64::NEG_INFINITY;
        }
        let (m, s) = (a.mu, a.sigma);
        match self.family {
            KernelFamily::Normal => ln_norm_cdf(-(x - m) / s),
            KernelFamily::DoubleExponential => {
                let z = (x - m) / s;
                if z >= 0.0 {
                    -z - LN_2
                } else {
                    (-0.5 * z.exp()).ln_1p()
                }
            }
            KernelFamily::Lognormal => {
                if x <= 0.0 {
                    0.0
                } else {
                    ln_norm_cdf(-(x.ln() - m) / s)
                }
            }
            KernelFamily::Gamma => {
                if x <= 0.0 {
                    return 0.0;
                }
                let (k, rate) = self.to_natural(a);
                gamma_q(k, rate * x).ln()
            }
            KernelFamily::Beta => {
                if x <= 0.0 {
                    return 0.0;
                }
                if x >= 1.0 {
                    return f64::NEG_INFINITY;
                }
                let (p, q) = self.to_natural(a);
                beta_reg(q, p, 1.0 - x).ln()
            }
        }
    }

    pub fn cdf(&self, x: f64, a: &AtomParams) -> f64 {
        if x.is_nan() || !self.valid_atom(a) {
            return 0.0;
        }
        let (m, s) = (a.mu, a.sigma);
        match self.family {
            KernelFamily::Normal => 0.5 * erfc(-(x - m) / (s * std::f64::consts::SQRT_2)),
            KernelFamily::DoubleExponential => {
                let z = (x - m) / s;
                if z <= 0.0 {
                    0.5 * z.exp()
                } else {
                    1.0 - 0.5 * (-z).exp()
                }
            }
            KernelFamily::Lognormal if x > 0.0 => {
                0.5 * erfc(-(x.ln() - m) / (s * std::f64::consts::SQRT_2))
            }
            KernelFamily::Gamma if x > 0.0 => {
                let (k, rate) = self.to_natural(a);
                gamma_p(k, rate * x)
            }
            _ => self.ln_cdf(x, a).exp(),
        }
    }

    /// `ln P(l < X ≤ r)`, subtracting on the survival side when `l` is past
    /// the median so that upper-tail intervals keep their precision.
    pub fn ln_interval_prob(&self, l: f64, r: f64, a: &AtomParams) -> f64 {
        if r <= l {
            return f64::NEG_INFINITY;
        }
        let ln_fl = self.ln_cdf(l, a);
        if ln_fl > -LN_2 {
            ln_diff_exp(self.ln_sf(l, a), self.ln_sf(r, a))
        } else {
            ln_diff_exp(self.ln_cdf(r, a), ln_fl)
        }
    }
}

/// `ln Φ(z)`, with the asymptotic series once `erfc` underflows.
pub fn ln_norm_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z > 5.0 {
        return (-0.5 * erfc(z / std::f64::consts::SQRT_2)).ln_1p();
    }
    if z > -37.0 {
        return (0.5 * erfc(-z / std::f64::consts::SQRT_2)).ln();
    }
    if z == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let z2 = z * z;
    let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
    -0.5 * z2 - (-z).ln() - 0.5 * (2.0 * PI).ln() + series.ln()
}

pub fn kernel_density(x: f64, k: &KernelSpec, a: &AtomParams) -> f64 {
    k.density(x, a)
}

pub fn kernel_cdf(x: f64, k: &KernelSpec, a: &AtomParams) -> f64 {
    k.cdf(x, a)
}

/// Log-likelihood contribution of one observation under one component:
/// log density for exact data, log probability of the censoring set otherwise.
pub fn observation_loglik(obs: &Observation, k: &KernelSpec, a: &AtomParams) -> f64 {
    match *obs {
        Observation::Exact { value } => k.ln_density(value, a),
        Observation::Interval { left, right } if left == right => k.ln_density(left, a),
        Observation::Interval { left, right } => k.ln_interval_prob(left, right, a),
        Observation::LeftCensored { right } => {
            if right == f64::INFINITY {
                if k.valid_atom(a) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                k.ln_cdf(right, a)
            }
        }
        Observation::RightCensored { left } => {
            if left == f64::NEG_INFINITY {
                if k.valid_atom(a) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                k.ln_sf(left, a)
            }
        }
    }
}

fn check_mixture(weights: &[f64], atoms: &[AtomParams]) -> Result<()> {
    if weights.len() != atoms.len() {
        return Err(Error::invalid(format!(
            "{} weights for {} atoms",
            weights.len(),
            atoms.len()
        )));
    }
    Ok(())
}

/// `Σ_j w_j k(x | θ_j)`.
pub fn mixture_density(
    x: f64,
    weights: &[f64],
    atoms: &[AtomParams],
    k: &KernelSpec,
) -> Result<f64> {
    check_mixture(weights, atoms)?;
    Ok(weights
        .iter()
        .zip(atoms)
        .map(|(w, a)| w * k.density(x, a))
        .sum())
}

/// `Σ_j w_j F(x | θ_j)`.
pub fn mixture_cdf(x: f64, weights: &[f64], atoms: &[AtomParams], k: &KernelSpec) -> Result<f64> {
    check_mixture(weights, atoms)?;
    Ok(weights
        .iter()
        .zip(atoms)
        .map(|(w, a)| w * k.cdf(x, a))
        .sum::<f64>()
        .min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [KernelFamily; 5] = [
        KernelFamily::Normal,
        KernelFamily::DoubleExponential,
        KernelFamily::Gamma,
        KernelFamily::Lognormal,
        KernelFamily::Beta,
    ];

    #[test]
    fn direct_cdf_matches_log_cdf() {
        let a = AtomParams::new(0.3, 1.7);
        for family in [
            KernelFamily::Normal,
            KernelFamily::DoubleExponential,
            KernelFamily::Lognormal,
            KernelFamily::Gamma,
        ] {
            let k = KernelSpec::new(family);
            for x in [-3.0, -0.2, 0.05, 0.9, 2.5, 8.0] {
                let (d, l) = (k.cdf(x, &a), k.ln_cdf(x, &a).exp());
                assert!((d - l).abs() <= 1e-14 + 1e-12 * l, "{family:?} {x} {d} {l}");
            }
        }
    }

    #[test]
    fn natural_maps_are_inverse() {
        let atoms = [AtomParams::new(0.3, 0.2), AtomParams::new(0.7, 0.05)];
        for f in ALL {
            let k = KernelSpec::new(f);
            for a in &atoms {
                let (p1, p2) = k.to_natural(a);
                let b = k.from_natural(p1, p2);
                assert!(
                    (a.mu - b.mu).abs() < 1e-12 && (a.sigma - b.sigma).abs() < 1e-12,
                    "{f:?}"
                );
            }
        }
    }

    #[test]
    fn modes_and_symmetry() {
        let a = AtomParams::new(0.0, 1.0);
        let n = KernelSpec::new(KernelFamily::Normal);
        assert!((n.density(0.0, &a) - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((n.cdf(0.0, &a) - 0.5).abs() < 1e-15);
        let l = KernelSpec::new(KernelFamily::DoubleExponential);
        assert_eq!(l.density(0.0, &a), 0.5);
    }

    #[test]
    fn normal_tails_do_not_underflow() {
        let v = ln_norm_cdf(-40.0);
        // ln φ(40) − ln 40 to leading order
        let lead = -800.0 - 40f64.ln() - LN_SQRT_2PI;
        assert!(v.is_finite() && (v - lead).abs() < 1e-3);
        let near = ln_norm_cdf(-36.9);
        let far = ln_norm_cdf(-37.1);
        assert!(near > far);
    }

    #[test]
    fn invalid_atoms_have_no_mass() {
        let g = KernelSpec::new(KernelFamily::Gamma);
        assert_eq!(g.density(1.0, &AtomParams::new(-1.0, 1.0)), 0.0);
        assert_eq!(g.density(-1.0, &AtomParams::new(1.0, 1.0)), 0.0);
        let b = KernelSpec::new(KernelFamily::Beta);
        assert_eq!(b.density(0.5, &AtomParams::new(1.2, 0.1)), 0.0);
    }

    #[test]
    fn mixture_length_mismatch() {
        let k = KernelSpec::new(KernelFamily::Normal);
        assert!(mixture_density(0.0, &[1.0], &[], &k).is_err());
    }
}
