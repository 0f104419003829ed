use rand::Rng;
use rand_distr::{Beta, Cauchy, Distribution, Gamma, LogNormal, Normal, StudentT, Uniform};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Gamma as GammaDist, Normal as NormalDist, StudentsT};
use statrs::function::beta::ln_beta;

use super::kernel::ln_norm_cdf;
use crate::error::{Error, Result};
use crate::special::{ln_diff_exp, ln_gamma};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Family of the base measure on component locations, with hyperparameters
/// `φ = (φ₁, φ₂)`: normal (mean, precision), gamma (shape, rate), or beta `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocationFamily {
    Normal,
    Gamma,
    Beta,
}

impl LocationFamily {
    pub fn ln_density(&self, mu: f64, phi: [f64; 2]) -> f64 {
        let [p1, p2] = phi;
        match self {
            LocationFamily::Normal => {
                let z = (mu - p1) * p2.sqrt();
                -0.5 * z * z + 0.5 * p2.ln() - LN_SQRT_2PI
            }
            LocationFamily::Gamma => {
                if mu <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                p1 * p2.ln() - ln_gamma(p1) + (p1 - 1.0) * mu.ln() - p2 * mu
            }
            LocationFamily::Beta => {
                if !(mu > 0.0 && mu < 1.0) {
                    return f64::NEG_INFINITY;
                }
                (p1 - 1.0) * mu.ln() + (p2 - 1.0) * (-mu).ln_1p() - ln_beta(p1, p2)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, phi: [f64; 2], rng: &mut R) -> f64 {
        let [p1, p2] = phi;
        match self {
            LocationFamily::Normal => {
                p1 + rng.sample::<f64, _>(rand_distr::StandardNormal) / p2.sqrt()
            }
            LocationFamily::Gamma => Gamma::new(p1, 1.0 / p2).expect("validated").sample(rng),
            LocationFamily::Beta => Beta::new(p1, p2).expect("validated").sample(rng),
        }
    }

    fn validate(&self, phi: [f64; 2]) -> Result<()> {
        let [p1, p2] = phi;
        let ok = match self {
            LocationFamily::Normal => p1.is_finite() && p2 > 0.0 && p2.is_finite(),
            _ => p1 > 0.0 && p2 > 0.0 && p1.is_finite() && p2.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "invalid {self:?} location hyperparameters {phi:?}"
            )))
        }
    }
}

/// Prior on component scales (fully nonparametric model) or on the common
/// scale (semiparametric model). Every family lives on `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ScalePrior {
    Gamma {
        shape: f64,
        rate: f64,
    },
    Lognormal {
        meanlog: f64,
        sdlog: f64,
    },
    HalfCauchy {
        scale: f64,
    },
    HalfNormal {
        scale: f64,
    },
    HalfStudentT {
        df: f64,
        scale: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    TruncatedNormal {
        mean: f64,
        sd: f64,
        lo: f64,
        hi: f64,
    },
}

fn positive(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{what} must be positive and finite, got {x}"
        )))
    }
}

impl ScalePrior {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ScalePrior::Gamma { shape, rate } => {
                positive(shape, "gamma shape")?;
                positive(rate, "gamma rate")
            }
            ScalePrior::Lognormal { meanlog, sdlog } => {
                if !meanlog.is_finite() {
                    return Err(Error::invalid("lognormal meanlog must be finite"));
                }
                positive(sdlog, "lognormal sdlog")
            }
            ScalePrior::HalfCauchy { scale } | ScalePrior::HalfNormal { scale } => {
                positive(scale, "scale")
            }
            ScalePrior::HalfStudentT { df, scale } => {
                positive(df, "degrees of freedom")?;
                positive(scale, "scale")
            }
            ScalePrior::Uniform { lo, hi } => check_bounds(lo, hi),
            ScalePrior::TruncatedNormal { mean, sd, lo, hi } => {
                if !mean.is_finite() {
                    return Err(Error::invalid("truncated-normal mean must be finite"));
                }
                positive(sd, "truncated-normal sd")?;
                if !(lo >= 0.0 && hi > lo) || lo.is_nan() {
                    return Err(Error::invalid(format!(
                        "truncation bounds need 0 <= lo < hi, got ({lo}, {hi})"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Parses `family:p1,p2,...`, e.g. `uniform:0.1,1.5` or `half_cauchy:1`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (family, params) = spec.split_once(':').unwrap_or((spec, ""));
        let values = params
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad scale-prior parameter `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let want = |n: usize| -> Result<()> {
            if values.len() == n {
                Ok(())
            } else {
                Err(Error::invalid(format!(
                    "scale prior `{family}` takes {n} parameters, got {}",
                    values.len()
                )))
            }
        };
        let prior = match family
            .trim()
            .to_ascii_lowercase()
            .replace('-', "_")
            .as_str()
        {
            "gamma" => {
                want(2)?;
                ScalePrior::Gamma {
                    shape: values[0],
                    rate: values[1],
                }
            }
            "lognormal" => {
                want(2)?;
                ScalePrior::Lognormal {
                    meanlog: values[0],
                    sdlog: values[1],
                }
            }
            "half_cauchy" => {
                want(1)?;
                ScalePrior::HalfCauchy { scale: values[0] }
            }
            "half_normal" => {
                want(1)?;
                ScalePrior::HalfNormal { scale: values[0] }
            }
            "half_student_t" | "half_t" => {
                want(2)?;
                ScalePrior::HalfStudentT {
                    df: values[0],
                    scale: values[1],
                }
            }
            "uniform" => {
                want(2)?;
                ScalePrior::Uniform {
                    lo: values[0],
                    hi: values[1],
                }
            }
            "truncated_normal" => {
                want(4)?;
                ScalePrior::TruncatedNormal {
                    mean: values[0],
                    sd: values[1],
                    lo: values[2],
                    hi: values[3],
                }
            }
            other => return Err(Error::invalid(format!("unknown scale prior `{other}`"))),
        };
        prior.validate()?;
        Ok(prior)
    }

    /// `ln p(σ)`; `−∞` outside the support. Half families are defined at `σ = 0`.
    pub fn ln_density(&self, sigma: f64) -> f64 {
        if sigma.is_nan() || sigma < 0.0 || sigma == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        match *self {
            ScalePrior::Gamma { shape, rate } => {
                if sigma == 0.0 {
                    return if shape < 1.0 {
                        f64::INFINITY
                    } else if shape == 1.0 {
                        rate.ln()
                    } else {
                        f64::NEG_INFINITY
                    };
                }
                shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * sigma.ln() - rate * sigma
            }
            ScalePrior::Lognormal { meanlog, sdlog } => {
                if sigma == 0.0 {
                    return f64::NEG_INFINITY;
                }
                let ls = sigma.ln();
                let z = (ls - meanlog) / sdlog;
                -0.5 * z * z - sdlog.ln() - LN_SQRT_2PI - ls
            }
            ScalePrior::HalfCauchy { scale } => {
                let z = sigma / scale;
                (2.0 / (std::f64::consts::PI * scale)).ln() - z.mul_add(z, 1.0).ln()
            }
            ScalePrior::HalfNormal { scale } => {
                let z = sigma / scale;
                std::f64::consts::LN_2 - scale.ln() - LN_SQRT_2PI - 0.5 * z * z
            }
            ScalePrior::HalfStudentT { df, scale } => {
                let z = sigma / scale;
                std::f64::consts::LN_2 + ln_gamma(0.5 * (df + 1.0))
                    - ln_gamma(0.5 * df)
                    - 0.5 * (df * std::f64::consts::PI).ln()
                    - scale.ln()
                    - 0.5 * (df + 1.0) * (z * z / df).ln_1p()
            }
            ScalePrior::Uniform { lo, hi } => {
                if sigma < lo || sigma > hi {
                    f64::NEG_INFINITY
                } else {
                    -(hi - lo).ln()
                }
            }
            ScalePrior::TruncatedNormal { mean, sd, lo, hi } => {
                if sigma < lo || sigma > hi {
                    return f64::NEG_INFINITY;
                }
                let z = (sigma - mean) / sd;
                -0.5 * z * z - sd.ln() - LN_SQRT_2PI - truncated_normal_ln_mass(mean, sd, lo, hi)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ScalePrior::Gamma { shape, rate } => Gamma::new(shape, 1.0 / rate)
                .expect("validated")
                .sample(rng),
            ScalePrior::Lognormal { meanlog, sdlog } => LogNormal::new(meanlog, sdlog)
                .expect("validated")
                .sample(rng),
            ScalePrior::HalfCauchy { scale } => Cauchy::new(0.0, scale)
                .expect("validated")
                .sample(rng)
                .abs(),
            ScalePrior::HalfNormal { scale } => Normal::new(0.0, scale)
                .expect("validated")
                .sample(rng)
                .abs(),
            ScalePrior::HalfStudentT { df, scale } => {
                scale * StudentT::new(df).expect("validated").sample(rng).abs()
            }
            ScalePrior::Uniform { lo, hi } => Uniform::new_inclusive(lo, hi)
                .expect("validated")
                .sample(rng),
            ScalePrior::TruncatedNormal { mean, sd, lo, hi } => {
                // inverse CDF on the side of the mean where the interval lies, to keep tail precision
                let flip = lo > mean;
                let (a, b) = if flip {
                    ((mean - hi) / sd, (mean - lo) / sd)
                } else {
                    ((lo - mean) / sd, (hi - mean) / sd)
                };
                let std = NormalDist::new(0.0, 1.0).expect("standard normal");
                let (fa, fb) = (std.cdf(a), std.cdf(b));
                let p: f64 = rng.random_range(0.0..1.0);
                let z = std.inverse_cdf(fa + p * (fb - fa)).clamp(a, b);
                let x = if flip { mean - z * sd } else { mean + z * sd };
                x.clamp(lo, hi)
            }
        }
    }

    /// Prior median, used to initialize scales.
    pub fn median(&self) -> f64 {
        match *self {
            ScalePrior::Gamma { shape, rate } => GammaDist::new(shape, rate)
                .expect("validated")
                .inverse_cdf(0.5),
            ScalePrior::Lognormal { meanlog, .. } => meanlog.exp(),
            ScalePrior::HalfCauchy { scale } => scale,
            ScalePrior::HalfNormal { scale } => scale * 0.674_489_750_196_081_7,
            ScalePrior::HalfStudentT { df, scale } => {
                scale
                    * StudentsT::new(0.0, 1.0, df)
                        .expect("validated")
                        .inverse_cdf(0.75)
            }
            ScalePrior::Uniform { lo, hi } => 0.5 * (lo + hi),
            ScalePrior::TruncatedNormal { mean, sd, lo, hi } => {
                let std = NormalDist::new(0.0, 1.0).expect("standard normal");
                let (fa, fb) = (std.cdf((lo - mean) / sd), std.cdf((hi - mean) / sd));
                (mean + sd * std.inverse_cdf(0.5 * (fa + fb))).clamp(lo, hi)
            }
        }
    }
}

fn check_bounds(lo: f64, hi: f64) -> Result<()> {
    if lo >= 0.0 && hi > lo && hi.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "bounds need 0 <= lo < hi < inf, got ({lo}, {hi})"
        )))
    }
}

/// `ln(Φ(b) − Φ(a))` for the standardized truncation bounds.
fn truncated_normal_ln_mass(mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    let (a, b) = ((lo - mean) / sd, (hi - mean) / sd);
    if a > 0.0 {
        ln_diff_exp(ln_norm_cdf(-a), ln_norm_cdf(-b))
    } else {
        ln_diff_exp(ln_norm_cdf(b), ln_norm_cdf(a))
    }
}

/// Conjugate hyperprior `N(φ₁ | ψ₁, precision ψ₂) · Ga(φ₂ | shape ψ₃, rate ψ₄)`
/// on a normal location base measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperprior {
    pub psi: [f64; 4],
}

impl Hyperprior {
    pub fn new(psi: [f64; 4]) -> Result<Self> {
        let [m, p, a, b] = psi;
        if !(m.is_finite()
            && p > 0.0
            && a > 0.0
            && b > 0.0
            && p.is_finite()
            && a.is_finite()
            && b.is_finite())
        {
            return Err(Error::invalid(format!("invalid hyperprior {psi:?}")));
        }
        Ok(Self { psi })
    }
}

/// Base measure `P₀` on `(μ, σ)` together with the scale prior and the
/// optional location hyperprior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseMeasureSpec {
    pub location: LocationFamily,
    pub phi: [f64; 2],
    pub scale: ScalePrior,
    pub hyperprior: Option<Hyperprior>,
}

impl BaseMeasureSpec {
    pub fn new(
        location: LocationFamily,
        phi: [f64; 2],
        scale: ScalePrior,
        hyperprior: Option<Hyperprior>,
    ) -> Result<Self> {
        location.validate(phi)?;
        scale.validate()?;
        if hyperprior.is_some() && location != LocationFamily::Normal {
            return Err(Error::invalid(
                "a location hyperprior is only available for the normal base measure",
            ));
        }
        Ok(Self {
            location,
            phi,
            scale,
            hyperprior,
        })
    }

    pub fn location_ln_density(&self, mu: f64, phi: [f64; 2]) -> f64 {
        self.location.ln_density(mu, phi)
    }

    pub fn sample_location<R: Rng + ?Sized>(&self, phi: [f64; 2], rng: &mut R) -> f64 {
        self.location.sample(phi, rng)
    }
}

pub fn scale_prior_logdensity(sigma: f64, spec: &BaseMeasureSpec) -> f64 {
    spec.scale.ln_density(sigma)
}

pub fn scale_prior_sample<R: Rng + ?Sized>(spec: &BaseMeasureSpec, rng: &mut R) -> f64 {
    spec.scale.sample(rng)
}
