use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    BaseMeasureSpec, Hyperprior, KernelFamily, KernelSpec, LocationFamily, Observation, ScalePrior,
    Support,
};
use crate::process::{NggParams, TruncationPolicy};

/// Semiparametric mixtures share one scale across components; fully
/// nonparametric mixtures give every component its own `(μ, σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Semiparametric,
    FullyNonparametric,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "semi" | "semiparametric" => Ok(Self::Semiparametric),
            "full" | "fully_nonparametric" | "nonparametric" => Ok(Self::FullyNonparametric),
            other => Err(Error::invalid(format!(
                "unknown model `{other}`, expected semi or full"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub model: ModelKind,
    pub kernel: KernelSpec,
    pub base: BaseMeasureSpec,
    pub ngg: NggParams,
    pub iterations: usize,
    pub burnin: usize,
    pub thinning: usize,
    /// Shape `δ` of the gamma proposal for `U`.
    pub u_proposal_delta: f64,
    pub adaptive_u: bool,
    pub truncation: TruncationPolicy,
    pub seed: u64,
    /// Random-walk step on component locations in the acceleration move.
    pub location_step: f64,
    /// Random-walk step on `ln σ` for component scales.
    pub log_scale_step: f64,
    /// Random-walk step on `ln σ` for the common scale.
    pub common_scale_step: f64,
}

impl SamplerConfig {
    /// Data-driven defaults: stable(0.4) mixing measure, 1500 iterations with
    /// 150 burn-in and thinning 10, and a weakly informative base measure
    /// centred on the data.
    pub fn for_data(data: &[Observation], model: ModelKind, family: KernelFamily) -> Result<Self> {
        let kernel = KernelSpec::new(family);
        validate_data(data, &kernel)?;
        let base = default_base_measure(data, &kernel)?;
        let spread = location_spread(data, &kernel);
        let mut cfg = Self {
            model,
            kernel,
            base,
            ngg: NggParams::new(1.0, 0.0, 0.4)?,
            iterations: 1500,
            burnin: 150,
            thinning: 10,
            u_proposal_delta: 2.0,
            adaptive_u: false,
            truncation: TruncationPolicy::default(),
            seed: 0,
            location_step: 0.1,
            log_scale_step: 0.3,
            common_scale_step: 0.2,
        };
        cfg.location_step = if spread > 0.0 {
            spread / 10.0
        } else {
            0.1 * cfg.base.scale.median()
        };
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.burnin >= self.iterations {
            return Err(Error::invalid(format!(
                "burn-in ({}) must be smaller than the number of iterations ({})",
                self.burnin, self.iterations
            )));
        }
        if self.thinning == 0 {
            return Err(Error::invalid("thinning must be at least 1"));
        }
        if !(self.u_proposal_delta > 0.0 && self.u_proposal_delta.is_finite()) {
            return Err(Error::invalid("u proposal shape must be positive"));
        }
        for (step, name) in [
            (self.location_step, "location step"),
            (self.log_scale_step, "log-scale step"),
            (self.common_scale_step, "common-scale step"),
        ] {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        self.truncation.validate()?;
        self.base.scale.validate()?;
        Ok(())
    }

    /// Number of rows a run will keep.
    pub fn kept_iterations(&self) -> usize {
        (self.iterations - self.burnin) / self.thinning
    }

    /// Whether iteration `t` (1-based) is recorded.
    pub fn keeps(&self, t: usize) -> bool {
        t > self.burnin && (t - self.burnin).is_multiple_of(self.thinning)
    }
}

/// Values on which component locations live: `ln x` for the lognormal
/// kernel, the data themselves otherwise.
pub(crate) fn location_values(data: &[Observation], kernel: &KernelSpec) -> Vec<f64> {
    data.iter()
        .map(|o| o.location_summary())
        .filter(|x| x.is_finite())
        .map(|x| {
            if kernel.family == KernelFamily::Lognormal {
                x.max(f64::MIN_POSITIVE).ln()
            } else {
                x
            }
        })
        .collect()
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

pub(crate) fn location_spread(data: &[Observation], kernel: &KernelSpec) -> f64 {
    let xs = location_values(data, kernel);
    if xs.len() < 2 {
        return 0.0;
    }
    mean_var(&xs).1.sqrt()
}

/// Weakly informative base measure centred on the data.
///
/// Real-line and lognormal kernels get a normal location base with a
/// hyperprior `ψ = (m, 1/v, 2, 2v)` built from the sample mean `m` and
/// variance `v` (on the log scale for lognormal); the gamma kernel a gamma
/// location base with the sample mean; the beta kernel a uniform one. Scales
/// get a `Ga(2, 4/s)` prior, `s` the single-component scale estimate.
pub fn default_base_measure(data: &[Observation], kernel: &KernelSpec) -> Result<BaseMeasureSpec> {
    let xs = location_values(data, kernel);
    if xs.is_empty() {
        return Err(Error::Data(
            "no finite values to centre the base measure on".into(),
        ));
    }
    let (mean, var) = mean_var(&xs);
    let var = if var > 0.0 {
        var
    } else {
        mean.abs().max(1.0).powi(2)
    };
    let sd = var.sqrt();
    let scale_guess = match kernel.family {
        KernelFamily::Beta => {
            let m = mean.clamp(1e-3, 1.0 - 1e-3);
            let conc = (m * (1.0 - m) / var - 1.0).max(1.0);
            1.0 / conc
        }
        _ => sd,
    };
    let scale = ScalePrior::Gamma {
        shape: 2.0,
        rate: 4.0 / scale_guess,
    };
    match kernel.family {
        KernelFamily::Normal | KernelFamily::DoubleExponential | KernelFamily::Lognormal => {
            let hyper = Hyperprior::new([mean, 1.0 / var, 2.0, 2.0 * var])?;
            BaseMeasureSpec::new(
                LocationFamily::Normal,
                [mean, 1.0 / var],
                scale,
                Some(hyper),
            )
        }
        KernelFamily::Gamma => {
            let m = mean.max(f64::MIN_POSITIVE);
            BaseMeasureSpec::new(LocationFamily::Gamma, [2.0, 2.0 / m], scale, None)
        }
        KernelFamily::Beta => BaseMeasureSpec::new(LocationFamily::Beta, [1.0, 1.0], scale, None),
    }
}

/// Rejects empty data and observations that cannot have positive
/// probability under the kernel's support.
pub fn validate_data(data: &[Observation], kernel: &KernelSpec) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Data("dataset is empty".into()));
    }
    let support = kernel.support();
    let (lo, hi) = match support {
        Support::Real => (f64::NEG_INFINITY, f64::INFINITY),
        Support::Positive => (0.0, f64::INFINITY),
        Support::UnitInterval => (0.0, 1.0),
    };
    for (i, obs) in data.iter().enumerate() {
        let ok = match obs.point() {
            Some(x) => support.contains(x),
            None => {
                let l = obs.left().unwrap_or(f64::NEG_INFINITY);
                let r = obs.right().unwrap_or(f64::INFINITY);
                r > lo && l < hi
            }
        };
        if !ok {
            return Err(Error::Data(format!(
                "observation {} ({obs:?}) lies outside the {:?} support of the {:?} kernel",
                i + 1,
                support,
                kernel.family
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kept_count() {
        let data: Vec<_> = (0..10)
            .map(|i| Observation::exact(i as f64).unwrap())
            .collect();
        let cfg = SamplerConfig::for_data(&data, ModelKind::Semiparametric, KernelFamily::Normal)
            .unwrap();
        assert_eq!(cfg.kept_iterations(), 135);
        assert_eq!((1..=cfg.iterations).filter(|&t| cfg.keeps(t)).count(), 135);
    }

    #[test]
    fn support_violations() {
        let data = vec![Observation::exact(-1.0).unwrap()];
        assert!(
            SamplerConfig::for_data(&data, ModelKind::Semiparametric, KernelFamily::Gamma).is_err()
        );
        assert!(
            SamplerConfig::for_data(&[], ModelKind::Semiparametric, KernelFamily::Normal).is_err()
        );
        let cens = vec![Observation::left_censored(-0.5).unwrap()];
        assert!(validate_data(&cens, &KernelSpec::new(KernelFamily::Lognormal)).is_err());
    }
}
