use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::ChainTrace;

/// The scalar summaries monitored for convergence. Atom-level quantities are
/// left out because component labels switch between iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monitored {
    NComponents,
    Sigma,
    LatentU,
    LogLikelihood,
}

impl Monitored {
    pub const ALL: [Monitored; 4] = [
        Self::NComponents,
        Self::Sigma,
        Self::LatentU,
        Self::LogLikelihood,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::NComponents => "n_components",
            Self::Sigma => "sigma",
            Self::LatentU => "u",
            Self::LogLikelihood => "log_likelihood",
        }
    }

    fn extract(&self, trace: &ChainTrace) -> Option<Vec<f64>> {
        match self {
            Self::NComponents => Some(trace.n_components()),
            Self::Sigma => trace.sigma(),
            Self::LatentU => Some(trace.latent_u()),
            Self::LogLikelihood => Some(trace.log_likelihood()),
        }
    }
}

/// Monitored series for several chains: `values[chain][quantity][iteration]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarTraceSet {
    names: Vec<Monitored>,
    values: Vec<Vec<Vec<f64>>>,
}

impl ScalarTraceSet {
    /// Every monitored quantity available in all chains. The common scale is
    /// only present for the semiparametric model.
    pub fn from_traces(traces: &[ChainTrace]) -> Result<Self> {
        let names: Vec<Monitored> = Monitored::ALL
            .into_iter()
            .filter(|m| traces.iter().all(|t| m.extract(t).is_some()))
            .collect();
        let values = traces
            .iter()
            .map(|t| {
                names
                    .iter()
                    .map(|m| m.extract(t).expect("filtered above"))
                    .collect()
            })
            .collect();
        Self::new(names, values)
    }

    pub fn new(names: Vec<Monitored>, values: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        for (c, chain) in values.iter().enumerate() {
            if chain.len() != names.len() {
                return Err(Error::invalid(format!(
                    "chain {c} has {} series for {} names",
                    chain.len(),
                    names.len()
                )));
            }
            if chain.windows(2).any(|w| w[0].len() != w[1].len()) {
                return Err(Error::invalid(format!(
                    "series of chain {c} differ in length"
                )));
            }
        }
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(Error::invalid("monitored names must be distinct"));
        }
        Ok(Self { names, values })
    }

    pub fn names(&self) -> &[Monitored] {
        &self.names
    }

    pub fn num_chains(&self) -> usize {
        self.values.len()
    }

    /// Kept iterations of chain `c`.
    pub fn len(&self, c: usize) -> usize {
        self.values[c].first().map_or(0, Vec::len)
    }

    pub fn series(&self, chain: usize, name: Monitored) -> Option<&[f64]> {
        let i = self.names.iter().position(|n| *n == name)?;
        Some(&self.values[chain][i])
    }

    pub(crate) fn chain(&self, c: usize) -> &[Vec<f64>] {
        &self.values[c]
    }
}
