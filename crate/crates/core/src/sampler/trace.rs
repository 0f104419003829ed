use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{mixture_cdf, mixture_density, AtomParams, KernelSpec};

use super::config::ModelKind;
use super::state::AcceptanceStats;

/// One kept iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// 1-based sweep number.
    pub iteration: usize,
    pub weights: Vec<f64>,
    pub atoms: Vec<AtomParams>,
    pub u: f64,
    pub log_likelihood: f64,
    pub n_components: usize,
    pub labels: Vec<usize>,
    pub sigma: Option<f64>,
    pub phi: [f64; 2],
}

impl TraceRow {
    pub fn density(&self, x: f64, kernel: &KernelSpec) -> f64 {
        mixture_density(x, &self.weights, &self.atoms, kernel).expect("trace rows are consistent")
    }

    pub fn cdf(&self, x: f64, kernel: &KernelSpec) -> f64 {
        mixture_cdf(x, &self.weights, &self.atoms, kernel).expect("trace rows are consistent")
    }
}

/// Kept iterations of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainTrace {
    pub chain: usize,
    pub seed: u64,
    pub model: ModelKind,
    pub kernel: KernelSpec,
    pub rows: Vec<TraceRow>,
    pub acceptance: AcceptanceStats,
    /// Final adaptive step on `ln U`, when the adaptive kernel was used.
    pub u_log_step: Option<f64>,
}

impl ChainTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_components(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.n_components as f64).collect()
    }

    pub fn latent_u(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.u).collect()
    }

    pub fn log_likelihood(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.log_likelihood).collect()
    }

    /// Common scale per row; `None` for the fully nonparametric model.
    pub fn sigma(&self) -> Option<Vec<f64>> {
        self.rows.iter().map(|r| r.sigma).collect()
    }

    pub fn labels(&self) -> Vec<Vec<usize>> {
        self.rows.iter().map(|r| r.labels.clone()).collect()
    }

    /// Every `step`-th row, starting with the first.
    pub fn thinned(&self, step: usize) -> Result<ChainTrace> {
        if step == 0 {
            return Err(crate::Error::invalid("thinning step must be at least 1"));
        }
        Ok(ChainTrace {
            rows: self.rows.iter().step_by(step).cloned().collect(),
            ..self.clone()
        })
    }

    /// Rows of several chains pooled into one trace.
    pub fn pooled(traces: &[ChainTrace]) -> Option<ChainTrace> {
        let first = traces.first()?;
        Some(ChainTrace {
            rows: traces.iter().flat_map(|t| t.rows.iter().cloned()).collect(),
            ..first.clone()
        })
    }
}
