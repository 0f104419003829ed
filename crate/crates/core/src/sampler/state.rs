use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::AtomParams;
use crate::process::JumpSeries;

use super::latent_u::AdaptiveU;

/// Cluster allocation of the observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationState {
    /// Index into `distinct_atoms` for each observation.
    pub labels: Vec<usize>,
    pub distinct_atoms: Vec<AtomParams>,
    pub multiplicities: Vec<usize>,
}

impl AllocationState {
    /// Everything in one cluster at `atom`.
    pub fn single(n: usize, atom: AtomParams) -> Self {
        Self {
            labels: vec![0; n],
            distinct_atoms: vec![atom],
            multiplicities: vec![n],
        }
    }

    /// Builds the allocation from per-observation atom choices, numbering
    /// clusters by first occurrence.
    pub fn from_choices(choices: &[usize], atoms: &[AtomParams]) -> Self {
        let mut map = vec![usize::MAX; atoms.len()];
        let mut labels = Vec::with_capacity(choices.len());
        let mut distinct_atoms = Vec::new();
        let mut multiplicities = Vec::new();
        for &c in choices {
            if map[c] == usize::MAX {
                map[c] = distinct_atoms.len();
                distinct_atoms.push(atoms[c]);
                multiplicities.push(0);
            }
            labels.push(map[c]);
            multiplicities[map[c]] += 1;
        }
        Self {
            labels,
            distinct_atoms,
            multiplicities,
        }
    }

    /// Number of distinct clusters `R_n`.
    pub fn num_clusters(&self) -> usize {
        self.distinct_atoms.len()
    }

    pub fn check(&self) -> Result<()> {
        let r = self.distinct_atoms.len();
        if r == 0 || self.multiplicities.len() != r {
            return Err(Error::invalid(
                "allocation has no clusters or mismatched multiplicities",
            ));
        }
        let mut counts = vec![0; r];
        for &l in &self.labels {
            if l >= r {
                return Err(Error::invalid("label points past the distinct atoms"));
            }
            counts[l] += 1;
        }
        if counts != self.multiplicities || counts.contains(&0) {
            return Err(Error::invalid("multiplicities disagree with labels"));
        }
        Ok(())
    }
}

/// Truncated realization of the tilted measure: unfixed Ferguson–Klass jumps
/// with their locations, plus fixed jumps at the distinct cluster atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureState {
    pub unfixed: JumpSeries,
    pub unfixed_atoms: Vec<AtomParams>,
    /// Aligned with `AllocationState::distinct_atoms` at refresh time.
    pub fixed_jumps: Vec<f64>,
    pub fixed_atoms: Vec<AtomParams>,
    pub u: f64,
}

impl MeasureState {
    /// Jumps in allocation order: fixed first, then unfixed.
    pub fn jumps(&self) -> impl Iterator<Item = f64> + '_ {
        self.fixed_jumps
            .iter()
            .copied()
            .chain(self.unfixed.jumps().iter().copied())
    }

    pub fn atoms(&self) -> impl Iterator<Item = &AtomParams> + '_ {
        self.fixed_atoms.iter().chain(self.unfixed_atoms.iter())
    }

    /// Replaces the atom at `index` in allocation order.
    pub fn set_atom(&mut self, index: usize, atom: AtomParams) {
        let nfixed = self.fixed_atoms.len();
        if index < nfixed {
            self.fixed_atoms[index] = atom;
        } else {
            self.unfixed_atoms[index - nfixed] = atom;
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.fixed_jumps.iter().sum::<f64>() + self.unfixed.total()
    }

    /// Normalized weights `J / (Σ unfixed + Σ fixed)` in allocation order.
    pub fn weights(&self) -> Vec<f64> {
        let total = self.total_mass();
        self.jumps().map(|j| j / total).collect()
    }
}

/// Acceptance counters of the Metropolis–Hastings sub-steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceStats {
    pub u_accepted: usize,
    pub u_proposed: usize,
    pub atom_accepted: usize,
    pub atom_proposed: usize,
    pub scale_accepted: usize,
    pub scale_proposed: usize,
}

impl AcceptanceStats {
    fn rate(a: usize, n: usize) -> f64 {
        if n == 0 {
            f64::NAN
        } else {
            a as f64 / n as f64
        }
    }

    pub fn u_rate(&self) -> f64 {
        Self::rate(self.u_accepted, self.u_proposed)
    }

    pub fn atom_rate(&self) -> f64 {
        Self::rate(self.atom_accepted, self.atom_proposed)
    }

    pub fn scale_rate(&self) -> f64 {
        Self::rate(self.scale_accepted, self.scale_proposed)
    }
}

/// Full sampler state between sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub alloc: AllocationState,
    pub measure: Option<MeasureState>,
    pub u: f64,
    /// Location hyperparameters `φ`.
    pub phi: [f64; 2],
    /// Common scale of the semiparametric model.
    pub sigma: Option<f64>,
    pub adapt: AdaptiveU,
    pub accept: AcceptanceStats,
    /// Log-likelihood of the data under the last refreshed mixture.
    pub log_likelihood: f64,
}
