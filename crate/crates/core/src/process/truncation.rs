use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{OnceLock, RwLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::levy::JumpStream;
use super::moments::{mean_deficits, moment_match_index_from, MAX_MOMENT_ORDER};
use super::{total_mass_moment, NggParams};
use crate::error::{Error, Result};

/// Tilt values are memoized on a logarithmic grid with this many cells per decade.
const BUCKETS_PER_DECADE: f64 = 8.0;

/// Moment-matching budget for truncating Ferguson–Klass series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Largest acceptable moment-matching error `ℓ`.
    pub target_index: f64,
    /// Number of total-mass moments compared.
    pub num_moments: usize,
    /// Hard cap on the number of retained jumps.
    pub max_jumps: usize,
    /// Replicate series used to estimate the truncated moments.
    pub replicates: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            target_index: 0.01,
            num_moments: 4,
            max_jumps: 1000,
            replicates: 100,
        }
    }
}

impl TruncationPolicy {
    pub fn new(target_index: f64, num_moments: usize, max_jumps: usize) -> Result<Self> {
        let policy = Self {
            target_index,
            num_moments,
            max_jumps,
            ..Self::default()
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn with_replicates(mut self, replicates: usize) -> Result<Self> {
        self.replicates = replicates;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_index.is_finite() && self.target_index > 0.0) {
            return Err(Error::invalid("truncation target index must be positive"));
        }
        if self.num_moments == 0 || self.num_moments > MAX_MOMENT_ORDER {
            return Err(Error::invalid(format!(
                "number of matched moments must lie in 1..={MAX_MOMENT_ORDER}"
            )));
        }
        if self.max_jumps == 0 || self.replicates == 0 {
            return Err(Error::invalid(
                "max_jumps and replicates must be at least 1",
            ));
        }
        Ok(())
    }
}

/// Outcome of a truncation search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationLevel {
    /// Number of jumps to retain.
    pub jumps: usize,
    /// Moment-matching error estimated at `jumps`.
    pub index: f64,
    /// False when `max_jumps` was hit before the budget was met.
    pub reached: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct CacheKey {
    alpha: u64,
    kappa: u64,
    gamma: u64,
    bucket: i64,
    target: u64,
    moments: usize,
    max_jumps: usize,
    replicates: usize,
}

impl CacheKey {
    fn seed(&self) -> u64 {
        [
            self.alpha,
            self.kappa,
            self.gamma,
            self.bucket as u64,
            self.target,
            self.moments as u64,
            self.max_jumps as u64,
            self.replicates as u64,
        ]
        .iter()
        .fold(0x9e37_79b9_7f4a_7c15, |h, &x| splitmix(h ^ x))
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Log-grid cell of a tilt value and the cell's upper edge, at which the
/// truncation level is computed. `u = 0` has its own cell.
fn tilt_bucket(u: f64) -> (i64, f64) {
    if u <= 0.0 {
        return (i64::MIN, 0.0);
    }
    let b = (u.log10() * BUCKETS_PER_DECADE).floor();
    (b as i64, 10f64.powf((b + 1.0) / BUCKETS_PER_DECADE))
}

/// Thread-safe memo of truncation levels keyed by process parameters, tilt
/// cell and policy.
///
/// Each search runs on its own random stream derived from the key, so the
/// stored levels do not depend on which chain asked first.
#[derive(Debug, Default)]
pub struct TruncationCache {
    levels: RwLock<HashMap<CacheKey, TruncationLevel>>,
    computations: AtomicUsize,
}

impl TruncationCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Smallest `Q ≤ max_jumps` whose moment-matching error meets the policy.
    pub fn level_for(
        &self,
        policy: &TruncationPolicy,
        p: &NggParams,
        u: f64,
    ) -> Result<TruncationLevel> {
        policy.validate()?;
        p.check_tilt(u)?;
        let (bucket, u_rep) = tilt_bucket(u);
        let key = CacheKey {
            alpha: p.alpha().to_bits(),
            kappa: p.kappa().to_bits(),
            gamma: p.gamma().to_bits(),
            bucket,
            target: policy.target_index.to_bits(),
            moments: policy.num_moments,
            max_jumps: policy.max_jumps,
            replicates: policy.replicates,
        };
        if let Some(level) = self
            .levels
            .read()
            .expect("truncation cache poisoned")
            .get(&key)
        {
            return Ok(*level);
        }
        let level = search_truncation_level(policy, p, u_rep, key.seed())?;
        self.computations.fetch_add(1, Ordering::Relaxed);
        let mut map = self.levels.write().expect("truncation cache poisoned");
        Ok(*map.entry(key).or_insert(level))
    }

    /// Number of searches actually run (cache misses).
    pub fn computations(&self) -> usize {
        self.computations.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.levels.read().expect("truncation cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// [`TruncationCache::level_for`] against a process-wide cache.
pub fn truncation_level_for(
    policy: &TruncationPolicy,
    p: &NggParams,
    u: f64,
) -> Result<TruncationLevel> {
    static GLOBAL: OnceLock<TruncationCache> = OnceLock::new();
    GLOBAL
        .get_or_init(TruncationCache::new)
        .level_for(policy, p, u)
}

/// Replicate jump series grown on demand; prefixes of the same replicates are
/// reused for every candidate `Q` so that the error curve is evaluated on
/// common random numbers.
struct ReplicateBank<'a> {
    streams: Vec<(JumpStream<'a>, ChaCha8Rng)>,
    /// Per replicate: cumulative sums and jumps generated so far.
    sums: Vec<Vec<f64>>,
    jumps: Vec<Vec<f64>>,
}

impl<'a> ReplicateBank<'a> {
    fn new(p: &'a NggParams, u: f64, replicates: usize, seed: u64) -> Self {
        let streams = (0..replicates)
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                (JumpStream::new(p, u), rng)
            })
            .collect();
        Self {
            streams,
            sums: vec![Vec::new(); replicates],
            jumps: vec![Vec::new(); replicates],
        }
    }

    fn grow_to(&mut self, q: usize) -> Result<()> {
        for (r, (stream, rng)) in self.streams.iter_mut().enumerate() {
            while self.jumps[r].len() < q {
                match stream.next_jump(rng)? {
                    Some(j) => {
                        let prev = self.sums[r].last().copied().unwrap_or(0.0);
                        self.sums[r].push(prev + j);
                        self.jumps[r].push(j);
                    }
                    None => break,
                }
            }
        }
        Ok(())
    }

    /// `(T_Q, J_Q)` for every replicate; exhausted replicates use their full length.
    fn prefix(&self, q: usize) -> Vec<(f64, f64)> {
        self.sums
            .iter()
            .zip(&self.jumps)
            .map(|(s, j)| {
                let i = q.min(s.len()) - 1;
                (s[i], j[i])
            })
            .collect()
    }
}

/// Uncached truncation search at tilt `u`: doubling until the budget is met,
/// then bisection down to the smallest sufficient `Q`.
pub fn search_truncation_level(
    policy: &TruncationPolicy,
    p: &NggParams,
    u: f64,
    seed: u64,
) -> Result<TruncationLevel> {
    policy.validate()?;
    let order = policy.num_moments;
    let exact = (1..=order)
        .map(|k| total_mass_moment(k, p, u))
        .collect::<Result<Vec<_>>>()?;
    let mut bank = ReplicateBank::new(p, u, policy.replicates, seed);
    let index_at = |bank: &mut ReplicateBank, q: usize| -> Result<f64> {
        bank.grow_to(q)?;
        let deficits = mean_deficits(&bank.prefix(q), p, u, order);
        let estimates: Vec<f64> = exact.iter().zip(&deficits).map(|(m, d)| m - d).collect();
        Ok(moment_match_index_from(&estimates, &exact))
    };

    let mut low = 0; // largest Q known to fail
    let mut high = 1;
    let mut high_index = index_at(&mut bank, high)?;
    while high_index > policy.target_index {
        if high >= policy.max_jumps {
            return Ok(TruncationLevel {
                jumps: high,
                index: high_index,
                reached: false,
            });
        }
        low = high;
        high = (high * 2).min(policy.max_jumps);
        high_index = index_at(&mut bank, high)?;
    }
    while high - low > 1 {
        let mid = low + (high - low) / 2;
        let idx = index_at(&mut bank, mid)?;
        if idx <= policy.target_index {
            high = mid;
            high_index = idx;
        } else {
            low = mid;
        }
    }
    Ok(TruncationLevel {
        jumps: high,
        index: high_index,
        reached: true,
    })
}
