//! Partition point estimates from posterior allocation samples: posterior
//! similarity, Binder and variation-of-information losses, and a greedy
//! minimizer of the expected loss.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::ChainTrace;

/// Cluster labels numbered from 0 in order of first occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
}

impl Partition {
    /// Canonicalizes arbitrary labels.
    pub fn new(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self { labels }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Labels numbered from 1, for export.
    pub fn labels_one_based(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_clusters(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.num_clusters()];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }
}

/// Pairwise co-clustering probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    /// Checks symmetry, unit diagonal and range.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("similarity matrix must be square"));
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        let m = Self { n, values };
        for i in 0..n {
            if m.get(i, i) != 1.0 {
                return Err(Error::invalid("similarity matrix needs a unit diagonal"));
            }
            for j in 0..n {
                let p = m.get(i, j);
                if !(0.0..=1.0).contains(&p) || p != m.get(j, i) {
                    return Err(Error::invalid(
                        "similarity entries must be symmetric probabilities",
                    ));
                }
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

/// `p_ij` = fraction of samples with `i` and `j` in the same cluster.
pub fn similarity_from_samples(samples: &[Partition]) -> Result<SimilarityMatrix> {
    let first = samples
        .first()
        .ok_or_else(|| Error::invalid("no partition samples"))?;
    let n = first.len();
    if samples.iter().any(|s| s.len() != n) {
        return Err(Error::invalid("partition samples differ in length"));
    }
    let mut counts = vec![0usize; n * n];
    for s in samples {
        let l = s.labels();
        for i in 0..n {
            for j in i..n {
                if l[i] == l[j] {
                    counts[i * n + j] += 1;
                }
            }
        }
    }
    let t = samples.len() as f64;
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let p = if i == j {
                1.0
            } else {
                counts[i * n + j] as f64 / t
            };
            values[i * n + j] = p;
            values[j * n + i] = p;
        }
    }
    Ok(SimilarityMatrix { n, values })
}

pub fn trace_partitions(trace: &ChainTrace) -> Vec<Partition> {
    trace
        .rows
        .iter()
        .map(|r| Partition::new(&r.labels))
        .collect()
}

pub fn posterior_similarity(trace: &ChainTrace) -> Result<SimilarityMatrix> {
    similarity_from_samples(&trace_partitions(trace))
}

fn check_dims(c: &Partition, psm: &SimilarityMatrix) -> Result<()> {
    if c.len() != psm.n() {
        return Err(Error::invalid(format!(
            "partition of {} points against a {}-point similarity matrix",
            c.len(),
            psm.n()
        )));
    }
    Ok(())
}

/// `Σ_{i<j} |1[c_i = c_j] − p_ij|`.
pub fn expected_binder_loss(c: &Partition, psm: &SimilarityMatrix) -> Result<f64> {
    check_dims(c, psm)?;
    Ok(binder_value(c.labels(), psm))
}

fn binder_value(l: &[usize], psm: &SimilarityMatrix) -> f64 {
    let n = l.len();
    let mut s = 0.0;
    for i in 0..n {
        let row = psm.row(i);
        for j in (i + 1)..n {
            let same = if l[i] == l[j] { 1.0 } else { 0.0 };
            s += (same - row[j]).abs();
        }
    }
    s
}

/// Number of pairs on which two partitions disagree.
pub fn binder_distance(a: &Partition, b: &Partition) -> f64 {
    let n = a.len();
    let (la, lb) = (a.labels(), b.labels());
    let mut s = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            if (la[i] == la[j]) != (lb[i] == lb[j]) {
                s += 1;
            }
        }
    }
    s as f64
}

/// Variation of information `H(a) + H(b) − 2 I(a, b)` in nats.
pub fn vi_distance(a: &Partition, b: &Partition) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid("partitions differ in length"));
    }
    let n = a.len() as f64;
    let (ka, kb) = (a.num_clusters(), b.num_clusters());
    let mut table = vec![0usize; ka * kb];
    for (x, y) in a.labels().iter().zip(b.labels()) {
        table[x * kb + y] += 1;
    }
    let (sa, sb) = (a.sizes(), b.sizes());
    // n⁻¹ Σ_xy n_xy (ln n_x + ln n_y − 2 ln n_xy): every term is non-negative,
    // and summing the sorted terms makes the result exactly symmetric
    let mut terms = Vec::new();
    for x in 0..ka {
        for y in 0..kb {
            let c = table[x * kb + y];
            if c > 0 {
                let c = c as f64;
                let t = c * ((sa[x] as f64).ln() + (sb[y] as f64).ln() - 2.0 * c.ln());
                terms.push(t.max(0.0));
            }
        }
    }
    terms.sort_by(f64::total_cmp);
    Ok(terms.iter().sum::<f64>() / n)
}

/// Jensen approximation of the expected VI through the similarity matrix,
/// usually called its lower bound:
/// `n⁻¹ Σ_i [ln |c(i)| + ln Σ_j p_ij − 2 ln Σ_{j ∈ c(i)} p_ij]`.
///
/// Both expectations of logarithms are replaced by logarithms of
/// expectations, so it is exact for a point-mass posterior but is not an
/// inequality in either direction in general.
pub fn expected_vi_lower_bound(c: &Partition, psm: &SimilarityMatrix) -> Result<f64> {
    check_dims(c, psm)?;
    Ok(vi_lb_value(c.labels(), psm))
}

fn vi_lb_value(l: &[usize], psm: &SimilarityMatrix) -> f64 {
    let n = l.len();
    let k = l.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &x in l {
        sizes[x] += 1;
    }
    let mut s = 0.0;
    for i in 0..n {
        let row = psm.row(i);
        let mut within = 0.0;
        let mut total = 0.0;
        for j in 0..n {
            total += row[j];
            if l[j] == l[i] {
                within += row[j];
            }
        }
        s += (sizes[l[i]] as f64).ln() + total.ln() - 2.0 * within.ln();
    }
    s / n as f64
}

/// Mean VI distance to the sample partitions.
pub fn expected_vi_exact(c: &Partition, samples: &[Partition]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("no partition samples"));
    }
    let mut s = 0.0;
    for p in samples {
        s += vi_distance(c, p)?;
    }
    Ok(s / samples.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    Binder,
    /// VI through its similarity-matrix lower bound.
    Vi,
    /// VI averaged over every sample; slow.
    ViExact,
}

impl std::str::FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "binder" => Ok(Loss::Binder),
            "vi" => Ok(Loss::Vi),
            "vi_exact" | "vi-exact" => Ok(Loss::ViExact),
            other => Err(Error::invalid(format!("unknown loss `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyConfig {
    /// Cap on accepted improving moves.
    pub max_iterations: usize,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringEstimate {
    pub partition: Partition,
    pub expected_loss: f64,
    /// Loss of the best sampled partition the search started from.
    pub initial_loss: f64,
    pub iterations: usize,
    /// False when the iteration cap stopped the search.
    pub converged: bool,
}

struct Objective<'a> {
    loss: Loss,
    psm: &'a SimilarityMatrix,
    samples: &'a [Partition],
}

impl Objective<'_> {
    fn value(&self, l: &[usize]) -> f64 {
        match self.loss {
            Loss::Binder => binder_value(l, self.psm),
            Loss::Vi => vi_lb_value(l, self.psm),
            Loss::ViExact => {
                let c = Partition::new(l);
                self.samples
                    .iter()
                    .map(|s| vi_distance(&c, s).expect("equal lengths"))
                    .sum::<f64>()
                    / self.samples.len() as f64
            }
        }
    }
}

/// Working partition with per-point within-cluster similarity sums, so that
/// single-point moves are scored in `O(n)`.
struct Work {
    labels: Vec<usize>,
    sizes: Vec<usize>,
    /// `sums[i * k + c] = Σ_{j ∈ c} p_ij`
    sums: Vec<f64>,
    k: usize,
}

impl Work {
    fn new(labels: Vec<usize>, psm: &SimilarityMatrix) -> Self {
        let n = labels.len();
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut sizes = vec![0; k];
        for &l in &labels {
            sizes[l] += 1;
        }
        let mut sums = vec![0.0; n * k];
        for i in 0..n {
            let row = psm.row(i);
            for j in 0..n {
                sums[i * k + labels[j]] += row[j];
            }
        }
        Self {
            labels,
            sizes,
            sums,
            k,
        }
    }

    /// Loss change when point `i` moves to cluster `to` (`to == k` opens a new one).
    fn move_delta(&self, obj: &Objective, i: usize, to: usize) -> f64 {
        let from = self.labels[i];
        let psm = obj.psm;
        let row = psm.row(i);
        match obj.loss {
            Loss::Binder => {
                let mut d = 0.0;
                for (j, &l) in self.labels.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    if l == from {
                        d += 2.0 * row[j] - 1.0;
                    } else if l == to {
                        d += 1.0 - 2.0 * row[j];
                    }
                }
                d
            }
            Loss::Vi => {
                let n = self.labels.len();
                let k = self.k;
                let within = |j: usize, c: usize| if c < k { self.sums[j * k + c] } else { 0.0 };
                let size = |c: usize| if c < k { self.sizes[c] } else { 0 };
                let mut d = 0.0;
                for j in 0..n {
                    let l = self.labels[j];
                    if j == i {
                        let old = (size(from) as f64).ln() - 2.0 * within(i, from).ln();
                        let new =
                            ((size(to) + 1) as f64).ln() - 2.0 * (within(i, to) + row[i]).ln();
                        d += new - old;
                    } else if l == from {
                        let w = within(j, from);
                        let old = (size(from) as f64).ln() - 2.0 * w.ln();
                        let new = ((size(from) - 1) as f64).ln() - 2.0 * (w - row[j]).ln();
                        d += new - old;
                    } else if l == to {
                        let w = within(j, to);
                        let old = (size(to) as f64).ln() - 2.0 * w.ln();
                        let new = ((size(to) + 1) as f64).ln() - 2.0 * (w + row[j]).ln();
                        d += new - old;
                    }
                }
                d / n as f64
            }
            Loss::ViExact => {
                let mut l = self.labels.clone();
                l[i] = to;
                obj.value(&l) - obj.value(&self.labels)
            }
        }
    }

    /// Loss change when clusters `a` and `b` are merged.
    fn merge_delta(&self, obj: &Objective, a: usize, b: usize) -> f64 {
        let k = self.k;
        match obj.loss {
            Loss::Binder => {
                let cross: f64 = (0..self.labels.len())
                    .filter(|&i| self.labels[i] == a)
                    .map(|i| self.sums[i * k + b])
                    .sum();
                (self.sizes[a] * self.sizes[b]) as f64 - 2.0 * cross
            }
            Loss::Vi => {
                let merged = ((self.sizes[a] + self.sizes[b]) as f64).ln();
                let mut d = 0.0;
                for (i, &l) in self.labels.iter().enumerate() {
                    if l == a || l == b {
                        let within = self.sums[i * k + l];
                        let joint = self.sums[i * k + a] + self.sums[i * k + b];
                        d +=
                            merged - (self.sizes[l] as f64).ln() - 2.0 * (joint.ln() - within.ln());
                    }
                }
                d / self.labels.len() as f64
            }
            Loss::ViExact => {
                let l = merged_labels(&self.labels, a, b);
                obj.value(&l) - obj.value(&self.labels)
            }
        }
    }
}

fn merged_labels(labels: &[usize], a: usize, b: usize) -> Vec<usize> {
    labels.iter().map(|&l| if l == b { a } else { l }).collect()
}

fn canonical(l: &[usize]) -> Vec<usize> {
    Partition::new(l).labels
}

/// Candidate partitions from splitting each cluster around its two least
/// similar members.
fn split_candidates(labels: &[usize], psm: &SimilarityMatrix) -> Vec<Vec<usize>> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut out = Vec::new();
    for c in 0..k {
        let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if members.len() < 2 {
            continue;
        }
        let mut seeds = (members[0], members[1]);
        let mut lowest = f64::INFINITY;
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                if psm.get(i, j) < lowest {
                    lowest = psm.get(i, j);
                    seeds = (i, j);
                }
            }
        }
        let mut l = labels.to_vec();
        for &i in &members {
            if i == seeds.1 || (i != seeds.0 && psm.get(i, seeds.1) > psm.get(i, seeds.0)) {
                l[i] = k;
            }
        }
        out.push(l);
    }
    out
}

/// Largest `n` at which the exact-VI search also starts from singletons.
const EXACT_SINGLETON_START_LIMIT: usize = 50;

struct Descent {
    labels: Vec<usize>,
    loss: f64,
    iterations: usize,
    converged: bool,
}

/// Best-improvement descent from `start` over single-point moves, merges and
/// splits.
fn descend(obj: &Objective, start: Vec<usize>, max_iterations: usize) -> Descent {
    let psm = obj.psm;
    let mut current = obj.value(&start);
    let mut work = Work::new(start, psm);
    let n = work.labels.len();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        let mut cand: Option<(f64, Vec<usize>)> = None;
        let mut consider = |value: f64, labels: Vec<usize>| {
            if value >= current - 1e-12 {
                return;
            }
            let better = match &cand {
                None => true,
                Some((v, l)) => {
                    value < v - 1e-12
                        || ((value - v).abs() <= 1e-12 && canonical(&labels) < canonical(l))
                }
            };
            if better {
                cand = Some((value, labels));
            }
        };
        for i in 0..n {
            for to in 0..=work.k {
                let from = work.labels[i];
                if to == from || (to == work.k && work.sizes[from] == 1) {
                    continue;
                }
                let d = work.move_delta(obj, i, to);
                if current + d < current - 1e-12 {
                    let mut l = work.labels.clone();
                    l[i] = to;
                    consider(current + d, l);
                }
            }
        }
        for a in 0..work.k {
            for b in (a + 1)..work.k {
                let d = work.merge_delta(obj, a, b);
                if current + d < current - 1e-12 {
                    consider(current + d, merged_labels(&work.labels, a, b));
                }
            }
        }
        for l in split_candidates(&work.labels, psm) {
            let v = obj.value(&l);
            consider(v, l);
        }
        match cand {
            Some((_, l)) => {
                let l = canonical(&l);
                // recompute rather than trust accumulated deltas
                current = obj.value(&l);
                work = Work::new(l, psm);
                iterations += 1;
            }
            None => {
                converged = true;
                break;
            }
        }
    }
    Descent {
        labels: work.labels,
        loss: current,
        iterations,
        converged,
    }
}

/// Greedy minimization of the expected loss.
///
/// Runs a best-improvement descent over single-point moves, merges and
/// splits from three starts: the sampled partition with the lowest expected
/// loss, one cluster, and all singletons. The best end point is returned.
/// With [`Loss::ViExact`] every merge is scored against all samples, so the
/// singleton start is only used up to 50 points.
/// Each descent stops when nothing improves or after
/// `config.max_iterations` accepted moves. Ties go to the lexicographically
/// smallest canonical labelling.
pub fn minimize_loss(
    samples: &[Partition],
    loss: Loss,
    config: &GreedyConfig,
) -> Result<ClusteringEstimate> {
    let psm = similarity_from_samples(samples)?;
    let obj = Objective {
        loss,
        psm: &psm,
        samples,
    };
    let mut unique: Vec<&Partition> = samples.iter().collect();
    unique.sort();
    unique.dedup();
    let mut best = unique[0].clone();
    let mut best_loss = obj.value(best.labels());
    for p in &unique[1..] {
        let v = obj.value(p.labels());
        if v < best_loss - 1e-12 {
            best = (*p).clone();
            best_loss = v;
        }
    }
    let n = best.len();
    let mut starts = vec![best.labels().to_vec(), vec![0; n]];
    if loss != Loss::ViExact || n <= EXACT_SINGLETON_START_LIMIT {
        starts.push((0..n).collect());
    }
    let mut chosen: Option<Descent> = None;
    for start in starts {
        let d = descend(&obj, start, config.max_iterations);
        let better = match &chosen {
            None => true,
            Some(c) => {
                d.loss < c.loss - 1e-12 || ((d.loss - c.loss).abs() <= 1e-12 && d.labels < c.labels)
            }
        };
        if better {
            chosen = Some(d);
        }
    }
    let d = chosen.expect("at least one start");
    Ok(ClusteringEstimate {
        partition: Partition { labels: d.labels },
        expected_loss: d.loss,
        initial_loss: best_loss,
        iterations: d.iterations,
        converged: d.converged,
    })
}

pub fn minimize_loss_trace(
    trace: &ChainTrace,
    loss: Loss,
    config: &GreedyConfig,
) -> Result<ClusteringEstimate> {
    if trace.is_empty() {
        return Err(Error::invalid("trace has no kept iterations"));
    }
    minimize_loss(&trace_partitions(trace), loss, config)
}

/// Every set partition of `n` points as restricted growth strings.
pub fn enumerate_partitions(n: usize) -> Result<Vec<Partition>> {
    if n > 12 {
        return Err(Error::invalid("enumeration is limited to n <= 12"));
    }
    let mut out = Vec::new();
    if n == 0 {
        return Ok(out);
    }
    let mut a = vec![0usize; n];
    let mut b = vec![0usize; n]; // running maxima
    loop {
        out.push(Partition { labels: a.clone() });
        let mut i = n - 1;
        loop {
            if i == 0 {
                return Ok(out);
            }
            if a[i] <= b[i - 1] {
                a[i] += 1;
                b[i] = b[i - 1].max(a[i]);
                for j in (i + 1)..n {
                    a[j] = 0;
                    b[j] = b[i];
                }
                break;
            }
            i -= 1;
        }
    }
}
