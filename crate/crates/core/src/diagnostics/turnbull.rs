use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Observation;

/// Innermost interval of the Turnbull estimate.
///
/// Censored observations are read as half-open `(left, right]`, exact
/// values as the closed point `[x, x]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurnbullInterval {
    pub left: f64,
    pub right: f64,
    pub left_open: bool,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnbullEstimate {
    pub intervals: Vec<TurnbullInterval>,
    pub iterations: usize,
    pub converged: bool,
    /// For exact-only data, cumulative counts per interval so the CDF is
    /// returned as a count ratio with no summation error.
    cumulative_counts: Option<Vec<usize>>,
    n: usize,
}

impl TurnbullEstimate {
    /// Step CDF with each interval's mass placed at its right end; right-continuous.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.intervals.partition_point(|iv| iv.right <= x);
        if k == 0 {
            return 0.0;
        }
        match &self.cumulative_counts {
            Some(c) => c[k - 1] as f64 / self.n as f64,
            None => self.intervals[..k]
                .iter()
                .map(|iv| iv.mass)
                .sum::<f64>()
                .min(1.0),
        }
    }

    /// CDF just below `x`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x.next_down())
    }

    pub fn total_mass(&self) -> f64 {
        self.intervals.iter().map(|iv| iv.mass).sum()
    }
}

/// Endpoint position: closed ends sit at `(x, 0)`, open left ends at `(x, 1)`,
/// so an exact value sorts before a censored interval opening at it.
type Key = (f64, u8);

fn cmp_key(a: &Key, b: &Key) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

fn interval_keys(obs: &Observation) -> (Key, Key) {
    match *obs {
        Observation::Exact { value } => ((value, 0), (value, 0)),
        Observation::LeftCensored { right } => ((f64::NEG_INFINITY, 1), (right, 0)),
        Observation::RightCensored { left } => ((left, 1), (f64::INFINITY, 0)),
        Observation::Interval { left, right } if left == right => ((left, 0), (left, 0)),
        Observation::Interval { left, right } => ((left, 1), (right, 0)),
    }
}

/// Nonparametric maximum likelihood CDF for arbitrarily censored data by
/// self-consistency EM over the innermost intervals.
///
/// Iterates until the largest mass change is below `tol`; after `max_iter`
/// iterations the current masses are returned with `converged = false`.
pub fn turnbull(data: &[Observation], tol: f64, max_iter: usize) -> Result<TurnbullEstimate> {
    if data.is_empty() {
        return Err(Error::invalid(
            "Turnbull estimate needs at least one observation",
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let keys: Vec<(Key, Key)> = data.iter().map(interval_keys).collect();
    // endpoints tagged 0 = left, 1 = right; lefts first on exact ties
    let mut ends: Vec<(Key, u8)> = keys
        .iter()
        .flat_map(|&(l, r)| [(l, 0u8), (r, 1u8)])
        .collect();
    ends.sort_by(|a, b| cmp_key(&a.0, &b.0).then(a.1.cmp(&b.1)));
    let mut inner: Vec<(Key, Key)> = Vec::new();
    for w in ends.windows(2) {
        if w[0].1 == 0 && w[1].1 == 1 {
            inner.push((w[0].0, w[1].0));
        }
    }
    inner.dedup_by(|a, b| cmp_key(&a.0, &b.0).is_eq() && cmp_key(&a.1, &b.1).is_eq());
    let n = data.len();
    let m = inner.len();
    // incidence lists: the innermost intervals inside each observation
    let incidence: Vec<Vec<usize>> = keys
        .iter()
        .map(|(l, r)| {
            (0..m)
                .filter(|&j| cmp_key(&inner[j].0, l).is_ge() && cmp_key(&inner[j].1, r).is_le())
                .collect()
        })
        .collect();
    let mut mass = vec![1.0 / m as f64; m];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut next = vec![0.0; m];
        for cols in &incidence {
            let denom: f64 = cols.iter().map(|&j| mass[j]).sum();
            if denom > 0.0 {
                for &j in cols {
                    next[j] += mass[j] / denom;
                }
            }
        }
        let total: f64 = next.iter().sum();
        for x in next.iter_mut() {
            *x /= total;
        }
        let change = mass
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        mass = next;
        iterations += 1;
        if change < tol {
            converged = true;
            break;
        }
    }
    let exact_only = data.iter().all(|o| o.point().is_some());
    let cumulative_counts = exact_only.then(|| {
        let mut counts = vec![0usize; m];
        for cols in &incidence {
            counts[cols[0]] += 1;
        }
        counts
            .iter()
            .scan(0, |s, c| {
                *s += c;
                Some(*s)
            })
            .collect()
    });
    let intervals = inner
        .iter()
        .zip(&mass)
        .map(|(&(l, r), &p)| TurnbullInterval {
            left: l.0,
            right: r.0,
            left_open: l.1 == 1,
            mass: p,
        })
        .collect();
    Ok(TurnbullEstimate {
        intervals,
        iterations,
        converged,
        cumulative_counts,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_data_is_the_ecdf() {
        let data: Vec<Observation> = [3.0, 1.0, 2.0, 2.0]
            .iter()
            .map(|&x| Observation::exact(x).unwrap())
            .collect();
        let t = turnbull(&data, 1e-10, 100).unwrap();
        assert_eq!(t.intervals.len(), 3);
        assert_eq!(t.cdf(0.5), 0.0);
        assert_eq!(t.cdf(1.0), 0.25);
        assert_eq!(t.cdf(2.0), 0.75);
        assert_eq!(t.cdf(2.5), 0.75);
        assert_eq!(t.cdf(3.0), 1.0);
        assert!(t.converged);
    }

    #[test]
    fn single_interval_takes_all_mass() {
        let t = turnbull(&[Observation::interval(0.0, 1.0).unwrap()], 1e-10, 100).unwrap();
        assert_eq!(t.intervals.len(), 1);
        assert_eq!(
            (
                t.intervals[0].left,
                t.intervals[0].right,
                t.intervals[0].mass
            ),
            (0.0, 1.0, 1.0)
        );
    }

    #[test]
    fn interval_touching_exact_point() {
        // (1, 2] does not contain 1, so the exact point keeps its own interval
        let data = vec![
            Observation::exact(1.0).unwrap(),
            Observation::interval(1.0, 2.0).unwrap(),
        ];
        let t = turnbull(&data, 1e-12, 1000).unwrap();
        assert_eq!(t.intervals.len(), 2);
        assert!(t.intervals[1].left_open);
        assert!((t.cdf(1.0) - 0.5).abs() < 1e-12);
    }
}
