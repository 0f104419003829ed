use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Censoring status of an [`Observation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CensoringKind {
    Exact,
    LeftCensored,
    RightCensored,
    Interval,
}

/// One data point, possibly censored.
///
/// A left-censored value is only known to be `≤ right`, a right-censored one
/// `> left`. Intervals are `(left, right]`; an interval with `left == right`
/// is accepted and behaves exactly like an exact observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observation {
    Exact { value: f64 },
    LeftCensored { right: f64 },
    RightCensored { left: f64 },
    Interval { left: f64, right: f64 },
}

impl Observation {
    pub fn exact(value: f64) -> Result<Self> {
        check_finite(value)?;
        Ok(Self::Exact { value })
    }

    pub fn left_censored(right: f64) -> Result<Self> {
        if right.is_nan() || right == f64::NEG_INFINITY {
            return Err(Error::Data(format!("invalid left-censoring bound {right}")));
        }
        Ok(Self::LeftCensored { right })
    }

    pub fn right_censored(left: f64) -> Result<Self> {
        if left.is_nan() || left == f64::INFINITY {
            return Err(Error::Data(format!("invalid right-censoring bound {left}")));
        }
        Ok(Self::RightCensored { left })
    }

    /// Interval `(left, right]`; `left == right` gives a degenerate interval.
    pub fn interval(left: f64, right: f64) -> Result<Self> {
        check_finite(left)?;
        check_finite(right)?;
        if left > right {
            return Err(Error::Data(format!(
                "interval left {left} exceeds right {right}"
            )));
        }
        Ok(Self::Interval { left, right })
    }

    /// Reads the `left,right` encoding: equal bounds are exact, a missing
    /// left bound is left-censoring and a missing right bound right-censoring.
    pub fn from_bounds(left: Option<f64>, right: Option<f64>) -> Result<Self> {
        match (left, right) {
            (Some(l), Some(r)) if l == r => Self::exact(l),
            (Some(l), Some(r)) => Self::interval(l, r),
            (None, Some(r)) => Self::left_censored(r),
            (Some(l), None) => Self::right_censored(l),
            (None, None) => Err(Error::Data("observation has neither bound".into())),
        }
    }

    pub fn kind(&self) -> CensoringKind {
        match self {
            Self::Exact { .. } => CensoringKind::Exact,
            Self::LeftCensored { .. } => CensoringKind::LeftCensored,
            Self::RightCensored { .. } => CensoringKind::RightCensored,
            Self::Interval { .. } => CensoringKind::Interval,
        }
    }

    pub fn left(&self) -> Option<f64> {
        match *self {
            Self::Exact { value } => Some(value),
            Self::RightCensored { left } | Self::Interval { left, .. } => Some(left),
            Self::LeftCensored { .. } => None,
        }
    }

    pub fn right(&self) -> Option<f64> {
        match *self {
            Self::Exact { value } => Some(value),
            Self::LeftCensored { right } | Self::Interval { right, .. } => Some(right),
            Self::RightCensored { .. } => None,
        }
    }

    /// The point value of exact observations and degenerate intervals.
    pub fn point(&self) -> Option<f64> {
        match *self {
            Self::Exact { value } => Some(value),
            Self::Interval { left, right } if left == right => Some(left),
            _ => None,
        }
    }

    pub fn is_censored(&self) -> bool {
        self.point().is_none()
    }

    /// A single representative value: the point, the interval midpoint, or
    /// the known bound of a one-sided observation.
    pub fn location_summary(&self) -> f64 {
        match *self {
            Self::Exact { value } => value,
            Self::Interval { left, right } => 0.5 * (left + right),
            Self::LeftCensored { right } => right,
            Self::RightCensored { left } => left,
        }
    }

    /// Degenerate-interval re-encoding of an exact observation.
    pub fn as_degenerate_interval(&self) -> Self {
        match *self {
            Self::Exact { value } => Self::Interval {
                left: value,
                right: value,
            },
            other => other,
        }
    }
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Data(format!("non-finite observation value {x}")))
    }
}

/// Finite values among the observation bounds, used for grids and summaries.
pub fn finite_bounds(data: &[Observation]) -> Vec<f64> {
    data.iter()
        .flat_map(|o| [o.left(), o.right()])
        .flatten()
        .filter(|x| x.is_finite())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_encoding() {
        assert_eq!(
            Observation::from_bounds(Some(3.5), Some(3.5)).unwrap(),
            Observation::Exact { value: 3.5 }
        );
        assert_eq!(
            Observation::from_bounds(None, Some(2.0)).unwrap(),
            Observation::LeftCensored { right: 2.0 }
        );
        assert_eq!(
            Observation::from_bounds(Some(1.0), None).unwrap().kind(),
            CensoringKind::RightCensored
        );
        assert!(Observation::from_bounds(Some(2.0), Some(1.0)).is_err());
        assert!(Observation::from_bounds(None, None).is_err());
    }

    #[test]
    fn degenerate_interval_has_point() {
        let o = Observation::exact(1.5).unwrap().as_degenerate_interval();
        assert_eq!(o.kind(), CensoringKind::Interval);
        assert_eq!(o.point(), Some(1.5));
        assert!(!o.is_censored());
    }
}
