//! The raw input series and elementwise preprocessing.

use crate::error::{OrdinalError, Result};

/// How pattern positions are enumerated near the end of the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum BoundaryMode {
    /// Positions `t` for which every index stays inside `1..=T`.
    #[default]
    Linear,
    /// All `T` positions, indices taken modulo `T`.
    Cyclic,
}

/// Treatment of missing values by [`cumulative_preprocess`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    /// A missing value makes every later running sum missing.
    #[default]
    Propagate,
    /// Missing values contribute zero; their positions are reported.
    SkipMissing,
}

/// A real-valued series `x_1..x_T`. Missing entries are stored as NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    sample_rate_hz: Option<f64>,
}

impl TimeSeries {
    /// Builds a series, rejecting empty input and infinite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(OrdinalError::domain(
                "time series must contain at least one value",
            ));
        }
        if let Some(pos) = values.iter().position(|v| v.is_infinite()) {
            return Err(OrdinalError::domain(format!(
                "entry {pos} is infinite; only finite values or NaN (missing) are allowed"
            )));
        }
        Ok(TimeSeries {
            values,
            sample_rate_hz: None,
        })
    }

    pub fn with_sample_rate(mut self, hz: f64) -> Result<Self> {
        if !(hz.is_finite() && hz > 0.0) {
            return Err(OrdinalError::domain(format!(
                "sample rate must be a positive real, got {hz}"
            )));
        }
        self.sample_rate_hz = Some(hz);
        Ok(self)
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false for a constructed series; provided for API symmetry.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sample_rate_hz(&self) -> Option<f64> {
        self.sample_rate_hz
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_nan()).count()
    }

    /// Copies `len` samples starting at `start` into a new series.
    pub fn slice(&self, start: usize, len: usize) -> Result<TimeSeries> {
        let end = start
            .checked_add(len)
            .filter(|&e| e <= self.values.len() && len > 0)
            .ok_or_else(|| {
                OrdinalError::domain(format!(
                    "slice {start}..{start}+{len} outside series of length {}",
                    self.values.len()
                ))
            })?;
        Ok(TimeSeries {
            values: self.values[start..end].to_vec(),
            sample_rate_hz: self.sample_rate_hz,
        })
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl TryFrom<Vec<f64>> for TimeSeries {
    type Error = OrdinalError;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        TimeSeries::new(values)
    }
}

/// Running sums of `x`, for series that represent densities (rainfall,
/// workload) where patterns of block sums are wanted.
///
/// Returns the summed series and the positions of missing inputs that were
/// treated as zero (always empty under [`MissingPolicy::Propagate`]).
pub fn cumulative_preprocess(x: &TimeSeries, policy: MissingPolicy) -> (TimeSeries, Vec<usize>) {
    let mut flagged = Vec::new();
    let mut acc = 0.0_f64;
    let values = x
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v.is_nan() {
                match policy {
                    MissingPolicy::Propagate => acc = f64::NAN,
                    MissingPolicy::SkipMissing => flagged.push(i),
                }
            } else {
                acc += v;
            }
            acc
        })
        .collect();
    (
        TimeSeries {
            values,
            sample_rate_hz: x.sample_rate_hz,
        },
        flagged,
    )
}
