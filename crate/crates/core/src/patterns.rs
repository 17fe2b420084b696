//! Counting of order patterns of length 2, 3 and general order `n`.
//!
//! Length-3 patterns are encoded by the symbol
//! `s = 2*((y0 > y1) + (y0 > y2)) + (y1 > y2)` which gives
//!
//! | symbol | pattern | relation                 |
//! |--------|---------|--------------------------|
//! | 0      | 123     | `y0 < y1 < y2`           |
//! | 1      | 132     | `y0 < y2 < y1`           |
//! | 2      | 213     | `y1 < y0 < y2`           |
//! | 3      | 231     | `y2 < y0 < y1`           |
//! | 4      | 312     | `y1 < y2 < y0`           |
//! | 5      | 321     | `y2 < y1 < y0`           |
//!
//! The symbol equals the lexicographic rank of the rank vector, so the
//! general order-`n` index agrees with it for `n = 3`.

use crate::error::{OrdinalError, Result};
use crate::series::{BoundaryMode, TimeSeries};

pub const P123: usize = 0;
pub const P132: usize = 1;
pub const P213: usize = 2;
pub const P231: usize = 3;
pub const P312: usize = 4;
pub const P321: usize = 5;

pub const PATTERN_LABELS: [&str; 6] = ["123", "132", "213", "231", "312", "321"];

/// Largest supported pattern order for [`count_patterns_n`].
pub const MAX_ORDER: usize = 7;

/// Up/down counts over delay `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    pub n12: u64,
    pub n21: u64,
    /// Pairs with a tie or a missing value.
    pub excluded: u64,
    pub delay: usize,
    pub mode: BoundaryMode,
}

impl PairCounts {
    pub fn valid(&self) -> u64 {
        self.n12 + self.n21
    }

    pub fn positions(&self) -> u64 {
        self.n12 + self.n21 + self.excluded
    }
}

/// Counts of the six length-3 patterns at one delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternHistogram {
    /// Indexed by symbol, see the module table.
    pub counts: [u64; 6],
    pub excluded_ties: u64,
    pub excluded_missing: u64,
    pub delay: usize,
    pub mode: BoundaryMode,
}

impl PatternHistogram {
    /// Number of counted (tie-free, complete) triples.
    pub fn support(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn excluded(&self) -> u64 {
        self.excluded_ties + self.excluded_missing
    }

    /// All triple positions inspected, counted or not.
    pub fn positions(&self) -> u64 {
        self.support() + self.excluded()
    }
}

/// Relative frequencies of the six length-3 patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternFrequencies {
    pub p: [f64; 6],
    /// The count basis `S`; zero when built from a bare probability vector.
    pub support: u64,
    pub delay: usize,
    counts: Option<[u64; 6]>,
}

impl PatternFrequencies {
    /// Wraps an arbitrary probability vector (not tied to any series).
    pub fn from_probabilities(p: [f64; 6]) -> Result<Self> {
        if p.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(OrdinalError::domain(format!(
                "pattern frequencies must lie in [0,1], got {p:?}"
            )));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(OrdinalError::domain(format!(
                "pattern frequencies must sum to 1, got {sum}"
            )));
        }
        Ok(PatternFrequencies {
            p,
            support: 0,
            delay: 0,
            counts: None,
        })
    }

    /// The integer counts behind these frequencies, when known.
    pub fn counts(&self) -> Option<&[u64; 6]> {
        self.counts.as_ref()
    }
}

/// Histogram of order-`n` patterns, indexed by lexicographic rank of the
/// rank vector (`12..n` has index 0, `n..21` has index `n! - 1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderNHistogram {
    pub order: usize,
    pub counts: Vec<u64>,
    pub excluded: u64,
    pub delay: usize,
    pub mode: BoundaryMode,
}

impl OrderNHistogram {
    pub fn support(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub(crate) fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Length-3 symbol of a tie-free, complete triple.
#[inline(always)]
pub(crate) fn symbol3(y0: f64, y1: f64, y2: f64) -> usize {
    2 * ((y0 > y1) as usize + (y0 > y2) as usize) + (y1 > y2) as usize
}

fn check_pair_delay(len: usize, d: usize, mode: BoundaryMode) -> Result<()> {
    let max = match mode {
        BoundaryMode::Linear => len.saturating_sub(1),
        BoundaryMode::Cyclic => len,
    };
    if d == 0 || d > max {
        return Err(OrdinalError::domain(format!(
            "delay {d} out of range 1..={max} for pair counting on {len} samples ({mode:?})"
        )));
    }
    Ok(())
}

pub(crate) fn check_triple_delay(len: usize, d: usize, mode: BoundaryMode) -> Result<()> {
    let ok = match mode {
        BoundaryMode::Linear => d >= 1 && len > 2 * d,
        BoundaryMode::Cyclic => d >= 1,
    };
    if !ok {
        return Err(OrdinalError::domain(format!(
            "delay {d} invalid for triples on {len} samples ({mode:?}); linear mode needs 1 <= d <= {}",
            len.saturating_sub(1) / 2
        )));
    }
    Ok(())
}

/// Counts increases and decreases `x_t` vs `x_{t+d}`.
pub fn count_pairs(x: &TimeSeries, d: usize, mode: BoundaryMode) -> Result<PairCounts> {
    check_pair_delay(x.len(), d, mode)?;
    Ok(pairs_in(x.values(), d, mode))
}

pub(crate) fn pairs_in(x: &[f64], d: usize, mode: BoundaryMode) -> PairCounts {
    let len = x.len();
    let (mut n12, mut n21, mut excluded) = (0u64, 0u64, 0u64);
    let mut tally = |a: f64, b: f64| {
        if a < b {
            n12 += 1;
        } else if a > b {
            n21 += 1;
        } else {
            // ties and NaN comparisons both land here
            excluded += 1;
        }
    };
    match mode {
        BoundaryMode::Linear => {
            for (a, b) in x.iter().zip(&x[d..]) {
                tally(*a, *b);
            }
        }
        BoundaryMode::Cyclic => {
            for t in 0..len {
                tally(x[t], x[(t + d) % len]);
            }
        }
    }
    PairCounts {
        n12,
        n21,
        excluded,
        delay: d,
        mode,
    }
}

/// Counts the six length-3 patterns of `(x_t, x_{t+d}, x_{t+2d})`.
///
/// Triples touching a missing value go to `excluded_missing`, even if they
/// also contain a tie; remaining triples with any equality go to
/// `excluded_ties`.
pub fn count_patterns3(x: &TimeSeries, d: usize, mode: BoundaryMode) -> Result<PatternHistogram> {
    check_triple_delay(x.len(), d, mode)?;
    Ok(patterns3_in(x.values(), d, mode))
}

pub(crate) fn patterns3_in(x: &[f64], d: usize, mode: BoundaryMode) -> PatternHistogram {
    let mut counts = [0u64; 6];
    let (mut ties, mut missing) = (0u64, 0u64);
    let mut tally = |y0: f64, y1: f64, y2: f64| {
        if y0.is_nan() || y1.is_nan() || y2.is_nan() {
            missing += 1;
        } else if y0 == y1 || y0 == y2 || y1 == y2 {
            ties += 1;
        } else {
            counts[symbol3(y0, y1, y2)] += 1;
        }
    };
    match mode {
        BoundaryMode::Linear => {
            let m = x.len() - 2 * d;
            for ((&y0, &y1), &y2) in x[..m].iter().zip(&x[d..d + m]).zip(&x[2 * d..]) {
                tally(y0, y1, y2);
            }
        }
        BoundaryMode::Cyclic => {
            let len = x.len();
            for t in 0..len {
                tally(x[t], x[(t + d) % len], x[(t + 2 * d) % len]);
            }
        }
    }
    PatternHistogram {
        counts,
        excluded_ties: ties,
        excluded_missing: missing,
        delay: d,
        mode,
    }
}

/// Relative frequencies `p_i = counts_i / S`.
pub fn to_frequencies(h: &PatternHistogram) -> Result<PatternFrequencies> {
    let s = h.support();
    if s == 0 {
        return Err(OrdinalError::NoValidTriples { delay: h.delay });
    }
    let sf = s as f64;
    Ok(PatternFrequencies {
        p: h.counts.map(|c| c as f64 / sf),
        support: s,
        delay: h.delay,
        counts: Some(h.counts),
    })
}

/// Counts order-`n` patterns of `(x_t, x_{t+d}, ..., x_{t+(n-1)d})`.
pub fn count_patterns_n(
    x: &TimeSeries,
    d: usize,
    order: usize,
    mode: BoundaryMode,
) -> Result<OrderNHistogram> {
    if !(2..=MAX_ORDER).contains(&order) {
        return Err(OrdinalError::domain(format!(
            "pattern order {order} outside 2..={MAX_ORDER}"
        )));
    }
    let len = x.len();
    let positions = match mode {
        BoundaryMode::Linear => {
            let span = (order - 1).saturating_mul(d);
            if d == 0 || span >= len {
                return Err(OrdinalError::domain(format!(
                    "delay {d} too large for order {order} on {len} samples"
                )));
            }
            len - span
        }
        BoundaryMode::Cyclic => {
            if d == 0 {
                return Err(OrdinalError::domain("delay must be at least 1"));
            }
            len
        }
    };

    let mut weights = [0usize; MAX_ORDER];
    for (i, w) in weights.iter_mut().take(order).enumerate() {
        *w = factorial(order - 1 - i);
    }
    let v = x.values();
    let mut counts = vec![0u64; factorial(order)];
    let mut excluded = 0u64;
    let mut buf = [0.0f64; MAX_ORDER];
    'pos: for t in 0..positions {
        for (k, slot) in buf.iter_mut().take(order).enumerate() {
            let y = v[(t + k * d) % len];
            if y.is_nan() {
                excluded += 1;
                continue 'pos;
            }
            *slot = y;
        }
        let w = &buf[..order];
        let mut index = 0usize;
        for i in 0..order {
            let mut smaller = 0usize;
            for j in i + 1..order {
                if w[j] == w[i] {
                    excluded += 1;
                    continue 'pos;
                }
                smaller += (w[j] < w[i]) as usize;
            }
            index += smaller * weights[i];
        }
        counts[index] += 1;
    }
    Ok(OrderNHistogram {
        order,
        counts,
        excluded,
        delay: d,
        mode,
    })
}
