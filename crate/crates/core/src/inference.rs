//! Accuracy of ordinal functions: the `c / sqrt(n)` error model, the null
//! bound for the distance to white noise, and the exact median (sign) test.

use crate::error::{OrdinalError, Result};
use crate::functions::mean_std;

/// Standard deviation model `sigma = c / sqrt(n)` for a function estimated
/// from windows of length `n`. `k = c^(2/3)` is the block length of the
/// repeated-coin model that produces the same `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorModel {
    pub c: f64,
    pub n: usize,
    pub sigma: f64,
    pub k: f64,
}

impl ErrorModel {
    pub fn new(c: f64, n: usize) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) || n == 0 {
            return Err(OrdinalError::domain(format!(
                "error model needs c > 0 and n >= 1, got c = {c}, n = {n}"
            )));
        }
        Ok(ErrorModel {
            c,
            n,
            sigma: c / (n as f64).sqrt(),
            k: c.powf(2.0 / 3.0),
        })
    }
}

/// Estimates `c` from values of one function on equal-length windows.
///
/// Uses the unbiased sample standard deviation.
pub fn estimate_c(samples: &[f64], n: usize) -> Result<ErrorModel> {
    let (_, sd) = mean_std(samples).ok_or_else(|| {
        OrdinalError::domain(format!(
            "estimating c needs at least 2 window values, got {}",
            samples.len()
        ))
    })?;
    if n == 0 {
        return Err(OrdinalError::domain("window length must be positive"));
    }
    if sd == 0.0 || !sd.is_finite() {
        return Err(OrdinalError::domain(format!(
            "window values have degenerate spread ({sd}); c is undefined"
        )));
    }
    ErrorModel::new(sd * (n as f64).sqrt(), n)
}

/// Smallest window length with a 95% half-width `2c/sqrt(n)` at most
/// `target_halfwidth`.
pub fn required_n(target_halfwidth: f64, c: f64) -> Result<u64> {
    if target_halfwidth.is_nan() || target_halfwidth <= 0.0 || !(c.is_finite() && c > 0.0) {
        return Err(OrdinalError::domain(format!(
            "need halfwidth > 0 and c > 0, got {target_halfwidth}, {c}"
        )));
    }
    if target_halfwidth.is_infinite() {
        return Ok(1);
    }
    let fits = |n: u64| 2.0 * c / (n as f64).sqrt() <= target_halfwidth;
    let mut n = ((2.0 * c / target_halfwidth).powi(2).ceil() as u64).max(1);
    while n > 1 && fits(n - 1) {
        n -= 1;
    }
    while !fits(n) {
        n += 1;
    }
    Ok(n)
}

/// Standard deviation `7/n` of the distance to white noise under the null,
/// and the gate `15/n` below which a cell is treated as white noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullBound {
    pub sigma: f64,
    pub gate: f64,
}

pub fn delta_sq_null_bound(n: usize) -> Result<NullBound> {
    if n < 3 {
        return Err(OrdinalError::domain(format!(
            "window length must be at least 3, got {n}"
        )));
    }
    let nf = n as f64;
    Ok(NullBound {
        sigma: 7.0 / nf,
        gate: 15.0 / nf,
    })
}

/// True when the delay is large enough relative to the window that the
/// additional `d/n` boundary error is no longer negligible.
pub fn large_delay_warning(d: usize, n: usize) -> bool {
    n == 0 || d as f64 / n as f64 > 0.05
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sided {
    /// Alternative: the median is positive.
    One,
    #[default]
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedianTestResult {
    pub positives: u64,
    pub trials: u64,
    pub p_value: f64,
    pub sided: Sided,
}

/// Splits window values into signs; exact zeros are dropped and counted.
pub fn signs_of(values: &[f64]) -> (Vec<Sign>, usize) {
    let mut zeros = 0;
    let signs = values
        .iter()
        .filter_map(|&v| {
            if v > 0.0 {
                Some(Sign::Positive)
            } else if v < 0.0 {
                Some(Sign::Negative)
            } else {
                zeros += 1;
                None
            }
        })
        .collect();
    (signs, zeros)
}

/// Exact binomial test of a zero median under a fair-coin null.
pub fn median_test(signs: &[Sign], sided: Sided) -> Result<MedianTestResult> {
    let positives = signs.iter().filter(|s| **s == Sign::Positive).count() as u64;
    median_test_counts(positives, signs.len() as u64, sided)
}

pub fn median_test_counts(positives: u64, trials: u64, sided: Sided) -> Result<MedianTestResult> {
    if trials == 0 {
        return Err(OrdinalError::domain("median test needs at least one sign"));
    }
    if positives > trials {
        return Err(OrdinalError::domain(format!(
            "{positives} positives out of {trials} trials"
        )));
    }
    let p_value = match sided {
        Sided::One => upper_tail(positives, trials),
        Sided::Two => {
            let lower = upper_tail(trials - positives, trials);
            (2.0 * upper_tail(positives, trials).min(lower)).min(1.0)
        }
    };
    Ok(MedianTestResult {
        positives,
        trials,
        p_value,
        sided,
    })
}

/// `P(X >= k)` for `X ~ Binomial(n, 1/2)`.
pub(crate) fn upper_tail(k: u64, n: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if n <= 120 {
        // exact integer sum, one rounding at the end
        let mut coef: u128 = 1;
        let mut tail: u128 = 0;
        for j in 0..=n {
            if j >= k {
                tail += coef;
            }
            coef = coef * (n - j) as u128 / (j + 1) as u128;
        }
        return tail as f64 / 2f64.powi(n as i32);
    }
    // log-space with a running maximum for large n
    let nf = n as f64;
    let ln_half_n = -nf * std::f64::consts::LN_2;
    let mut ln_coef = 0.0f64;
    let mut logs = Vec::with_capacity((n - k + 1) as usize);
    for j in 0..=n {
        if j >= k {
            logs.push(ln_coef + ln_half_n);
        }
        ln_coef += ((n - j) as f64).ln() - ((j + 1) as f64).ln();
    }
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = logs.iter().map(|l| (l - m).exp()).sum();
    (m + s.ln()).exp().min(1.0)
}
