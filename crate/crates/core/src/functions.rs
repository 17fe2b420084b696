//! Scalar functions of the pattern distribution at a single delay.
//!
//! When values are derived from integer counts every linear combination is
//! formed on the integer numerators first, so that structural zeros (for
//! example `epsilon` in cyclic mode) come out as exact zeros and the shares
//! of the partition sum to one up to a single rounding.

use crate::error::{OrdinalError, Result};
use crate::patterns::{
    check_triple_delay, factorial, pairs_in, patterns3_in, to_frequencies, OrderNHistogram,
    PairCounts, PatternFrequencies, P123, P132, P213, P231, P312, P321,
};
use crate::series::{BoundaryMode, TimeSeries};

/// `ln 6`, the entropy of white noise for length-3 patterns.
pub const LN_6: f64 = 1.791_759_469_228_055;

/// Integer numerators of the pattern functions over the common basis `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Numerators {
    /// `3 (n123 + n321) - S`, so that `tau = tau / (3 S)`.
    tau: i128,
    beta: i128,
    gamma: i128,
    delta: i128,
    epsilon: i128,
    /// `sum (6 n_i - S)^2`, so that `delta_sq = dist / (36 S^2)`.
    dist: i128,
}

impl Numerators {
    fn from_counts(c: &[u64; 6]) -> Self {
        let n = c.map(|v| v as i128);
        let s: i128 = n.iter().sum();
        Numerators {
            tau: 3 * (n[P123] + n[P321]) - s,
            beta: n[P123] - n[P321],
            gamma: n[P213] + n[P231] - n[P132] - n[P312],
            delta: n[P132] + n[P213] - n[P231] - n[P312],
            epsilon: n[P231] + n[P132] - n[P213] - n[P312],
            dist: n.iter().map(|&v| (6 * v - s).pow(2)).sum(),
        }
    }
}

/// All length-3 ordinal functions at one delay.
#[derive(Debug, Clone, PartialEq)]
pub struct OrdinalValues {
    /// Up-down balance `p123 - p321`.
    pub beta: f64,
    /// Persistence `p123 + p321 - 1/3`.
    pub tau: f64,
    /// Time irreversibility `p213 + p231 - p132 - p312`.
    pub gamma: f64,
    /// Up-down scaling `p132 + p213 - p231 - p312`.
    pub delta: f64,
    /// Local maxima minus local minima, `p231 + p132 - p213 - p312`.
    pub epsilon: f64,
    /// Squared distance to the uniform distribution.
    pub delta_sq: f64,
    /// Permutation entropy (natural log).
    pub entropy: f64,
    /// `ln 6 - entropy`.
    pub divergence: f64,
    pub frequencies: [f64; 6],
    pub delay: usize,
    pub support: u64,
    numerators: Option<Numerators>,
}

/// Normalised shares of the distance to white noise.
///
/// When `gated` is set the shares are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionComponents {
    pub tau_tilde: f64,
    pub beta_tilde: f64,
    pub gamma_tilde: f64,
    pub delta_tilde: f64,
    /// `epsilon^2 / (4 delta_sq)`, the part not covered by the four shares.
    pub residual: f64,
    pub gated: bool,
    /// Centered frequencies `p_i - 1/6`.
    pub q: [f64; 6],
}

impl PartitionComponents {
    pub fn four_sum(&self) -> f64 {
        self.tau_tilde + self.beta_tilde + self.gamma_tilde + self.delta_tilde
    }
}

/// Entropy-type summary of an order-`n` histogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropySummary {
    pub entropy: f64,
    pub divergence: f64,
    pub delta_sq: f64,
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn entropy_of(p: impl IntoIterator<Item = f64>) -> f64 {
    let h = compensated_sum(p.into_iter().filter(|&v| v > 0.0).map(|v| -v * v.ln()));
    h.max(0.0)
}

/// `p12 - p21` over tie-free pairs.
pub fn beta_pairwise(c: &PairCounts) -> Result<f64> {
    let valid = c.valid();
    if valid == 0 {
        return Err(OrdinalError::AllPairsExcluded { delay: c.delay });
    }
    Ok((c.n12 as i128 - c.n21 as i128) as f64 / valid as f64)
}

/// Computes every length-3 function from one frequency vector.
pub fn ordinal_values(f: &PatternFrequencies) -> OrdinalValues {
    let p = f.p;
    let entropy = entropy_of(p);
    let divergence = (LN_6 - entropy).max(0.0);
    match f.counts() {
        Some(counts) => {
            let num = Numerators::from_counts(counts);
            let s = f.support as f64;
            OrdinalValues {
                beta: num.beta as f64 / s,
                tau: num.tau as f64 / (3.0 * s),
                gamma: num.gamma as f64 / s,
                delta: num.delta as f64 / s,
                epsilon: num.epsilon as f64 / s,
                delta_sq: num.dist as f64 / (36.0 * s * s),
                entropy,
                divergence,
                frequencies: p,
                delay: f.delay,
                support: f.support,
                numerators: Some(num),
            }
        }
        None => OrdinalValues {
            beta: p[P123] - p[P321],
            tau: p[P123] + p[P321] - 1.0 / 3.0,
            gamma: p[P213] + p[P231] - p[P132] - p[P312],
            delta: p[P132] + p[P213] - p[P231] - p[P312],
            epsilon: p[P231] + p[P132] - p[P213] - p[P312],
            delta_sq: p.iter().map(|v| (v - 1.0 / 6.0).powi(2)).sum(),
            entropy,
            divergence,
            frequencies: p,
            delay: f.delay,
            support: f.support,
            numerators: None,
        },
    }
}

/// Shares `3 tau^2`, `2 beta^2`, `gamma^2`, `delta^2` and `epsilon^2` of
/// `4 delta_sq`. Cells with `delta_sq < gate_threshold` are gated.
pub fn partition(v: &OrdinalValues, gate_threshold: f64) -> Result<PartitionComponents> {
    if gate_threshold.is_nan() || gate_threshold < 0.0 {
        return Err(OrdinalError::domain(format!(
            "gate threshold must be non-negative, got {gate_threshold}"
        )));
    }
    let q = v.frequencies.map(|p| p - 1.0 / 6.0);
    if v.delta_sq < gate_threshold {
        return Ok(PartitionComponents {
            tau_tilde: f64::NAN,
            beta_tilde: f64::NAN,
            gamma_tilde: f64::NAN,
            delta_tilde: f64::NAN,
            residual: f64::NAN,
            gated: true,
            q,
        });
    }
    if v.delta_sq == 0.0 {
        return Err(OrdinalError::DivisionGuard);
    }
    let shares = match v.numerators {
        Some(n) => {
            let dist = n.dist as f64;
            [
                (3 * n.tau * n.tau) as f64 / dist,
                (18 * n.beta * n.beta) as f64 / dist,
                (9 * n.gamma * n.gamma) as f64 / dist,
                (9 * n.delta * n.delta) as f64 / dist,
                (9 * n.epsilon * n.epsilon) as f64 / dist,
            ]
        }
        None => {
            let four = 4.0 * v.delta_sq;
            [
                3.0 * v.tau * v.tau / four,
                v.beta * v.beta / (2.0 * v.delta_sq),
                v.gamma * v.gamma / four,
                v.delta * v.delta / four,
                v.epsilon * v.epsilon / four,
            ]
        }
    };
    Ok(PartitionComponents {
        tau_tilde: shares[0],
        beta_tilde: shares[1],
        gamma_tilde: shares[2],
        delta_tilde: shares[3],
        residual: shares[4],
        gated: false,
        q,
    })
}

/// Quadratic approximation `ln 6 - 3 delta_sq` of the permutation entropy.
/// Only meaningful near the uniform distribution.
pub fn taylor_entropy_approx(delta_sq: f64) -> f64 {
    LN_6 - 3.0 * delta_sq
}

/// Entropy, divergence and distance to white noise for order-`n` patterns.
pub fn entropy_n(h: &OrderNHistogram) -> Result<EntropySummary> {
    let s = h.support();
    if s == 0 {
        return Err(OrdinalError::NoValidWindows {
            order: h.order,
            delay: h.delay,
        });
    }
    let nf = factorial(h.order) as i128;
    let sf = s as f64;
    let entropy = entropy_of(h.counts.iter().map(|&c| c as f64 / sf));
    let ln_nf = (2..=h.order).map(|k| (k as f64).ln()).sum::<f64>();
    let dist: i128 = h
        .counts
        .iter()
        .map(|&c| (nf * c as i128 - s as i128).pow(2))
        .sum();
    let denom = (nf as f64) * (nf as f64) * sf * sf;
    Ok(EntropySummary {
        entropy,
        divergence: (ln_nf - entropy).max(0.0),
        delta_sq: dist as f64 / denom,
    })
}

/// Pearson correlation of `(x_t, x_{t+d})` over pairs where both values are
/// present. `None` when either side has zero variance.
pub fn autocorr(x: &TimeSeries, d: usize) -> Result<Option<f64>> {
    if d == 0 || d >= x.len() {
        return Err(OrdinalError::domain(format!(
            "lag {d} out of range 1..{} for autocorrelation",
            x.len()
        )));
    }
    autocorr_in(x.values(), d)
}

pub(crate) fn autocorr_in(x: &[f64], d: usize) -> Result<Option<f64>> {
    let pairs = || {
        x.iter()
            .zip(&x[d..])
            .filter(|(a, b)| !a.is_nan() && !b.is_nan())
            .map(|(&a, &b)| (a, b))
    };
    let (mut n, mut sa, mut sb) = (0usize, 0.0, 0.0);
    for (a, b) in pairs() {
        n += 1;
        sa += a;
        sb += b;
    }
    if n < 2 {
        return Err(OrdinalError::domain(format!(
            "autocorrelation at lag {d} needs at least 2 complete pairs, found {n}"
        )));
    }
    let (ma, mb) = (sa / n as f64, sb / n as f64);
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (a, b) in pairs() {
        let (da, db) = (a - ma, b - mb);
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if va == 0.0 || vb == 0.0 {
        return Ok(None);
    }
    Ok(Some((cov / (va.sqrt() * vb.sqrt())).clamp(-1.0, 1.0)))
}

/// One identity check: the signed discrepancy and the bound it must obey.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub discrepancy: f64,
    /// Bound for a tie-free, complete series (zero in cyclic mode).
    pub nominal_bound: f64,
    /// Additional room caused by excluded pairs and triples.
    pub tie_slack: f64,
}

impl IdentityCheck {
    pub fn bound(&self) -> f64 {
        self.nominal_bound + self.tie_slack
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.discrepancy.abs() <= self.bound() + tol
    }
}

/// Discrepancies of the pattern identities at one delay.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub delay: usize,
    pub mode: BoundaryMode,
    /// `p12 - (p123 + p231 + p132)`.
    pub up_first: IdentityCheck,
    /// `p12 - (p123 + p213 + p312)`.
    pub up_second: IdentityCheck,
    /// `epsilon` itself; it vanishes when the two identities above agree.
    pub epsilon: IdentityCheck,
    /// Pairwise `beta` minus `p123 - p321`.
    pub beta: IdentityCheck,
    /// `beta(2d)` (pairwise) minus `beta(d) + delta(d)`.
    pub beta_doubling: IdentityCheck,
    pub pairs: PairCounts,
    pub pairs_double: PairCounts,
    pub triples_support: u64,
}

impl IdentityReport {
    pub fn checks(&self) -> [(&'static str, IdentityCheck); 5] {
        [
            ("up_first", self.up_first),
            ("up_second", self.up_second),
            ("epsilon", self.epsilon),
            ("beta", self.beta),
            ("beta_doubling", self.beta_doubling),
        ]
    }

    pub fn all_hold(&self, tol: f64) -> bool {
        self.checks().iter().all(|(_, c)| c.holds(tol))
    }
}

/// Checks the pattern identities relating pair and triple frequencies.
///
/// Bounds come from the index sets actually used: the frequency of a
/// property over a set `U` and over a subset `V` differ by at most
/// `|U \ V| / |U|`, twice that for differences of two frequencies.
/// Without exclusions this gives `d/(T-d)` for the two `p12` identities,
/// `2d/(T-d)` for `beta`, `min(1, d/(T-2d))` for `epsilon` and zero for
/// the doubling relation.
pub fn check_identities(x: &TimeSeries, d: usize, mode: BoundaryMode) -> Result<IdentityReport> {
    let len = x.len();
    check_triple_delay(len, d, mode)?;
    if mode == BoundaryMode::Cyclic && 2 * d > len {
        return Err(OrdinalError::domain(format!(
            "cyclic identities need 2d <= T, got d = {d}, T = {len}"
        )));
    }
    let v = x.values();
    let h = patterns3_in(v, d, mode);
    let freqs = to_frequencies(&h)?;
    let vals = ordinal_values(&freqs);
    let pairs = pairs_in(v, d, mode);
    let pairs_double = pairs_in(v, 2 * d, mode);
    let c = h.counts.map(|n| n as i128);
    let s = h.support() as f64;

    let p12 = pairs.n12 as f64 / pairs.valid() as f64;
    let first = (c[P123] + c[P231] + c[P132]) as f64 / s;
    let second = (c[P123] + c[P213] + c[P312]) as f64 / s;
    let beta_pair = beta_pairwise(&pairs)?;
    let beta_double = beta_pairwise(&pairs_double)?;
    let beta_plus_delta = (2 * (c[P123] + c[P132] + c[P213])) as f64 / s - 1.0;

    // Valid triple starts, for the epsilon bound.
    let valid_start: Vec<bool> = match mode {
        BoundaryMode::Linear => (0..len - 2 * d)
            .map(|t| triple_ok(v[t], v[t + d], v[t + 2 * d]))
            .collect(),
        BoundaryMode::Cyclic => (0..len)
            .map(|t| triple_ok(v[t], v[(t + d) % len], v[(t + 2 * d) % len]))
            .collect(),
    };
    let unmatched = (0..valid_start.len())
        .filter(|&t| {
            valid_start[t]
                && match mode {
                    BoundaryMode::Linear => t < d || !valid_start[t - d],
                    BoundaryMode::Cyclic => !valid_start[(t + len - d) % len],
                }
        })
        .count() as f64;

    // |U \ V| / |U| with V the valid triples inside the valid pairs U.
    let shrink = (pairs.valid() - h.support()) as f64 / pairs.valid() as f64;
    let shrink_double = (pairs_double.valid() - h.support()) as f64 / pairs_double.valid() as f64;
    let (tf, df) = (len as f64, d as f64);
    let nominal = |linear: f64| match mode {
        BoundaryMode::Linear => linear,
        BoundaryMode::Cyclic => 0.0,
    };
    let check = |disc: f64, nominal_bound: f64, admissible: f64| IdentityCheck {
        discrepancy: disc,
        nominal_bound,
        tie_slack: (admissible - nominal_bound).max(0.0),
    };
    let up_bound = nominal(df / (tf - df));
    Ok(IdentityReport {
        delay: d,
        mode,
        up_first: check(p12 - first, up_bound, shrink),
        up_second: check(p12 - second, up_bound, shrink),
        epsilon: check(
            vals.epsilon,
            nominal((df / (tf - 2.0 * df)).min(1.0)),
            unmatched / s,
        ),
        beta: check(
            beta_pair - vals.beta,
            nominal(2.0 * df / (tf - df)),
            2.0 * shrink,
        ),
        beta_doubling: check(beta_double - beta_plus_delta, 0.0, 2.0 * shrink_double),
        pairs,
        pairs_double,
        triples_support: h.support(),
    })
}

#[inline]
fn triple_ok(a: f64, b: f64, c: f64) -> bool {
    !(a.is_nan() || b.is_nan() || c.is_nan() || a == b || a == c || b == c)
}

/// Mean and unbiased standard deviation; `None` for fewer than 2 values.
pub(crate) fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{count_pairs, count_patterns3, count_patterns_n};

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    fn values_of(x: &[f64], d: usize, mode: BoundaryMode) -> OrdinalValues {
        let h = count_patterns3(&ts(x), d, mode).unwrap();
        ordinal_values(&to_frequencies(&h).unwrap())
    }

    fn probs(p: [f64; 6]) -> OrdinalValues {
        ordinal_values(&PatternFrequencies::from_probabilities(p).unwrap())
    }

    #[test]
    fn pairwise_beta() {
        let pc = |n12, n21| PairCounts {
            n12,
            n21,
            excluded: 0,
            delay: 1,
            mode: BoundaryMode::Linear,
        };
        assert_eq!(beta_pairwise(&pc(4, 0)).unwrap(), 1.0);
        assert_eq!(beta_pairwise(&pc(7, 7)).unwrap(), 0.0);
        assert_eq!(beta_pairwise(&pc(3, 1)).unwrap(), 0.5);
        assert!(matches!(
            beta_pairwise(&pc(0, 0)),
            Err(OrdinalError::AllPairsExcluded { .. })
        ));
        // 1,4,2,5,3,6 at d=1: three ups (1<4, 2<5, 3<6), two downs
        let c = count_pairs(&ts(&[1., 4., 2., 5., 3., 6.]), 1, BoundaryMode::Linear).unwrap();
        assert_eq!((c.n12, c.n21), (3, 2));
        assert_eq!(beta_pairwise(&c).unwrap(), 0.2);
    }

    #[test]
    fn uniform_distribution() {
        let v = probs([1.0 / 6.0; 6]);
        for f in [v.beta, v.tau, v.gamma, v.delta, v.epsilon] {
            assert!(f.abs() < 1e-15);
        }
        assert!(v.delta_sq < 1e-30);
        assert!((v.entropy - LN_6).abs() < 1e-15);
        assert!(v.divergence < 1e-15);
    }

    #[test]
    fn monotone_extremes_are_exact() {
        let v = values_of(&[1., 2., 3., 4., 5., 6., 7.], 1, BoundaryMode::Linear);
        assert_eq!(v.tau, 2.0 / 3.0);
        assert_eq!(v.delta_sq, 5.0 / 6.0);
        assert_eq!(v.beta, 1.0);
        assert_eq!(v.entropy, 0.0);
        let pc = partition(&v, 0.0).unwrap();
        assert_eq!(pc.tau_tilde, 0.4);
        assert_eq!(pc.beta_tilde, 0.6);
        assert_eq!(
            (pc.gamma_tilde, pc.delta_tilde, pc.residual),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn mixed_example_against_direct_summation() {
        let p = [0.0, 2.0 / 3.0, 1.0 / 3.0, 0.0, 0.0, 0.0];
        // direct summation oracle: 1/36 + 9/36 + 1/36 + 3/36 = 14/36
        let oracle: f64 = p.iter().map(|v| (v - 1.0 / 6.0) * (v - 1.0 / 6.0)).sum();
        assert!((oracle - 7.0 / 18.0).abs() < 1e-15);
        let v = values_of(&[1., 3., 2., 5., 4.], 1, BoundaryMode::Linear);
        assert_eq!(v.frequencies, p);
        assert!((v.tau + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(v.beta, 0.0);
        assert!((v.gamma + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(v.delta, 1.0);
        assert!((v.epsilon - 1.0 / 3.0).abs() < 1e-15);
        assert!((v.delta_sq - oracle).abs() < 1e-15);
        let w = probs(p);
        assert!((w.delta_sq - oracle).abs() < 1e-15);
    }

    #[test]
    fn partition_gating_and_guard() {
        let v = probs([1.0 / 6.0; 6]);
        assert!(partition(&v, 0.001).unwrap().gated);
        let monotone = values_of(&[1., 2., 3.], 1, BoundaryMode::Linear);
        assert!(partition(&monotone, 1.0).unwrap().gated);
        assert!(!partition(&monotone, 0.5).unwrap().gated);
        let h = crate::patterns::PatternHistogram {
            counts: [2; 6],
            excluded_ties: 0,
            excluded_missing: 0,
            delay: 1,
            mode: BoundaryMode::Linear,
        };
        let u = ordinal_values(&to_frequencies(&h).unwrap());
        assert_eq!(u.delta_sq, 0.0);
        assert!(matches!(
            partition(&u, 0.0),
            Err(OrdinalError::DivisionGuard)
        ));
        assert!(partition(&u, -1.0).is_err());
        let g = partition(&u, 0.1).unwrap();
        assert!(g.gated && g.tau_tilde.is_nan());
    }

    #[test]
    fn taylor_approximation() {
        assert_eq!(taylor_entropy_approx(0.0), LN_6);
        assert!((taylor_entropy_approx(5.0 / 6.0) - (LN_6 - 2.5)).abs() < 1e-15);
        // perturb uniform by +-0.01 in balanced pairs
        let mut max_dev: f64 = 0.0;
        for mask in 0u32..64 {
            let mut p = [1.0 / 6.0; 6];
            for i in 0..3 {
                let s = if mask >> i & 1 == 1 { 0.01 } else { -0.01 };
                let s2 = if mask >> (i + 3) & 1 == 1 { 0.5 } else { 1.0 };
                p[2 * i] += s * s2;
                p[2 * i + 1] -= s * s2;
            }
            let v = probs(p);
            max_dev = max_dev.max((v.entropy - taylor_entropy_approx(v.delta_sq)).abs());
        }
        assert!(max_dev <= 1e-3, "{max_dev}");
    }

    #[test]
    fn entropy_order_n() {
        let uniform = OrderNHistogram {
            order: 4,
            counts: vec![3; 24],
            excluded: 0,
            delay: 1,
            mode: BoundaryMode::Linear,
        };
        let e = entropy_n(&uniform).unwrap();
        assert!((e.entropy - 24f64.ln()).abs() < 1e-13);
        assert!(e.divergence < 1e-13);
        assert_eq!(e.delta_sq, 0.0);

        let mut single = uniform.clone();
        single.counts = vec![0; 24];
        single.counts[5] = 10;
        let e = entropy_n(&single).unwrap();
        assert_eq!(e.entropy, 0.0);
        assert!((e.divergence - 24f64.ln()).abs() < 1e-13);

        single.counts[5] = 0;
        assert!(matches!(
            entropy_n(&single),
            Err(OrdinalError::NoValidWindows { order: 4, .. })
        ));

        let x = ts(&[0.3, 1.2, -0.4, 2.2, 0.9, 0.1, 1.7, -1.0, 0.6, 0.65]);
        let h3 = count_patterns_n(&x, 1, 3, BoundaryMode::Linear).unwrap();
        let e3 = entropy_n(&h3).unwrap();
        let v = values_of(x.values(), 1, BoundaryMode::Linear);
        assert!((e3.entropy - v.entropy).abs() < 1e-15);
        assert!((e3.divergence - v.divergence).abs() < 1e-15);
        assert!((e3.delta_sq - v.delta_sq).abs() < 1e-15);
    }

    #[test]
    fn autocorrelation_cases() {
        assert_eq!(autocorr(&ts(&[2.0; 10]), 1).unwrap(), None);
        let l = 25usize;
        let x: Vec<f64> = (0..5000)
            .map(|t| (2.0 * std::f64::consts::PI * t as f64 / l as f64).sin())
            .collect();
        let r = autocorr(&ts(&x), l).unwrap().unwrap();
        assert!((r - 1.0).abs() < 1e-6);
        assert!(autocorr(&ts(&[1.0, f64::NAN, 2.0]), 1).is_err());
        assert!(autocorr(&ts(&[1.0, 2.0]), 2).is_err());
    }

    #[test]
    fn identities_epsilon_equals_extrema_balance() {
        let x = [1., 3., 2., 5., 4.];
        let r = check_identities(&ts(&x), 1, BoundaryMode::Linear).unwrap();
        let maxima = (1..4)
            .filter(|&t| x[t] > x[t - 1] && x[t] > x[t + 1])
            .count() as f64;
        let minima = (1..4)
            .filter(|&t| x[t] < x[t - 1] && x[t] < x[t + 1])
            .count() as f64;
        assert!((r.epsilon.discrepancy - (maxima - minima) / 3.0).abs() < 1e-15);
        assert!(r.all_hold(1e-12));
    }

    #[test]
    fn identities_monotone_and_cyclic() {
        let x: Vec<f64> = (0..20).map(|v| v as f64).collect();
        for d in 1..=6 {
            let r = check_identities(&ts(&x), d, BoundaryMode::Linear).unwrap();
            for (name, c) in r.checks() {
                assert_eq!(c.discrepancy, 0.0, "{name} d={d}");
            }
        }
        let y = [0.3, 1.2, -0.4, 2.2, 0.9, 0.1, 1.7, -1.0, 0.6, 0.65, 3.0];
        for d in 1..=5 {
            let r = check_identities(&ts(&y), d, BoundaryMode::Cyclic).unwrap();
            for (name, c) in r.checks() {
                assert!(c.discrepancy.abs() <= 1e-12, "{name} d={d}: {c:?}");
                assert_eq!(c.bound(), 0.0);
            }
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1.0, 1e-16, 1e-16, -1.0];
        assert!((compensated_sum(v) - 2e-16).abs() < 1e-30);
    }
}
