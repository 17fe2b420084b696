//! Seedable synthetic processes and disturbances.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`; Gaussian
//! variates use the ziggurat sampler of `rand_distr::StandardNormal`. Both
//! are platform independent, so a `(spec, seed)` pair always reproduces the
//! same series bit for bit.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{OrdinalError, Result};
use crate::series::TimeSeries;

/// Samples discarded at the start of an AR2 simulation.
pub const AR2_BURN_IN: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Waveform {
    Sine,
    /// Slow linear rise followed by an instantaneous drop.
    Sawtooth,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    WhiteNoise {
        std: f64,
    },
    /// `X_t = a1 X_{t-1} + a2 X_{t-2} + W_t`, `W_t ~ N(0, noise_std^2)`.
    Ar2 {
        a1: f64,
        a2: f64,
        noise_std: f64,
    },
    /// Cumulative sum of Gaussian steps.
    Brownian {
        step_std: f64,
    },
    Periodic {
        period: f64,
        waveform: Waveform,
        amplitude: f64,
        noise_std: f64,
    },
    /// Replays a stored series (truncated or validated to `length`).
    FromSeries(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub length: usize,
    pub seed: u64,
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(OrdinalError::domain(format!(
            "{name} must be finite and >= 0, got {v}"
        )))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(OrdinalError::domain(format!(
            "{name} must be finite and > 0, got {v}"
        )))
    }
}

/// Stationarity triangle of the AR2 recursion: both roots of
/// `1 - a1 z - a2 z^2` lie outside the unit circle.
pub fn ar2_is_stationary(a1: f64, a2: f64) -> bool {
    a2.abs() < 1.0 && a1 + a2 < 1.0 && a2 - a1 < 1.0
}

/// Analytic autocorrelations `rho(0..=max_lag)` of a stationary AR2
/// process from the Yule-Walker recursion.
pub fn ar2_autocorrelation(a1: f64, a2: f64, max_lag: usize) -> Vec<f64> {
    let mut rho = vec![1.0; max_lag + 1];
    if max_lag >= 1 {
        rho[1] = a1 / (1.0 - a2);
    }
    for k in 2..=max_lag {
        rho[k] = a1 * rho[k - 1] + a2 * rho[k - 2];
    }
    rho
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, length: usize, seed: u64) -> Result<Self> {
        if length == 0 {
            return Err(OrdinalError::domain("series length must be at least 1"));
        }
        match &kind {
            GeneratorKind::WhiteNoise { std } => non_negative("std", *std)?,
            GeneratorKind::Ar2 { a1, a2, noise_std } => {
                non_negative("noise_std", *noise_std)?;
                if !ar2_is_stationary(*a1, *a2) {
                    return Err(OrdinalError::domain(format!(
                        "AR2 coefficients a1 = {a1}, a2 = {a2} are not stationary"
                    )));
                }
            }
            GeneratorKind::Brownian { step_std } => non_negative("step_std", *step_std)?,
            GeneratorKind::Periodic {
                period,
                amplitude,
                noise_std,
                ..
            } => {
                positive("period", *period)?;
                non_negative("amplitude", *amplitude)?;
                non_negative("noise_std", *noise_std)?;
            }
            GeneratorKind::FromSeries(v) => {
                if v.len() < length {
                    return Err(OrdinalError::domain(format!(
                        "stored series has {} values, {length} requested",
                        v.len()
                    )));
                }
            }
        }
        Ok(GeneratorSpec { kind, length, seed })
    }

    pub fn white_noise(length: usize, seed: u64) -> Result<Self> {
        Self::new(GeneratorKind::WhiteNoise { std: 1.0 }, length, seed)
    }

    /// The oscillating model process with `a1 = 1.85`, `a2 = -0.96`.
    pub fn model_ar2(length: usize, seed: u64) -> Result<Self> {
        Self::new(
            GeneratorKind::Ar2 {
                a1: 1.85,
                a2: -0.96,
                noise_std: 1.0,
            },
            length,
            seed,
        )
    }

    pub fn brownian(length: usize, seed: u64) -> Result<Self> {
        Self::new(GeneratorKind::Brownian { step_std: 1.0 }, length, seed)
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample::<f64, _>(StandardNormal)
}

/// Produces the series described by `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<TimeSeries> {
    // re-validate in case the spec was assembled by hand
    let spec = GeneratorSpec::new(spec.kind.clone(), spec.length, spec.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.length;
    let values: Vec<f64> = match spec.kind {
        GeneratorKind::WhiteNoise { std } => (0..n).map(|_| std * gauss(&mut rng)).collect(),
        GeneratorKind::Ar2 { a1, a2, noise_std } => {
            let (mut prev2, mut prev1) = (0.0f64, 0.0f64);
            let mut out = Vec::with_capacity(n);
            for i in 0..AR2_BURN_IN + n {
                let x = a1 * prev1 + a2 * prev2 + noise_std * gauss(&mut rng);
                prev2 = prev1;
                prev1 = x;
                if i >= AR2_BURN_IN {
                    out.push(x);
                }
            }
            out
        }
        GeneratorKind::Brownian { step_std } => {
            let mut acc = 0.0;
            (0..n)
                .map(|_| {
                    acc += step_std * gauss(&mut rng);
                    acc
                })
                .collect()
        }
        GeneratorKind::Periodic {
            period,
            waveform,
            amplitude,
            noise_std,
        } => (0..n)
            .map(|t| {
                // phase from t mod period keeps integer periods exact
                let phase = (t as f64 % period) / period;
                let wave = match waveform {
                    Waveform::Sine => (2.0 * std::f64::consts::PI * phase).sin(),
                    Waveform::Sawtooth => 2.0 * phase - 1.0,
                };
                let noise = if noise_std > 0.0 {
                    noise_std * gauss(&mut rng)
                } else {
                    0.0
                };
                amplitude * wave + noise
            })
            .collect(),
        GeneratorKind::FromSeries(v) => v[..n].to_vec(),
    };
    TimeSeries::new(values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisturbanceKind {
    /// Gaussian noise with `var(signal) / var(noise) = snr`.
    AdditiveWhiteNoise { snr: f64 },
    /// Replaces `round(fraction * T)` positions by `+-amplitude_in_sigmas * std(x)`.
    Outliers {
        fraction: f64,
        amplitude_in_sigmas: f64,
    },
    /// Adds `amplitude * sin(t / period_scale)`, `t = 1..T`.
    LowFrequency { period_scale: f64, amplitude: f64 },
    /// `y = exp(x / scale)`.
    MonotoneTransform { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceSpec {
    pub kind: DisturbanceKind,
    pub seed: u64,
}

impl DisturbanceSpec {
    pub fn new(kind: DisturbanceKind, seed: u64) -> Result<Self> {
        match kind {
            DisturbanceKind::AdditiveWhiteNoise { snr } => positive("snr", snr)?,
            DisturbanceKind::Outliers {
                fraction,
                amplitude_in_sigmas,
            } => {
                if !(fraction > 0.0 && fraction < 1.0) {
                    return Err(OrdinalError::domain(format!(
                        "outlier fraction must lie in (0,1), got {fraction}"
                    )));
                }
                positive("amplitude_in_sigmas", amplitude_in_sigmas)?;
            }
            DisturbanceKind::LowFrequency {
                period_scale,
                amplitude,
            } => {
                positive("period_scale", period_scale)?;
                non_negative("amplitude", amplitude)?;
            }
            DisturbanceKind::MonotoneTransform { scale } => positive("scale", scale)?,
        }
        Ok(DisturbanceSpec { kind, seed })
    }
}

/// Population standard deviation over non-missing values.
fn present_std(x: &[f64]) -> f64 {
    let present: Vec<f64> = x.iter().copied().filter(|v| !v.is_nan()).collect();
    if present.is_empty() {
        return 0.0;
    }
    let n = present.len() as f64;
    let mean = present.iter().sum::<f64>() / n;
    (present.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Applies one disturbance. Missing values stay missing.
pub fn disturb(x: &TimeSeries, spec: &DisturbanceSpec) -> Result<TimeSeries> {
    let spec = DisturbanceSpec::new(spec.kind, spec.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut v = x.values().to_vec();
    match spec.kind {
        DisturbanceKind::AdditiveWhiteNoise { snr } => {
            let noise_std = present_std(&v) / snr.sqrt();
            for y in v.iter_mut() {
                let e = gauss(&mut rng);
                *y += noise_std * e;
            }
        }
        DisturbanceKind::Outliers {
            fraction,
            amplitude_in_sigmas,
        } => {
            let spike = amplitude_in_sigmas * present_std(&v);
            let count = (fraction * v.len() as f64).round() as usize;
            for pos in index::sample(&mut rng, v.len(), count.min(v.len())).into_vec() {
                if !v[pos].is_nan() {
                    v[pos] = if rng.random::<bool>() { spike } else { -spike };
                }
            }
        }
        DisturbanceKind::LowFrequency {
            period_scale,
            amplitude,
        } => {
            for (t, y) in v.iter_mut().enumerate() {
                *y += amplitude * ((t + 1) as f64 / period_scale).sin();
            }
        }
        DisturbanceKind::MonotoneTransform { scale } => {
            for y in v.iter_mut() {
                *y = (*y / scale).exp();
            }
            if v.iter().any(|y| y.is_infinite()) {
                return Err(OrdinalError::domain(format!(
                    "exp(x / {scale}) overflows; use a larger scale"
                )));
            }
        }
    }
    let out = TimeSeries::new(v)?;
    match x.sample_rate_hz() {
        Some(hz) => out.with_sample_rate(hz),
        None => Ok(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::autocorr;
    use crate::patterns::{count_pairs, count_patterns3};
    use crate::series::BoundaryMode;

    #[test]
    fn reproducible_per_seed() {
        let s = GeneratorSpec::model_ar2(500, 7).unwrap();
        let a = generate(&s).unwrap();
        let b = generate(&s).unwrap();
        assert_eq!(a.values(), b.values());
        let c = generate(&GeneratorSpec::model_ar2(500, 8).unwrap()).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn ar2_stationarity_checked() {
        assert!(ar2_is_stationary(1.85, -0.96));
        assert!(!ar2_is_stationary(1.0, 0.5));
        assert!(GeneratorSpec::new(
            GeneratorKind::Ar2 {
                a1: 1.2,
                a2: 0.5,
                noise_std: 1.0
            },
            10,
            0
        )
        .is_err());
        assert!(GeneratorSpec::white_noise(0, 0).is_err());
    }

    #[test]
    fn ar2_matches_yule_walker() {
        let t = 200_000;
        let x = generate(&GeneratorSpec::model_ar2(t, 11).unwrap()).unwrap();
        let rho = ar2_autocorrelation(1.85, -0.96, 20);
        let tol = 3.0 / (t as f64).sqrt();
        for (d, &r) in rho.iter().enumerate().skip(1) {
            let got = autocorr(&x, d).unwrap().unwrap();
            assert!((got - r).abs() < tol, "d={d}: {got} vs {r}");
        }
    }

    #[test]
    fn brownian_is_cumulative() {
        let x = generate(&GeneratorSpec::brownian(1000, 3).unwrap()).unwrap();
        let w = generate(&GeneratorSpec::white_noise(1000, 3).unwrap()).unwrap();
        let mut acc = 0.0;
        for (b, s) in x.values().iter().zip(w.values()) {
            acc += s;
            assert_eq!(*b, acc);
        }
    }

    #[test]
    fn periodic_beta_antisymmetry() {
        let l = 100;
        let spec = GeneratorSpec::new(
            GeneratorKind::Periodic {
                period: l as f64,
                waveform: Waveform::Sine,
                amplitude: 1.0,
                noise_std: 0.0,
            },
            l * 20,
            0,
        )
        .unwrap();
        let x = generate(&spec).unwrap();
        for d in 1..l {
            let a = count_pairs(&x, d, BoundaryMode::Cyclic).unwrap();
            let b = count_pairs(&x, l - d, BoundaryMode::Cyclic).unwrap();
            let beta =
                |c: &crate::patterns::PairCounts| crate::functions::beta_pairwise(c).unwrap();
            assert_eq!(beta(&a), -beta(&b), "d={d}");
        }
    }

    #[test]
    fn monotone_transform_keeps_patterns() {
        let x = generate(&GeneratorSpec::model_ar2(3000, 5).unwrap()).unwrap();
        let spec =
            DisturbanceSpec::new(DisturbanceKind::MonotoneTransform { scale: 7.0 }, 0).unwrap();
        let y = disturb(&x, &spec).unwrap();
        for d in 1..=50 {
            assert_eq!(
                count_patterns3(&x, d, BoundaryMode::Linear).unwrap(),
                count_patterns3(&y, d, BoundaryMode::Linear).unwrap()
            );
        }
    }

    #[test]
    fn outliers_replace_requested_fraction() {
        let x = generate(&GeneratorSpec::white_noise(2000, 1).unwrap()).unwrap();
        let spec = DisturbanceSpec::new(
            DisturbanceKind::Outliers {
                fraction: 0.01,
                amplitude_in_sigmas: 20.0,
            },
            9,
        )
        .unwrap();
        let y = disturb(&x, &spec).unwrap();
        let sd = present_std(x.values());
        let changed: Vec<f64> = x
            .values()
            .iter()
            .zip(y.values())
            .filter(|(a, b)| a != b)
            .map(|(_, b)| *b)
            .collect();
        assert_eq!(changed.len(), 20);
        assert!(changed.iter().all(|v| (v.abs() - 20.0 * sd).abs() < 1e-9));
    }

    #[test]
    fn snr_sets_noise_variance() {
        let x = generate(&GeneratorSpec::white_noise(100_000, 2).unwrap()).unwrap();
        let spec =
            DisturbanceSpec::new(DisturbanceKind::AdditiveWhiteNoise { snr: 4.0 }, 3).unwrap();
        let y = disturb(&x, &spec).unwrap();
        let noise: Vec<f64> = x
            .values()
            .iter()
            .zip(y.values())
            .map(|(a, b)| b - a)
            .collect();
        let ratio = present_std(x.values()).powi(2) / present_std(&noise).powi(2);
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn disturbance_validation() {
        assert!(DisturbanceSpec::new(DisturbanceKind::AdditiveWhiteNoise { snr: 0.0 }, 0).is_err());
        let bad = DisturbanceKind::Outliers {
            fraction: 1.0,
            amplitude_in_sigmas: 20.0,
        };
        assert!(DisturbanceSpec::new(bad, 0).is_err());
        assert!(
            DisturbanceSpec::new(DisturbanceKind::MonotoneTransform { scale: -1.0 }, 0).is_err()
        );
    }
}
