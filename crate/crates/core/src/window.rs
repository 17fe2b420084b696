//! Sliding-window evaluation of ordinal functions into (delay x time) maps.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{OrdinalError, Result};
use crate::functions::{autocorr_in, beta_pairwise, ordinal_values, partition, OrdinalValues};
use crate::patterns::{pairs_in, patterns3_in, to_frequencies};
use crate::series::{BoundaryMode, TimeSeries};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "ORDINAL_SCAN_THREADS";

/// Sizes the global worker pool from [`THREADS_ENV`], if set. Has no effect
/// once the pool exists. Returns the cap that was applied.
pub fn configure_threads_from_env() -> Option<usize> {
    let cap = std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse::<usize>()
        .ok()?;
    let threads = cap.clamp(1, num_cpus_hint());
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .ok()
        .map(|_| threads)
}

fn num_cpus_hint() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Function plotted in a [`WindowMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistic {
    Beta,
    BetaPairwise,
    Tau,
    Gamma,
    Delta,
    Epsilon,
    DeltaSq,
    Entropy,
    Divergence,
    Rho,
    TauTilde,
    BetaTilde,
    GammaTilde,
    DeltaTilde,
    Residual,
}

impl Statistic {
    pub const ALL: [Statistic; 15] = [
        Statistic::Beta,
        Statistic::BetaPairwise,
        Statistic::Tau,
        Statistic::Gamma,
        Statistic::Delta,
        Statistic::Epsilon,
        Statistic::DeltaSq,
        Statistic::Entropy,
        Statistic::Divergence,
        Statistic::Rho,
        Statistic::TauTilde,
        Statistic::BetaTilde,
        Statistic::GammaTilde,
        Statistic::DeltaTilde,
        Statistic::Residual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Beta => "beta",
            Statistic::BetaPairwise => "beta_pairwise",
            Statistic::Tau => "tau",
            Statistic::Gamma => "gamma",
            Statistic::Delta => "delta",
            Statistic::Epsilon => "epsilon",
            Statistic::DeltaSq => "delta_sq",
            Statistic::Entropy => "entropy",
            Statistic::Divergence => "divergence",
            Statistic::Rho => "rho",
            Statistic::TauTilde => "tau_tilde",
            Statistic::BetaTilde => "beta_tilde",
            Statistic::GammaTilde => "gamma_tilde",
            Statistic::DeltaTilde => "delta_tilde",
            Statistic::Residual => "residual",
        }
    }

    /// Whether cells below the gate threshold are masked.
    pub fn is_gated(self) -> bool {
        matches!(
            self,
            Statistic::DeltaSq
                | Statistic::TauTilde
                | Statistic::BetaTilde
                | Statistic::GammaTilde
                | Statistic::DeltaTilde
                | Statistic::Residual
        )
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self> {
        Statistic::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Statistic::ALL.iter().map(|s| s.name()).collect();
                OrdinalError::domain(format!(
                    "unknown statistic '{s}'; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// Window length, step, delay grid and gate for a sliding-window run.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowPlan {
    pub window: usize,
    pub step: usize,
    pub delays: Vec<usize>,
    pub mode: BoundaryMode,
    pub gate: f64,
}

impl WindowPlan {
    /// `gate = None` selects the default `15 / window`.
    pub fn new(
        window: usize,
        step: usize,
        delays: Vec<usize>,
        mode: BoundaryMode,
        gate: Option<f64>,
    ) -> Result<Self> {
        if window < 3 {
            return Err(OrdinalError::domain(format!(
                "window length must be at least 3, got {window}"
            )));
        }
        if step == 0 {
            return Err(OrdinalError::domain("window step must be at least 1"));
        }
        if delays.is_empty() {
            return Err(OrdinalError::domain("delay grid is empty"));
        }
        if delays[0] == 0 || delays.windows(2).any(|w| w[0] >= w[1]) {
            return Err(OrdinalError::domain(
                "delay grid must be strictly increasing positive integers",
            ));
        }
        let max = (window - 1) / 2;
        let last = *delays.last().unwrap();
        if last > max {
            return Err(OrdinalError::domain(format!(
                "largest delay {last} exceeds (window-1)/2 = {max}"
            )));
        }
        let gate = gate.unwrap_or(15.0 / window as f64);
        if !(gate >= 0.0 && gate.is_finite()) {
            return Err(OrdinalError::domain(format!(
                "gate must be >= 0, got {gate}"
            )));
        }
        Ok(WindowPlan {
            window,
            step,
            delays,
            mode,
            gate,
        })
    }

    /// Plan with the contiguous delay grid `d_min..=d_max`.
    pub fn contiguous(
        window: usize,
        step: usize,
        d_min: usize,
        d_max: usize,
        mode: BoundaryMode,
        gate: Option<f64>,
    ) -> Result<Self> {
        if d_min > d_max {
            return Err(OrdinalError::domain(format!(
                "empty delay range {d_min}..={d_max}"
            )));
        }
        Self::new(window, step, (d_min..=d_max).collect(), mode, gate)
    }

    /// Number of complete windows in a series of length `len`.
    pub fn window_count(&self, len: usize) -> Result<usize> {
        if len < self.window {
            return Err(OrdinalError::domain(format!(
                "series of length {len} is shorter than one window ({})",
                self.window
            )));
        }
        Ok((len - self.window) / self.step + 1)
    }

    pub fn window_starts(&self, len: usize) -> Result<Vec<usize>> {
        Ok((0..self.window_count(len)?)
            .map(|w| w * self.step)
            .collect())
    }
}

/// Values of one statistic over (delay x window). Row `r` holds
/// `plan.delays[r]`, column `c` the window starting at `starts[c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowMap {
    pub values: Vec<f64>,
    /// True where the cell is gated or undefined; such cells hold NaN.
    pub mask: Vec<bool>,
    pub stat: Statistic,
    pub plan: WindowPlan,
    pub starts: Vec<usize>,
}

impl WindowMap {
    pub fn rows(&self) -> usize {
        self.plan.delays.len()
    }

    pub fn cols(&self) -> usize {
        self.starts.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let i = row * self.cols() + col;
        (!self.mask[i]).then(|| self.values[i])
    }

    pub fn column(&self, col: usize) -> Vec<Option<f64>> {
        (0..self.rows()).map(|r| self.get(r, col)).collect()
    }

    pub fn masked_fraction(&self) -> f64 {
        self.mask.iter().filter(|m| **m).count() as f64 / self.mask.len() as f64
    }

    /// Mean over unmasked cells, NaN if every cell is masked.
    pub fn unmasked_mean(&self) -> f64 {
        let (sum, n) = self
            .values
            .iter()
            .zip(&self.mask)
            .filter(|(_, m)| !**m)
            .fold((0.0, 0usize), |(s, n), (v, _)| (s + v, n + 1));
        if n == 0 {
            f64::NAN
        } else {
            sum / n as f64
        }
    }

    fn from_columns(
        columns: Vec<Vec<Option<f64>>>,
        stat: Statistic,
        plan: &WindowPlan,
        starts: Vec<usize>,
    ) -> Self {
        let rows = plan.delays.len();
        let cols = columns.len();
        let mut values = vec![f64::NAN; rows * cols];
        let mut mask = vec![true; rows * cols];
        for (c, column) in columns.iter().enumerate() {
            for (r, cell) in column.iter().enumerate() {
                if let Some(v) = cell {
                    values[r * cols + c] = *v;
                    mask[r * cols + c] = false;
                }
            }
        }
        WindowMap {
            values,
            mask,
            stat,
            plan: plan.clone(),
            starts,
        }
    }
}

fn pattern_values(w: &[f64], d: usize, mode: BoundaryMode) -> Option<OrdinalValues> {
    let h = patterns3_in(w, d, mode);
    to_frequencies(&h).ok().map(|f| ordinal_values(&f))
}

/// One cell of a map, `None` when undefined or gated.
fn cell(w: &[f64], d: usize, stat: Statistic, mode: BoundaryMode, gate: f64) -> Option<f64> {
    match stat {
        Statistic::BetaPairwise => beta_pairwise(&pairs_in(w, d, mode)).ok(),
        Statistic::Rho => autocorr_in(w, d).ok().flatten(),
        _ => {
            let v = pattern_values(w, d, mode)?;
            let value = match stat {
                Statistic::Beta => v.beta,
                Statistic::Tau => v.tau,
                Statistic::Gamma => v.gamma,
                Statistic::Delta => v.delta,
                Statistic::Epsilon => v.epsilon,
                Statistic::Entropy => v.entropy,
                Statistic::Divergence => v.divergence,
                Statistic::DeltaSq => {
                    if v.delta_sq < gate {
                        return None;
                    }
                    v.delta_sq
                }
                _ => {
                    let pc = partition(&v, gate).ok().filter(|pc| !pc.gated)?;
                    match stat {
                        Statistic::TauTilde => pc.tau_tilde,
                        Statistic::BetaTilde => pc.beta_tilde,
                        Statistic::GammaTilde => pc.gamma_tilde,
                        Statistic::DeltaTilde => pc.delta_tilde,
                        _ => pc.residual,
                    }
                }
            };
            Some(value)
        }
    }
}

fn windows<'a>(x: &'a TimeSeries, plan: &WindowPlan) -> Result<(Vec<usize>, Vec<&'a [f64]>)> {
    let starts = plan.window_starts(x.len())?;
    let slices = starts
        .iter()
        .map(|&s| &x.values()[s..s + plan.window])
        .collect();
    Ok((starts, slices))
}

/// Evaluates `stat` for every window and delay of `plan`.
pub fn run_map(x: &TimeSeries, plan: &WindowPlan, stat: Statistic) -> Result<WindowMap> {
    let (starts, slices) = windows(x, plan)?;
    let columns: Vec<Vec<Option<f64>>> = slices
        .par_iter()
        .map(|w| {
            plan.delays
                .iter()
                .map(|&d| cell(w, d, stat, plan.mode, plan.gate))
                .collect()
        })
        .collect();
    Ok(WindowMap::from_columns(columns, stat, plan, starts))
}

/// Means of the partition shares over ungated cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionAverages {
    pub tau_tilde: f64,
    pub beta_tilde: f64,
    pub gamma_tilde: f64,
    pub delta_tilde: f64,
    pub residual: f64,
    /// Fraction of cells that are gated or undefined.
    pub gated_fraction: f64,
    pub ungated_cells: usize,
}

/// Four share maps on one common mask, plus their averages.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionMaps {
    pub tau_tilde: WindowMap,
    pub beta_tilde: WindowMap,
    pub gamma_tilde: WindowMap,
    pub delta_tilde: WindowMap,
    pub averages: PartitionAverages,
}

/// Shares of the distance to white noise for every window and delay.
///
/// Averages are means of per-cell shares over ungated cells.
pub fn run_partition_map(x: &TimeSeries, plan: &WindowPlan) -> Result<PartitionMaps> {
    let (starts, slices) = windows(x, plan)?;
    let columns: Vec<Vec<Option<[f64; 5]>>> = slices
        .par_iter()
        .map(|w| {
            plan.delays
                .iter()
                .map(|&d| {
                    let v = pattern_values(w, d, plan.mode)?;
                    let pc = partition(&v, plan.gate).ok().filter(|pc| !pc.gated)?;
                    Some([
                        pc.tau_tilde,
                        pc.beta_tilde,
                        pc.gamma_tilde,
                        pc.delta_tilde,
                        pc.residual,
                    ])
                })
                .collect()
        })
        .collect();

    let mut sums = [0.0f64; 5];
    let mut ungated = 0usize;
    for cell in columns.iter().flatten().flatten() {
        ungated += 1;
        for (s, v) in sums.iter_mut().zip(cell) {
            *s += v;
        }
    }
    let total = columns.len() * plan.delays.len();
    let mean = |i: usize| {
        if ungated == 0 {
            f64::NAN
        } else {
            sums[i] / ungated as f64
        }
    };
    let averages = PartitionAverages {
        tau_tilde: mean(0),
        beta_tilde: mean(1),
        gamma_tilde: mean(2),
        delta_tilde: mean(3),
        residual: mean(4),
        gated_fraction: 1.0 - ungated as f64 / total as f64,
        ungated_cells: ungated,
    };
    let component = |i: usize, stat: Statistic| {
        let cols = columns
            .iter()
            .map(|col| col.iter().map(|c| c.map(|s| s[i])).collect())
            .collect();
        WindowMap::from_columns(cols, stat, plan, starts.clone())
    };
    Ok(PartitionMaps {
        tau_tilde: component(0, Statistic::TauTilde),
        beta_tilde: component(1, Statistic::BetaTilde),
        gamma_tilde: component(2, Statistic::GammaTilde),
        delta_tilde: component(3, Statistic::DeltaTilde),
        averages,
    })
}

/// Per-window scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSummary {
    pub start: usize,
    /// Mean of `|x|` over present samples; `None` if the window is all missing.
    pub mean_abs_amplitude: Option<f64>,
    /// Mean of the (ungated) distance to white noise over the band delays
    /// with at least one valid triple; `None` if there are none.
    pub mean_delta_sq: Option<f64>,
    /// Fraction of band delays with distance at or above the gate.
    pub ungated_fraction: f64,
}

/// Amplitude and band-averaged distance to white noise for each window.
pub fn run_summary(
    x: &TimeSeries,
    plan: &WindowPlan,
    band: RangeInclusive<usize>,
) -> Result<Vec<WindowSummary>> {
    let band_delays: Vec<usize> = plan
        .delays
        .iter()
        .copied()
        .filter(|d| band.contains(d))
        .collect();
    if band_delays.is_empty() {
        return Err(OrdinalError::domain(format!(
            "delay band {}..={} selects no delay of the grid",
            band.start(),
            band.end()
        )));
    }
    let (starts, slices) = windows(x, plan)?;
    Ok(starts
        .par_iter()
        .zip(slices.par_iter())
        .map(|(&start, w)| {
            let present: Vec<f64> = w.iter().copied().filter(|v| !v.is_nan()).collect();
            let mean_abs_amplitude = (!present.is_empty())
                .then(|| present.iter().map(|v| v.abs()).sum::<f64>() / present.len() as f64);
            let dist: Vec<f64> = band_delays
                .iter()
                .filter_map(|&d| pattern_values(w, d, plan.mode).map(|v| v.delta_sq))
                .collect();
            let mean_delta_sq =
                (!dist.is_empty()).then(|| dist.iter().sum::<f64>() / dist.len() as f64);
            let ungated = dist.iter().filter(|&&v| v >= plan.gate).count();
            WindowSummary {
                start,
                mean_abs_amplitude,
                mean_delta_sq,
                ungated_fraction: ungated as f64 / band_delays.len() as f64,
            }
        })
        .collect())
}

/// Every statistic at one delay, computed over the whole series.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub delay: usize,
    /// Number of valid triples.
    pub support: u64,
    /// Values in [`Statistic::ALL`] order. The distance to white noise is
    /// reported ungated; the shares are `None` below the gate.
    pub values: [Option<f64>; 15],
}

impl ProfileRow {
    pub fn get(&self, stat: Statistic) -> Option<f64> {
        let i = Statistic::ALL.iter().position(|&s| s == stat).unwrap();
        self.values[i]
    }
}

/// Whole-series profile over `delays`, one row per delay.
pub fn profile(
    x: &TimeSeries,
    delays: &[usize],
    mode: BoundaryMode,
    gate: f64,
) -> Result<Vec<ProfileRow>> {
    if gate.is_nan() || gate < 0.0 {
        return Err(OrdinalError::domain(format!(
            "gate must be non-negative, got {gate}"
        )));
    }
    let w = x.values();
    for &d in delays {
        crate::patterns::check_triple_delay(w.len(), d, mode)?;
    }
    Ok(delays
        .par_iter()
        .map(|&d| {
            let h = patterns3_in(w, d, mode);
            let v = to_frequencies(&h).ok().map(|f| ordinal_values(&f));
            let pc = v
                .as_ref()
                .and_then(|v| partition(v, gate).ok())
                .filter(|pc| !pc.gated);
            let values = Statistic::ALL.map(|stat| match stat {
                Statistic::BetaPairwise => beta_pairwise(&pairs_in(w, d, mode)).ok(),
                Statistic::Rho => autocorr_in(w, d).ok().flatten(),
                Statistic::TauTilde => pc.as_ref().map(|p| p.tau_tilde),
                Statistic::BetaTilde => pc.as_ref().map(|p| p.beta_tilde),
                Statistic::GammaTilde => pc.as_ref().map(|p| p.gamma_tilde),
                Statistic::DeltaTilde => pc.as_ref().map(|p| p.delta_tilde),
                Statistic::Residual => pc.as_ref().map(|p| p.residual),
                _ => v.as_ref().map(|v| match stat {
                    Statistic::Beta => v.beta,
                    Statistic::Tau => v.tau,
                    Statistic::Gamma => v.gamma,
                    Statistic::Delta => v.delta,
                    Statistic::Epsilon => v.epsilon,
                    Statistic::DeltaSq => v.delta_sq,
                    Statistic::Entropy => v.entropy,
                    _ => v.divergence,
                }),
            });
            ProfileRow {
                delay: d,
                support: h.support(),
                values,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{generate, GeneratorSpec};

    fn plan(n: usize, step: usize, dmax: usize) -> WindowPlan {
        WindowPlan::contiguous(n, step, 1, dmax, BoundaryMode::Linear, None).unwrap()
    }

    #[test]
    fn plan_validation() {
        assert!(WindowPlan::contiguous(2, 1, 1, 1, BoundaryMode::Linear, None).is_err());
        assert!(WindowPlan::contiguous(10, 0, 1, 2, BoundaryMode::Linear, None).is_err());
        assert!(WindowPlan::contiguous(10, 1, 1, 5, BoundaryMode::Linear, None).is_err());
        assert!(WindowPlan::contiguous(10, 1, 1, 4, BoundaryMode::Linear, None).is_ok());
        assert!(WindowPlan::new(10, 1, vec![2, 1], BoundaryMode::Linear, None).is_err());
        assert!(WindowPlan::new(10, 1, vec![0, 1], BoundaryMode::Linear, None).is_err());
        assert!(WindowPlan::new(10, 1, vec![1], BoundaryMode::Linear, Some(-1.0)).is_err());
        assert_eq!(plan(1000, 1, 3).gate, 0.015);
        assert!(plan(100, 1, 3).window_count(99).is_err());
    }

    #[test]
    fn column_count() {
        let x = generate(&GeneratorSpec::white_noise(10_000, 0).unwrap()).unwrap();
        let m = run_map(&x, &plan(1000, 1000, 5), Statistic::Tau).unwrap();
        assert_eq!(m.cols(), 10);
        assert_eq!(m.rows(), 5);
        // tail shorter than a window is dropped
        let x = generate(&GeneratorSpec::white_noise(10_999, 0).unwrap()).unwrap();
        assert_eq!(
            run_map(&x, &plan(1000, 1000, 5), Statistic::Tau)
                .unwrap()
                .cols(),
            10
        );
    }

    #[test]
    fn monotone_maps() {
        let x = TimeSeries::new((0..500).map(|v| v as f64).collect()).unwrap();
        let p = plan(100, 50, 10);
        let m = run_map(&x, &p, Statistic::Tau).unwrap();
        assert!(m.mask.iter().all(|m| !m));
        assert!(m.values.iter().all(|&v| v == 2.0 / 3.0));
        let pm = run_partition_map(&x, &p).unwrap();
        assert!(pm.tau_tilde.values.iter().all(|&v| v == 0.4));
        assert!(pm.beta_tilde.values.iter().all(|&v| v == 0.6));
        assert_eq!(pm.averages.gated_fraction, 0.0);
        assert_eq!(pm.averages.residual, 0.0);
        let s = run_summary(&x, &p, 1..=10).unwrap();
        assert!(s
            .iter()
            .all(|w| (w.mean_delta_sq.unwrap() - 5.0 / 6.0).abs() < 1e-15));
        assert!(s.iter().all(|w| w.ungated_fraction == 1.0));
    }

    #[test]
    fn constant_series_summary() {
        let x = TimeSeries::new(vec![2.5; 300]).unwrap();
        let p = plan(100, 100, 5);
        let s = run_summary(&x, &p, 1..=5).unwrap();
        assert_eq!(s.len(), 3);
        for w in s {
            assert_eq!(w.mean_abs_amplitude, Some(2.5));
            assert_eq!(w.mean_delta_sq, None);
            assert_eq!(w.ungated_fraction, 0.0);
        }
        assert!(run_summary(&x, &p, 7..=9).is_err());
        let m = run_map(&x, &p, Statistic::DeltaSq).unwrap();
        assert_eq!(m.masked_fraction(), 1.0);
        assert!(m.values.iter().all(|v| v.is_nan()));
    }

    #[test]
    fn white_noise_delta_sq_mostly_masked() {
        let n = 10_000;
        let x = generate(&GeneratorSpec::white_noise(n * 20, 4).unwrap()).unwrap();
        let m = run_map(&x, &plan(n, n, 20), Statistic::DeltaSq).unwrap();
        assert!(m.masked_fraction() >= 0.9, "{}", m.masked_fraction());
        let s = run_summary(&x, &plan(n, n, 20), 1..=20).unwrap();
        for w in s {
            assert!(w.mean_delta_sq.unwrap() < 3.0 * 7.0 / n as f64);
        }
    }

    #[test]
    fn columns_equal_whole_series_on_the_window() {
        let x = generate(&GeneratorSpec::model_ar2(3000, 2).unwrap()).unwrap();
        let p = plan(700, 333, 30);
        for stat in Statistic::ALL {
            let m = run_map(&x, &p, stat).unwrap();
            for (c, &start) in m.starts.iter().enumerate() {
                let w = x.slice(start, p.window).unwrap();
                let single = WindowPlan {
                    step: 1,
                    ..p.clone()
                };
                let alone = run_map(&w, &single, stat).unwrap();
                assert_eq!(alone.cols(), 1);
                let a = m.column(c);
                let b = alone.column(0);
                for (u, v) in a.iter().zip(&b) {
                    assert_eq!(u.map(f64::to_bits), v.map(f64::to_bits), "{stat}");
                }
            }
        }
    }

    #[test]
    fn partition_masks_coincide() {
        let x = generate(&GeneratorSpec::model_ar2(20_000, 9).unwrap()).unwrap();
        let pm = run_partition_map(&x, &plan(2000, 2000, 100)).unwrap();
        assert_eq!(pm.tau_tilde.mask, pm.beta_tilde.mask);
        assert_eq!(pm.tau_tilde.mask, pm.gamma_tilde.mask);
        assert_eq!(pm.tau_tilde.mask, pm.delta_tilde.mask);
        let tau = run_map(&x, &plan(2000, 2000, 100), Statistic::TauTilde).unwrap();
        assert_eq!(tau.mask, pm.tau_tilde.mask);
        assert!((pm.averages.gated_fraction - pm.tau_tilde.masked_fraction()).abs() < 1e-15);
    }

    #[test]
    fn statistic_names_round_trip() {
        for s in Statistic::ALL {
            assert_eq!(s.name().parse::<Statistic>().unwrap(), s);
        }
        assert!("nope".parse::<Statistic>().is_err());
    }
}
