//! Python bindings for ordinal-scan.

use std::path::PathBuf;

use ordinal_scan::inference::{signs_of, Sided};
use ordinal_scan::io::{export_map, MapExportFormat, SeriesFileFormat, SeriesFormat};
use ordinal_scan::window::configure_threads_from_env;
use ordinal_scan::{
    self as core, BoundaryMode, DisturbanceKind, DisturbanceSpec, GeneratorKind, GeneratorSpec,
    PatternFrequencies, Statistic, TimeSeries, Waveform, WindowPlan,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

create_exception!(ordscan, OrdinalError, PyValueError);

fn err(e: core::OrdinalError) -> PyErr {
    match e {
        core::OrdinalError::Io { .. } => PyOSError::new_err(e.to_string()),
        other => OrdinalError::new_err(other.to_string()),
    }
}

/// `None` entries become missing values (NaN).
fn series(x: Vec<Option<f64>>) -> PyResult<TimeSeries> {
    TimeSeries::new(x.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect()).map_err(err)
}

fn mode(cyclic: bool) -> BoundaryMode {
    if cyclic {
        BoundaryMode::Cyclic
    } else {
        BoundaryMode::Linear
    }
}

fn stat(name: &str) -> PyResult<Statistic> {
    name.parse().map_err(err)
}

fn plan(
    window: usize,
    step: Option<usize>,
    delay_min: usize,
    delay_max: usize,
    cyclic: bool,
    gate: Option<f64>,
) -> PyResult<WindowPlan> {
    WindowPlan::contiguous(
        window,
        step.unwrap_or(window),
        delay_min,
        delay_max,
        mode(cyclic),
        gate,
    )
    .map_err(err)
}

#[derive(IntoPyObject)]
struct Histogram {
    counts: Vec<u64>,
    labels: Vec<&'static str>,
    excluded_ties: u64,
    excluded_missing: u64,
    support: u64,
    delay: usize,
}

#[derive(IntoPyObject)]
struct Partition {
    tau_tilde: f64,
    beta_tilde: f64,
    gamma_tilde: f64,
    delta_tilde: f64,
    residual: f64,
    gated: bool,
}

impl From<core::PartitionComponents> for Partition {
    fn from(p: core::PartitionComponents) -> Self {
        Partition {
            tau_tilde: p.tau_tilde,
            beta_tilde: p.beta_tilde,
            gamma_tilde: p.gamma_tilde,
            delta_tilde: p.delta_tilde,
            residual: p.residual,
            gated: p.gated,
        }
    }
}

/// Length-3 ordinal functions at one delay.
#[pyclass(frozen, module = "ordscan")]
struct OrdinalValues {
    inner: core::OrdinalValues,
}

#[pymethods]
impl OrdinalValues {
    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }
    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau
    }
    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }
    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }
    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }
    #[getter]
    fn delta_sq(&self) -> f64 {
        self.inner.delta_sq
    }
    #[getter]
    fn entropy(&self) -> f64 {
        self.inner.entropy
    }
    #[getter]
    fn divergence(&self) -> f64 {
        self.inner.divergence
    }
    #[getter]
    fn frequencies(&self) -> [f64; 6] {
        self.inner.frequencies
    }
    #[getter]
    fn support(&self) -> u64 {
        self.inner.support
    }
    #[getter]
    fn delay(&self) -> usize {
        self.inner.delay
    }

    /// Shares of the distance to white noise; NaN shares when gated.
    #[pyo3(signature = (gate=0.0))]
    fn partition(&self, gate: f64) -> PyResult<Partition> {
        core::partition(&self.inner, gate)
            .map(Partition::from)
            .map_err(err)
    }

    fn __repr__(&self) -> String {
        let v = &self.inner;
        format!(
            "OrdinalValues(delay={}, beta={}, tau={}, gamma={}, delta={}, epsilon={}, delta_sq={})",
            v.delay, v.beta, v.tau, v.gamma, v.delta, v.epsilon, v.delta_sq
        )
    }
}

/// A (delay x window) map; masked cells read as None.
#[pyclass(frozen, module = "ordscan")]
struct WindowMap {
    inner: core::WindowMap,
}

#[pymethods]
impl WindowMap {
    #[getter]
    fn stat(&self) -> &'static str {
        self.inner.stat.name()
    }
    #[getter]
    fn delays(&self) -> Vec<usize> {
        self.inner.plan.delays.clone()
    }
    #[getter]
    fn starts(&self) -> Vec<usize> {
        self.inner.starts.clone()
    }
    #[getter]
    fn window(&self) -> usize {
        self.inner.plan.window
    }
    #[getter]
    fn gate(&self) -> f64 {
        self.inner.plan.gate
    }
    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.rows(), self.inner.cols())
    }
    /// Rows are delays, columns are windows.
    #[getter]
    fn values(&self) -> Vec<Vec<Option<f64>>> {
        (0..self.inner.rows())
            .map(|r| {
                (0..self.inner.cols())
                    .map(|c| self.inner.get(r, c))
                    .collect()
            })
            .collect()
    }
    fn masked_fraction(&self) -> f64 {
        self.inner.masked_fraction()
    }
    fn unmasked_mean(&self) -> f64 {
        self.inner.unmasked_mean()
    }
    fn to_csv(&self, path: PathBuf) -> PyResult<()> {
        export_map(&self.inner, &MapExportFormat::csv(), path).map_err(err)
    }
    fn to_pgm(&self, path: PathBuf, lo: f64, hi: f64) -> PyResult<()> {
        export_map(&self.inner, &MapExportFormat::pgm(lo, hi), path).map_err(err)
    }
    fn __repr__(&self) -> String {
        format!(
            "WindowMap(stat={}, delays={}, windows={})",
            self.inner.stat,
            self.inner.rows(),
            self.inner.cols()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (x, d, cyclic=false))]
fn count_patterns3(x: Vec<Option<f64>>, d: usize, cyclic: bool) -> PyResult<Histogram> {
    let h = core::count_patterns3(&series(x)?, d, mode(cyclic)).map_err(err)?;
    Ok(Histogram {
        counts: h.counts.to_vec(),
        labels: core::patterns::PATTERN_LABELS.to_vec(),
        excluded_ties: h.excluded_ties,
        excluded_missing: h.excluded_missing,
        support: h.support(),
        delay: d,
    })
}

/// Returns `(n12, n21, excluded)`.
#[pyfunction]
#[pyo3(signature = (x, d, cyclic=false))]
fn count_pairs(x: Vec<Option<f64>>, d: usize, cyclic: bool) -> PyResult<(u64, u64, u64)> {
    let p = core::count_pairs(&series(x)?, d, mode(cyclic)).map_err(err)?;
    Ok((p.n12, p.n21, p.excluded))
}

#[pyfunction]
#[pyo3(signature = (x, d, cyclic=false))]
fn ordinal_values(x: Vec<Option<f64>>, d: usize, cyclic: bool) -> PyResult<OrdinalValues> {
    let h = core::count_patterns3(&series(x)?, d, mode(cyclic)).map_err(err)?;
    let f = core::to_frequencies(&h).map_err(err)?;
    Ok(OrdinalValues {
        inner: core::ordinal_values(&f),
    })
}

/// Ordinal functions of an arbitrary probability vector over the six patterns.
#[pyfunction]
fn from_probabilities(p: [f64; 6]) -> PyResult<OrdinalValues> {
    let f = PatternFrequencies::from_probabilities(p).map_err(err)?;
    Ok(OrdinalValues {
        inner: core::ordinal_values(&f),
    })
}

/// Whole-series profile: a dict of columns keyed by statistic name.
#[pyfunction]
#[pyo3(signature = (x, delay_min=1, delay_max=50, cyclic=false, gate=None))]
fn profile(
    py: Python<'_>,
    x: Vec<Option<f64>>,
    delay_min: usize,
    delay_max: usize,
    cyclic: bool,
    gate: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let x = series(x)?;
    let gate = gate.unwrap_or(15.0 / x.len() as f64);
    let delays: Vec<usize> = (delay_min..=delay_max).collect();
    let rows = py
        .detach(|| core::profile(&x, &delays, mode(cyclic), gate))
        .map_err(err)?;
    let out = pyo3::types::PyDict::new(py);
    out.set_item("d", &delays)?;
    out.set_item(
        "support",
        rows.iter().map(|r| r.support).collect::<Vec<_>>(),
    )?;
    for s in Statistic::ALL {
        out.set_item(s.name(), rows.iter().map(|r| r.get(s)).collect::<Vec<_>>())?;
    }
    Ok(out.into_any().unbind())
}

#[pyfunction]
#[pyo3(signature = (x, stat, window, step=None, delay_min=1, delay_max=50, cyclic=false, gate=None))]
#[allow(clippy::too_many_arguments)]
fn run_map(
    py: Python<'_>,
    x: Vec<Option<f64>>,
    stat: &str,
    window: usize,
    step: Option<usize>,
    delay_min: usize,
    delay_max: usize,
    cyclic: bool,
    gate: Option<f64>,
) -> PyResult<WindowMap> {
    let (x, stat) = (series(x)?, self::stat(stat)?);
    let plan = plan(window, step, delay_min, delay_max, cyclic, gate)?;
    let inner = py.detach(|| core::run_map(&x, &plan, stat)).map_err(err)?;
    Ok(WindowMap { inner })
}

#[derive(IntoPyObject)]
struct PartitionResult {
    tau_tilde: WindowMap,
    beta_tilde: WindowMap,
    gamma_tilde: WindowMap,
    delta_tilde: WindowMap,
    averages: Averages,
}

#[derive(IntoPyObject)]
struct Averages {
    tau_tilde: f64,
    beta_tilde: f64,
    gamma_tilde: f64,
    delta_tilde: f64,
    residual: f64,
    gated_fraction: f64,
    ungated_cells: usize,
}

#[pyfunction]
#[pyo3(signature = (x, window, step=None, delay_min=1, delay_max=50, cyclic=false, gate=None))]
#[allow(clippy::too_many_arguments)]
fn run_partition_map(
    py: Python<'_>,
    x: Vec<Option<f64>>,
    window: usize,
    step: Option<usize>,
    delay_min: usize,
    delay_max: usize,
    cyclic: bool,
    gate: Option<f64>,
) -> PyResult<PartitionResult> {
    let x = series(x)?;
    let plan = plan(window, step, delay_min, delay_max, cyclic, gate)?;
    let pm = py
        .detach(|| core::run_partition_map(&x, &plan))
        .map_err(err)?;
    let a = pm.averages;
    Ok(PartitionResult {
        tau_tilde: WindowMap {
            inner: pm.tau_tilde,
        },
        beta_tilde: WindowMap {
            inner: pm.beta_tilde,
        },
        gamma_tilde: WindowMap {
            inner: pm.gamma_tilde,
        },
        delta_tilde: WindowMap {
            inner: pm.delta_tilde,
        },
        averages: Averages {
            tau_tilde: a.tau_tilde,
            beta_tilde: a.beta_tilde,
            gamma_tilde: a.gamma_tilde,
            delta_tilde: a.delta_tilde,
            residual: a.residual,
            gated_fraction: a.gated_fraction,
            ungated_cells: a.ungated_cells,
        },
    })
}

#[derive(IntoPyObject)]
struct Summary {
    start: usize,
    mean_abs_amplitude: Option<f64>,
    mean_delta_sq: Option<f64>,
    ungated_fraction: f64,
}

/// Per-window amplitude and band-mean distance to white noise.
#[pyfunction]
#[pyo3(signature = (x, window, band, step=None, delay_min=1, delay_max=50, cyclic=false, gate=None))]
#[allow(clippy::too_many_arguments)]
fn summary(
    py: Python<'_>,
    x: Vec<Option<f64>>,
    window: usize,
    band: (usize, usize),
    step: Option<usize>,
    delay_min: usize,
    delay_max: usize,
    cyclic: bool,
    gate: Option<f64>,
) -> PyResult<Vec<Summary>> {
    let x = series(x)?;
    let plan = plan(window, step, delay_min, delay_max, cyclic, gate)?;
    let rows = py
        .detach(|| core::run_summary(&x, &plan, band.0..=band.1))
        .map_err(err)?;
    Ok(rows
        .into_iter()
        .map(|r| Summary {
            start: r.start,
            mean_abs_amplitude: r.mean_abs_amplitude,
            mean_delta_sq: r.mean_delta_sq,
            ungated_fraction: r.ungated_fraction,
        })
        .collect())
}

#[derive(IntoPyObject)]
struct Check {
    discrepancy: f64,
    nominal_bound: f64,
    tie_slack: f64,
    holds: bool,
}

/// Identity discrepancies keyed by name.
#[pyfunction]
#[pyo3(signature = (x, d, cyclic=false))]
fn check_identities(
    x: Vec<Option<f64>>,
    d: usize,
    cyclic: bool,
) -> PyResult<std::collections::BTreeMap<&'static str, Check>> {
    let r = core::check_identities(&series(x)?, d, mode(cyclic)).map_err(err)?;
    Ok(r.checks()
        .into_iter()
        .map(|(name, c)| {
            (
                name,
                Check {
                    discrepancy: c.discrepancy,
                    nominal_bound: c.nominal_bound,
                    tie_slack: c.tie_slack,
                    holds: c.holds(1e-12),
                },
            )
        })
        .collect())
}

#[derive(IntoPyObject)]
struct Entropy {
    order: usize,
    entropy: f64,
    divergence: f64,
    delta_sq: f64,
    support: u64,
}

/// Permutation entropy for patterns of length `order` (2..=7).
#[pyfunction]
#[pyo3(signature = (x, d, order, cyclic=false))]
fn entropy_n(x: Vec<Option<f64>>, d: usize, order: usize, cyclic: bool) -> PyResult<Entropy> {
    let h = core::count_patterns_n(&series(x)?, d, order, mode(cyclic)).map_err(err)?;
    let e = core::entropy_n(&h).map_err(err)?;
    Ok(Entropy {
        support: h.support(),
        order,
        entropy: e.entropy,
        divergence: e.divergence,
        delta_sq: e.delta_sq,
    })
}

#[derive(IntoPyObject)]
struct SignTest {
    positives: u64,
    trials: u64,
    zeros_dropped: usize,
    p_value: f64,
}

/// Exact sign test of window values against a zero median.
#[pyfunction]
#[pyo3(signature = (values, sided="two"))]
fn median_test(values: Vec<f64>, sided: &str) -> PyResult<SignTest> {
    let sided = match sided {
        "one" => Sided::One,
        "two" => Sided::Two,
        other => {
            return Err(OrdinalError::new_err(format!(
                "sided must be 'one' or 'two', got '{other}'"
            )))
        }
    };
    let present: Vec<f64> = values.into_iter().filter(|v| !v.is_nan()).collect();
    let (signs, zeros) = signs_of(&present);
    let r = core::median_test(&signs, sided).map_err(err)?;
    Ok(SignTest {
        positives: r.positives,
        trials: r.trials,
        zeros_dropped: zeros,
        p_value: r.p_value,
    })
}

/// Returns `(c, sigma, k)` fitted from statistic values of windows of length `n`.
#[pyfunction]
fn estimate_c(samples: Vec<f64>, n: usize) -> PyResult<(f64, f64, f64)> {
    let m = core::estimate_c(&samples, n).map_err(err)?;
    Ok((m.c, m.sigma, m.k))
}

#[pyfunction]
fn required_n(target_halfwidth: f64, c: f64) -> PyResult<u64> {
    core::required_n(target_halfwidth, c).map_err(err)
}

/// Returns `(sigma, gate)` for the distance to white noise at window length `n`.
#[pyfunction]
fn delta_sq_null_bound(n: usize) -> PyResult<(f64, f64)> {
    let b = core::delta_sq_null_bound(n).map_err(err)?;
    Ok((b.sigma, b.gate))
}

/// Synthetic series: kind is white, ar2, brownian or periodic.
#[pyfunction]
#[pyo3(signature = (kind, length, seed=0, a1=1.85, a2=-0.96, noise_std=1.0, period=100.0, waveform="sine", amplitude=1.0))]
#[allow(clippy::too_many_arguments)]
fn generate(
    kind: &str,
    length: usize,
    seed: u64,
    a1: f64,
    a2: f64,
    noise_std: f64,
    period: f64,
    waveform: &str,
    amplitude: f64,
) -> PyResult<Vec<f64>> {
    let kind = match kind {
        "white" => GeneratorKind::WhiteNoise { std: noise_std },
        "ar2" => GeneratorKind::Ar2 { a1, a2, noise_std },
        "brownian" => GeneratorKind::Brownian {
            step_std: noise_std,
        },
        "periodic" => GeneratorKind::Periodic {
            period,
            waveform: match waveform {
                "sine" => Waveform::Sine,
                "sawtooth" => Waveform::Sawtooth,
                other => return Err(OrdinalError::new_err(format!("unknown waveform '{other}'"))),
            },
            amplitude,
            noise_std: 0.0,
        },
        other => {
            return Err(OrdinalError::new_err(format!(
                "unknown generator '{other}'"
            )))
        }
    };
    let spec = GeneratorSpec::new(kind, length, seed).map_err(err)?;
    Ok(core::generate(&spec).map_err(err)?.into_values())
}

/// Disturbance: noise (snr), outliers (fraction, amplitude), lowfreq (scale, amplitude), exp (scale).
#[pyfunction]
#[pyo3(signature = (x, kind, seed=0, snr=1.0, fraction=0.01, amplitude=None, scale=None))]
#[allow(clippy::too_many_arguments)]
fn disturb(
    x: Vec<Option<f64>>,
    kind: &str,
    seed: u64,
    snr: f64,
    fraction: f64,
    amplitude: Option<f64>,
    scale: Option<f64>,
) -> PyResult<Vec<f64>> {
    let kind = match kind {
        "noise" => DisturbanceKind::AdditiveWhiteNoise { snr },
        "outliers" => DisturbanceKind::Outliers {
            fraction,
            amplitude_in_sigmas: amplitude.unwrap_or(20.0),
        },
        "lowfreq" => DisturbanceKind::LowFrequency {
            period_scale: scale.unwrap_or(300.0),
            amplitude: amplitude.unwrap_or(1.0),
        },
        "exp" => DisturbanceKind::MonotoneTransform {
            scale: scale.unwrap_or(7.0),
        },
        other => {
            return Err(OrdinalError::new_err(format!(
                "unknown disturbance '{other}'"
            )))
        }
    };
    let spec = DisturbanceSpec::new(kind, seed).map_err(err)?;
    Ok(core::disturb(&series(x)?, &spec)
        .map_err(err)?
        .into_values())
}

/// Reads a series file: format is csv, csv2 (time,value) or raw (f64 little endian).
#[pyfunction]
#[pyo3(signature = (path, format="csv", missing_token="NaN"))]
fn load_series(path: PathBuf, format: &str, missing_token: &str) -> PyResult<Vec<f64>> {
    let format: SeriesFormat = format.parse().map_err(err)?;
    let fmt = SeriesFileFormat {
        format,
        missing_token: missing_token.to_string(),
    };
    Ok(ordinal_scan::io::load_series(path, &fmt)
        .map_err(err)?
        .into_values())
}

/// Ordinal-pattern autocorrelation functions and sliding-window maps.
#[pymodule]
mod ordscan {
    #[pymodule_export]
    use super::{
        check_identities, count_pairs, count_patterns3, delta_sq_null_bound, disturb, entropy_n,
        estimate_c, from_probabilities, generate, load_series, median_test, ordinal_values,
        profile, required_n, run_map, run_partition_map, summary, OrdinalError, OrdinalValues,
        WindowMap,
    };

    use pyo3::prelude::*;

    #[pymodule_init]
    fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
        super::configure_threads_from_env();
        m.add("LN_6", ordinal_scan::LN_6)?;
        m.add("__version__", env!("CARGO_PKG_VERSION"))?;
        Ok(())
    }
}
