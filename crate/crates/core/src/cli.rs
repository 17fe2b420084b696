//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use ordinal_scan::inference::{large_delay_warning, median_test, signs_of, Sided};
use ordinal_scan::io::{
    export_map, format_sig9, load_series, write_atomic, write_series, MapExportFormat,
    SeriesFileFormat, SeriesFormat,
};
use ordinal_scan::models::{
    disturb, generate, DisturbanceKind, DisturbanceSpec, GeneratorKind, GeneratorSpec, Waveform,
};
use ordinal_scan::window::{
    configure_threads_from_env, profile, run_map, run_partition_map, run_summary,
};
use ordinal_scan::{
    check_identities, cumulative_preprocess, BoundaryMode, MissingPolicy, OrdinalError, Statistic,
    TimeSeries, WindowPlan,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ordinal-scan",
    version,
    about = "Ordinal-pattern autocorrelation maps for long, dirty series"
)]
struct Cli {
    /// key = value file supplying defaults for long flags; flags win
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Whole-series ordinal functions for each delay (CSV)
    Profile {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        delays: DelayArgs,
        /// Gate for the partition columns (default 15/T)
        #[arg(long)]
        gate: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sliding-window map of one statistic
    Map {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        delays: DelayArgs,
        #[command(flatten)]
        windows: WindowArgs,
        #[arg(long, default_value = "tau")]
        stat: String,
        #[arg(long, value_enum, default_value_t = MapOut::Csv)]
        map_format: MapOut,
        /// Value range mapped onto grey levels, as lo,hi (PGM only)
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        range: Option<(f64, f64)>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Partition maps of the distance to white noise with averages
    Partition {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        delays: DelayArgs,
        #[command(flatten)]
        windows: WindowArgs,
        #[arg(long, value_enum, default_value_t = MapOut::Csv)]
        map_format: MapOut,
        /// Path prefix for the four component maps
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Per-window mean |x|, band-mean distance to white noise, ungated fraction
    Summary {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        delays: DelayArgs,
        #[command(flatten)]
        windows: WindowArgs,
        #[arg(long)]
        band_min: Option<f64>,
        #[arg(long)]
        band_max: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Discrepancies of the pattern identities for each delay
    Identities {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        delays: DelayArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exact sign test on window values (one value per line)
    Mediantest {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = SidedArg::Two)]
        sided: SidedArg,
    },
    /// Generate a synthetic series
    Simulate {
        #[arg(long, value_enum, default_value_t = Kind::Ar2)]
        kind: Kind,
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.85, allow_hyphen_values = true)]
        a1: f64,
        #[arg(long, default_value_t = -0.96, allow_hyphen_values = true)]
        a2: f64,
        /// Noise (or step) standard deviation
        #[arg(long, default_value_t = 1.0)]
        noise_std: f64,
        /// Period in samples (periodic kind)
        #[arg(long, default_value_t = 100.0)]
        period: f64,
        #[arg(long, value_enum, default_value_t = Wave::Sine)]
        waveform: Wave,
        /// Periodic noise standard deviation
        #[arg(long, default_value_t = 0.0)]
        periodic_noise: f64,
        /// Add Gaussian noise at this signal-to-noise variance ratio
        #[arg(long)]
        snr: Option<f64>,
        /// Replace this fraction of samples by outliers
        #[arg(long)]
        outlier_fraction: Option<f64>,
        #[arg(long, default_value_t = 20.0)]
        outlier_amplitude: f64,
        /// Add amplitude * sin(t / scale)
        #[arg(long)]
        lowfreq_scale: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        lowfreq_amplitude: f64,
        /// Apply y = exp(x / scale)
        #[arg(long)]
        exp_scale: Option<f64>,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct InputArgs {
    input: PathBuf,
    /// Input format: csv, csv2 (time,value) or raw (f64 little endian)
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long, default_value = "NaN")]
    missing_token: String,
    /// Replace the series by its running sums
    #[arg(long)]
    cumsum: bool,
    /// Sampling rate; when given, window, step, delay and band flags are seconds
    #[arg(long)]
    hz: Option<f64>,
}

#[derive(Debug, Args)]
struct DelayArgs {
    /// Smallest delay (default 1 sample)
    #[arg(long)]
    delay_min: Option<f64>,
    /// Largest delay (default 50 samples)
    #[arg(long)]
    delay_max: Option<f64>,
    /// Count patterns cyclically (indices modulo the length)
    #[arg(long)]
    cyclic: bool,
}

#[derive(Debug, Args)]
struct WindowArgs {
    #[arg(long)]
    window: f64,
    /// Defaults to the window length (non-overlapping windows)
    #[arg(long)]
    step: Option<f64>,
    /// Gate threshold for the distance to white noise (default 15/window)
    #[arg(long)]
    gate: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MapOut {
    Csv,
    Pgm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SidedArg {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    White,
    Ar2,
    Brownian,
    Periodic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Wave {
    Sine,
    Sawtooth,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number '{a}'"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number '{b}'"))?;
    Ok((lo, hi))
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(OrdinalError),
}

impl From<OrdinalError> for Failure {
    fn from(e: OrdinalError) -> Self {
        Failure::Data(e)
    }
}

type CliResult<T> = Result<T, Failure>;

/// Parses `argv` (including the program name), runs, and returns the exit code.
pub fn run(argv: Vec<OsString>) -> i32 {
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    configure_threads_from_env();
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

/// Inserts `--key value` pairs from the config file for every long flag of
/// the chosen subcommand that is not already on the command line.
fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let args: Vec<String> = argv
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let mut config_path = None;
    for (i, a) in args.iter().enumerate() {
        if let Some(p) = a.strip_prefix("--config=") {
            config_path = Some(p.to_string());
        } else if a == "--config" {
            config_path = args.get(i + 1).cloned();
        }
    }
    let Some(config_path) = config_path else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&config_path)
        .map_err(|e| format!("cannot read config {config_path}: {e}"))?;

    let cmd = Cli::command();
    let sub_names: Vec<String> = cmd
        .get_subcommands()
        .map(|s| s.get_name().to_string())
        .collect();
    let Some(sub_pos) = args.iter().position(|a| sub_names.contains(a)) else {
        return Ok(argv);
    };
    let sub = cmd.find_subcommand(&args[sub_pos]).unwrap();
    let known_anywhere: Vec<String> = cmd
        .get_subcommands()
        .flat_map(|s| {
            s.get_arguments()
                .filter_map(|a| a.get_long().map(str::to_string))
        })
        .collect();

    let mut injected = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{config_path}:{}: expected key = value", lineno + 1))?;
        let (key, value) = (key.trim().replace('_', "-"), value.trim().trim_matches('"'));
        if !known_anywhere.contains(&key) {
            return Err(format!("{config_path}:{}: unknown key '{key}'", lineno + 1));
        }
        let Some(arg) = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
        else {
            continue;
        };
        let flag = format!("--{key}");
        let given = args
            .iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if given {
            continue;
        }
        if arg.get_action().takes_values() {
            injected.push(format!("{flag}={value}"));
        } else if value == "true" {
            injected.push(flag);
        } else if value != "false" {
            return Err(format!(
                "{config_path}:{}: '{key}' expects true or false",
                lineno + 1
            ));
        }
    }
    let mut out: Vec<OsString> = argv[..=sub_pos].to_vec();
    out.extend(injected.into_iter().map(OsString::from));
    out.extend(argv[sub_pos + 1..].iter().cloned());
    Ok(out)
}

/// Converts a count flag: seconds when `hz` is set, otherwise whole samples.
fn samples(name: &str, v: f64, hz: Option<f64>) -> CliResult<usize> {
    let n = match hz {
        Some(hz) => (v * hz).round(),
        None => {
            if v.fract() != 0.0 {
                return Err(Failure::Usage(format!(
                    "--{name} must be a whole number of samples (or pass --hz), got {v}"
                )));
            }
            v
        }
    };
    if !(n >= 0.0 && n.is_finite()) {
        return Err(Failure::Usage(format!(
            "--{name} must be non-negative, got {v}"
        )));
    }
    Ok(n as usize)
}

fn load(input: &InputArgs) -> CliResult<TimeSeries> {
    let format: SeriesFormat = input
        .format
        .parse()
        .map_err(|e: OrdinalError| Failure::Usage(e.to_string()))?;
    if let Some(hz) = input.hz {
        if !(hz > 0.0 && hz.is_finite()) {
            return Err(Failure::Usage(format!("--hz must be positive, got {hz}")));
        }
    }
    let fmt = SeriesFileFormat {
        format,
        missing_token: input.missing_token.clone(),
    };
    let mut x = load_series(&input.input, &fmt)?;
    if input.cumsum {
        x = cumulative_preprocess(&x, MissingPolicy::Propagate).0;
    }
    if let Some(hz) = input.hz {
        x = x.with_sample_rate(hz)?;
    }
    Ok(x)
}

fn mode(d: &DelayArgs) -> BoundaryMode {
    if d.cyclic {
        BoundaryMode::Cyclic
    } else {
        BoundaryMode::Linear
    }
}

fn delay_range(d: &DelayArgs, hz: Option<f64>) -> CliResult<(usize, usize)> {
    let lo = match d.delay_min {
        Some(v) => samples("delay-min", v, hz)?,
        None => 1,
    };
    let hi = match d.delay_max {
        Some(v) => samples("delay-max", v, hz)?,
        None => 50,
    };
    if lo == 0 {
        return Err(Failure::Usage("delays start at 1 sample".into()));
    }
    if lo > hi {
        return Err(Failure::Usage(format!("empty delay range {lo}..={hi}")));
    }
    Ok((lo, hi))
}

fn plan(input: &InputArgs, d: &DelayArgs, w: &WindowArgs) -> CliResult<WindowPlan> {
    let window = samples("window", w.window, input.hz)?;
    let step = match w.step {
        Some(s) => samples("step", s, input.hz)?,
        None => window,
    };
    let (lo, hi) = delay_range(d, input.hz)?;
    let plan = WindowPlan::contiguous(window, step, lo, hi, mode(d), w.gate)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    if large_delay_warning(hi, window) {
        eprintln!(
            "warning: largest delay {hi} exceeds 5% of the window {window}; boundary error of order d/n is not negligible"
        );
    }
    Ok(plan)
}

fn emit(output: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match output {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn f(v: f64) -> String {
    format_sig9(v)
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Profile {
            input,
            delays,
            gate,
            output,
        } => {
            let x = load(&input)?;
            let (lo, hi) = delay_range(&delays, input.hz)?;
            let gate = gate.unwrap_or(15.0 / x.len() as f64);
            if large_delay_warning(hi, x.len()) {
                eprintln!(
                    "warning: largest delay {hi} exceeds 5% of the series length {}",
                    x.len()
                );
            }
            let grid: Vec<usize> = (lo..=hi).collect();
            let rows = profile(&x, &grid, mode(&delays), gate)?;
            let mut out = String::from("d,support");
            for s in Statistic::ALL {
                write!(out, ",{s}").unwrap();
            }
            out.push('\n');
            for r in rows {
                write!(out, "{},{}", r.delay, r.support).unwrap();
                for v in r.values {
                    write!(out, ",{}", f(v.unwrap_or(f64::NAN))).unwrap();
                }
                out.push('\n');
            }
            emit(&output, &out)
        }
        Command::Map {
            input,
            delays,
            windows,
            stat,
            map_format,
            range,
            output,
        } => {
            let stat: Statistic = stat
                .parse()
                .map_err(|e: OrdinalError| Failure::Usage(e.to_string()))?;
            let x = load(&input)?;
            let plan = plan(&input, &delays, &windows)?;
            let m = run_map(&x, &plan, stat)?;
            match map_format {
                MapOut::Csv => match &output {
                    Some(p) => export_map(&m, &MapExportFormat::csv(), p)?,
                    None => print!("{}", ordinal_scan::io::map_to_csv(&m)),
                },
                MapOut::Pgm => {
                    let p =
                        output.ok_or_else(|| Failure::Usage("PGM output needs --output".into()))?;
                    let (lo, hi) = range.unwrap_or_else(|| default_range(stat));
                    export_map(&m, &MapExportFormat::pgm(lo, hi), &p)?;
                }
            }
            eprintln!(
                "{}: {} delays x {} windows, {:.1}% masked",
                stat,
                m.rows(),
                m.cols(),
                100.0 * m.masked_fraction()
            );
            Ok(())
        }
        Command::Partition {
            input,
            delays,
            windows,
            map_format,
            output,
        } => {
            let x = load(&input)?;
            let plan = plan(&input, &delays, &windows)?;
            let pm = run_partition_map(&x, &plan)?;
            if let Some(prefix) = &output {
                let fmt = match map_format {
                    MapOut::Csv => MapExportFormat::csv(),
                    MapOut::Pgm => MapExportFormat::pgm(0.0, 1.0),
                };
                let ext = match map_format {
                    MapOut::Csv => "csv",
                    MapOut::Pgm => "pgm",
                };
                for m in [
                    &pm.tau_tilde,
                    &pm.beta_tilde,
                    &pm.gamma_tilde,
                    &pm.delta_tilde,
                ] {
                    export_map(m, &fmt, with_suffix(prefix, m.stat.name(), ext))?;
                }
            }
            let a = pm.averages;
            let mut out = String::from("component,average\n");
            for (name, v) in [
                ("tau_tilde", a.tau_tilde),
                ("beta_tilde", a.beta_tilde),
                ("gamma_tilde", a.gamma_tilde),
                ("delta_tilde", a.delta_tilde),
                ("residual", a.residual),
                ("gated_fraction", a.gated_fraction),
            ] {
                writeln!(out, "{name},{}", f(v)).unwrap();
            }
            writeln!(out, "ungated_cells,{}", a.ungated_cells).unwrap();
            print!("{out}");
            Ok(())
        }
        Command::Summary {
            input,
            delays,
            windows,
            band_min,
            band_max,
            output,
        } => {
            let x = load(&input)?;
            let plan = plan(&input, &delays, &windows)?;
            let (dlo, dhi) = (plan.delays[0], *plan.delays.last().unwrap());
            let lo = band_min
                .map(|v| samples("band-min", v, input.hz))
                .transpose()?
                .unwrap_or(dlo);
            let hi = band_max
                .map(|v| samples("band-max", v, input.hz))
                .transpose()?
                .unwrap_or(dhi);
            if lo > hi || lo < dlo || hi > dhi {
                return Err(Failure::Usage(format!(
                    "band {lo}..={hi} must lie within the delay range {dlo}..={dhi}"
                )));
            }
            let rows = run_summary(&x, &plan, lo..=hi)?;
            let mut out =
                String::from("window,start,mean_abs_amplitude,mean_delta_sq,ungated_fraction\n");
            for (i, r) in rows.iter().enumerate() {
                writeln!(
                    out,
                    "{i},{},{},{},{}",
                    r.start,
                    f(r.mean_abs_amplitude.unwrap_or(f64::NAN)),
                    f(r.mean_delta_sq.unwrap_or(f64::NAN)),
                    f(r.ungated_fraction)
                )
                .unwrap();
            }
            emit(&output, &out)
        }
        Command::Identities {
            input,
            delays,
            output,
        } => {
            let x = load(&input)?;
            let (lo, hi) = delay_range(&delays, input.hz)?;
            let mut out = String::from("d,identity,discrepancy,nominal_bound,tie_slack,holds\n");
            for d in lo..=hi {
                let r = check_identities(&x, d, mode(&delays))?;
                for (name, c) in r.checks() {
                    writeln!(
                        out,
                        "{d},{name},{},{},{},{}",
                        f(c.discrepancy),
                        f(c.nominal_bound),
                        f(c.tie_slack),
                        c.holds(1e-12)
                    )
                    .unwrap();
                }
            }
            emit(&output, &out)
        }
        Command::Mediantest { input, sided } => {
            let x = load(&input)?;
            let present: Vec<f64> = x.values().iter().copied().filter(|v| !v.is_nan()).collect();
            let (signs, zeros) = signs_of(&present);
            let sided = match sided {
                SidedArg::One => Sided::One,
                SidedArg::Two => Sided::Two,
            };
            let r = median_test(&signs, sided)?;
            println!("positives,trials,zeros_dropped,sided,p_value");
            println!(
                "{},{},{},{},{}",
                r.positives,
                r.trials,
                zeros,
                match sided {
                    Sided::One => "one",
                    Sided::Two => "two",
                },
                f(r.p_value)
            );
            Ok(())
        }
        Command::Simulate {
            kind,
            length,
            seed,
            a1,
            a2,
            noise_std,
            period,
            waveform,
            periodic_noise,
            snr,
            outlier_fraction,
            outlier_amplitude,
            lowfreq_scale,
            lowfreq_amplitude,
            exp_scale,
            format,
            output,
        } => {
            let kind = match kind {
                Kind::White => GeneratorKind::WhiteNoise { std: noise_std },
                Kind::Ar2 => GeneratorKind::Ar2 { a1, a2, noise_std },
                Kind::Brownian => GeneratorKind::Brownian {
                    step_std: noise_std,
                },
                Kind::Periodic => GeneratorKind::Periodic {
                    period,
                    waveform: match waveform {
                        Wave::Sine => Waveform::Sine,
                        Wave::Sawtooth => Waveform::Sawtooth,
                    },
                    amplitude: 1.0,
                    noise_std: periodic_noise,
                },
            };
            let spec = GeneratorSpec::new(kind, length, seed)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let mut x = generate(&spec)?;
            let disturbances = [
                snr.map(|snr| DisturbanceKind::AdditiveWhiteNoise { snr }),
                outlier_fraction.map(|fraction| DisturbanceKind::Outliers {
                    fraction,
                    amplitude_in_sigmas: outlier_amplitude,
                }),
                lowfreq_scale.map(|period_scale| DisturbanceKind::LowFrequency {
                    period_scale,
                    amplitude: lowfreq_amplitude,
                }),
                exp_scale.map(|scale| DisturbanceKind::MonotoneTransform { scale }),
            ];
            for (i, k) in disturbances.into_iter().enumerate() {
                if let Some(k) = k {
                    let spec = DisturbanceSpec::new(k, seed.wrapping_add(1 + i as u64))
                        .map_err(|e| Failure::Usage(e.to_string()))?;
                    x = disturb(&x, &spec)?;
                }
            }
            let format: SeriesFormat = format
                .parse()
                .map_err(|e: OrdinalError| Failure::Usage(e.to_string()))?;
            match output {
                Some(p) => write_series(&p, &x, format)?,
                None => {
                    if format == SeriesFormat::RawF64Le {
                        return Err(Failure::Usage("raw output needs --output".into()));
                    }
                    let mut out = String::new();
                    for v in x.values() {
                        writeln!(out, "{v}").unwrap();
                    }
                    print!("{out}");
                }
            }
            Ok(())
        }
    }
}

fn default_range(stat: Statistic) -> (f64, f64) {
    match stat {
        Statistic::Tau => (-1.0 / 3.0, 2.0 / 3.0),
        Statistic::DeltaSq => (0.0, 5.0 / 6.0),
        Statistic::Entropy | Statistic::Divergence => (0.0, ordinal_scan::LN_6),
        Statistic::TauTilde
        | Statistic::BetaTilde
        | Statistic::GammaTilde
        | Statistic::DeltaTilde
        | Statistic::Residual => (0.0, 1.0),
        _ => (-1.0, 1.0),
    }
}

fn with_suffix(prefix: &Path, name: &str, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(format!(".{name}.{ext}"));
    PathBuf::from(s)
}
