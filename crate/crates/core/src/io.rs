//! Series ingestion and map export.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{OrdinalError, Result};
use crate::series::TimeSeries;
use crate::window::WindowMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeriesFormat {
    /// One value per line.
    #[default]
    CsvSingleColumn,
    /// `time,value` per line; the time column must be strictly increasing.
    CsvTimeValue,
    /// Little-endian IEEE-754 doubles, no header.
    RawF64Le,
}

impl std::str::FromStr for SeriesFormat {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" | "csv_single_column" => Ok(SeriesFormat::CsvSingleColumn),
            "csv2" | "csv_two_column_time_value" => Ok(SeriesFormat::CsvTimeValue),
            "raw" | "raw_f64le" => Ok(SeriesFormat::RawF64Le),
            other => Err(OrdinalError::domain(format!(
                "unknown series format '{other}' (csv, csv2, raw)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesFileFormat {
    pub format: SeriesFormat,
    /// Token read as a missing value; an empty field is always missing.
    pub missing_token: String,
}

impl Default for SeriesFileFormat {
    fn default() -> Self {
        SeriesFileFormat {
            format: SeriesFormat::CsvSingleColumn,
            missing_token: "NaN".to_string(),
        }
    }
}

impl SeriesFileFormat {
    pub fn new(format: SeriesFormat) -> Self {
        SeriesFileFormat {
            format,
            ..Default::default()
        }
    }
}

pub fn load_series(path: impl AsRef<Path>, fmt: &SeriesFileFormat) -> Result<TimeSeries> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| OrdinalError::io(path, e))?;
    parse_series(&bytes, fmt, path)
}

/// Parses file contents; `origin` is only used in error messages.
pub fn parse_series(bytes: &[u8], fmt: &SeriesFileFormat, origin: &Path) -> Result<TimeSeries> {
    let values = match fmt.format {
        SeriesFormat::RawF64Le => {
            if !bytes.len().is_multiple_of(8) {
                return Err(OrdinalError::Parse {
                    path: origin.to_path_buf(),
                    line: 0,
                    message: format!("raw length {} is not a multiple of 8 bytes", bytes.len()),
                });
            }
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect()
        }
        SeriesFormat::CsvSingleColumn | SeriesFormat::CsvTimeValue => {
            let text = std::str::from_utf8(bytes).map_err(|e| OrdinalError::Parse {
                path: origin.to_path_buf(),
                line: 0,
                message: format!("not UTF-8: {e}"),
            })?;
            parse_csv(text, fmt, origin)?
        }
    };
    if values.is_empty() {
        return Err(OrdinalError::EmptyInput(origin.to_path_buf()));
    }
    TimeSeries::new(values).map_err(|e| match e {
        OrdinalError::Domain(m) => OrdinalError::Parse {
            path: origin.to_path_buf(),
            line: 0,
            message: m,
        },
        other => other,
    })
}

fn parse_csv(text: &str, fmt: &SeriesFileFormat, origin: &Path) -> Result<Vec<f64>> {
    let err = |line: usize, message: String| OrdinalError::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let field = |s: &str, line: usize| -> Result<f64> {
        let s = s.trim();
        if s.is_empty() || s == fmt.missing_token {
            return Ok(f64::NAN);
        }
        s.parse::<f64>()
            .map_err(|_| err(line, format!("cannot parse '{s}' as a number")))
    };
    let two = fmt.format == SeriesFormat::CsvTimeValue;
    let mut out = Vec::with_capacity(text.len() / 8);
    let mut last_time = f64::NEG_INFINITY;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if line == 1 && is_header(raw, fmt) {
            continue;
        }
        if two {
            let (t, v) = raw
                .split_once(',')
                .ok_or_else(|| err(line, "expected 'time,value'".to_string()))?;
            let t = t.trim();
            let t: f64 = t
                .parse()
                .map_err(|_| err(line, format!("cannot parse time '{t}'")))?;
            if t.is_nan() || t <= last_time {
                return Err(err(line, format!("time {t} does not increase")));
            }
            last_time = t;
            out.push(field(v, line)?);
        } else {
            if raw.contains(',') {
                return Err(err(line, "expected a single column".to_string()));
            }
            out.push(field(raw, line)?);
        }
    }
    Ok(out)
}

/// A first line that is neither numeric, empty nor the missing token.
fn is_header(line: &str, fmt: &SeriesFileFormat) -> bool {
    let first = line.split(',').next().unwrap_or("").trim();
    !first.is_empty()
        && first != fmt.missing_token
        && first.parse::<f64>().is_err()
        && first.chars().any(|c| c.is_ascii_alphabetic())
}

/// Writes a series in the given format (CSV uses shortest round-trip text).
pub fn write_series(path: impl AsRef<Path>, x: &TimeSeries, format: SeriesFormat) -> Result<()> {
    let mut buf = Vec::with_capacity(x.len() * 20);
    match format {
        SeriesFormat::RawF64Le => {
            for v in x.values() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        SeriesFormat::CsvSingleColumn => {
            for v in x.values() {
                writeln!(buf, "{v}").unwrap();
            }
        }
        SeriesFormat::CsvTimeValue => {
            for (t, v) in x.values().iter().enumerate() {
                writeln!(buf, "{t},{v}").unwrap();
            }
        }
    }
    write_atomic(path.as_ref(), &buf)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| OrdinalError::io(path, e))?;
    tmp.write_all(bytes)
        .map_err(|e| OrdinalError::io(path, e))?;
    tmp.persist(path)
        .map_err(|e| OrdinalError::io(path, e.error))?;
    Ok(())
}

/// Formats `v` with 9 significant digits, `%g` style. NaN prints as `NaN`.
pub fn format_sig9(v: f64) -> String {
    if v.is_nan() {
        return "NaN".to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MapFormat {
    #[default]
    CsvMatrix,
    /// Binary 8-bit greymap, delays on rows.
    Pgm,
}

impl std::str::FromStr for MapFormat {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" | "csv_matrix" => Ok(MapFormat::CsvMatrix),
            "pgm" | "pgm_p5" => Ok(MapFormat::Pgm),
            other => Err(OrdinalError::domain(format!(
                "unknown map format '{other}' (csv, pgm)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapExportFormat {
    pub format: MapFormat,
    /// Values mapped to grey levels 0 and 255 (PGM only).
    pub value_range: (f64, f64),
}

impl MapExportFormat {
    pub fn csv() -> Self {
        MapExportFormat {
            format: MapFormat::CsvMatrix,
            value_range: (0.0, 1.0),
        }
    }

    pub fn pgm(lo: f64, hi: f64) -> Self {
        MapExportFormat {
            format: MapFormat::Pgm,
            value_range: (lo, hi),
        }
    }
}

/// CSV matrix: a `#` comment line describing rows and columns, then one
/// line per delay with one field per window. Masked cells are `NaN`.
pub fn map_to_csv(m: &WindowMap) -> String {
    let mut out = String::with_capacity(m.values.len() * 12 + 64);
    let delays: Vec<String> = m.plan.delays.iter().map(|d| d.to_string()).collect();
    let starts: Vec<String> = m.starts.iter().map(|s| s.to_string()).collect();
    out.push_str(&format!(
        "# stat={} window={} step={} delays={} starts={}\n",
        m.stat,
        m.plan.window,
        m.plan.step,
        delays.join(";"),
        starts.join(";")
    ));
    let cols = m.cols();
    for r in 0..m.rows() {
        let row: Vec<String> = (0..cols)
            .map(|c| format_sig9(m.get(r, c).unwrap_or(f64::NAN)))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// `round(255 (v - lo) / (hi - lo))`, clamped; masked cells are 0.
pub fn pixel(v: Option<f64>, lo: f64, hi: f64) -> u8 {
    match v {
        Some(v) if hi > lo => (255.0 * (v - lo) / (hi - lo)).round().clamp(0.0, 255.0) as u8,
        Some(_) => 255,
        None => 0,
    }
}

pub fn map_to_pgm(m: &WindowMap, lo: f64, hi: f64) -> Vec<u8> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.reserve(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            out.push(pixel(m.get(r, c), lo, hi));
        }
    }
    out
}

pub fn export_map(m: &WindowMap, fmt: &MapExportFormat, path: impl AsRef<Path>) -> Result<()> {
    let bytes = match fmt.format {
        MapFormat::CsvMatrix => map_to_csv(m).into_bytes(),
        MapFormat::Pgm => {
            let (lo, hi) = fmt.value_range;
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(OrdinalError::domain(format!(
                    "PGM value range must satisfy lo < hi, got ({lo}, {hi})"
                )));
            }
            map_to_pgm(m, lo, hi)
        }
    };
    write_atomic(path.as_ref(), &bytes)
}

/// Reads a CSV matrix written by [`export_map`]; `None` marks masked cells.
pub fn import_csv_matrix(path: impl AsRef<Path>) -> Result<Vec<Vec<Option<f64>>>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| OrdinalError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty())
        .map(|(i, l)| {
            l.split(',')
                .map(|f| match f.trim() {
                    "NaN" => Ok(None),
                    s => s.parse::<f64>().map(Some).map_err(|_| OrdinalError::Parse {
                        path: path.to_path_buf(),
                        line: i + 1,
                        message: format!("cannot parse '{s}'"),
                    }),
                })
                .collect()
        })
        .collect()
}
