use std::path::{Path, PathBuf};

use fluxkit::fit::{PowerPoint, SpectrumObservation, TransitionKind};
use fluxkit::resonator::{AttenuationTable, Baseline, ResonanceParams, SweepDirection, SweepTrace};
use nalgebra::Complex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{TraceFormat, FORMAT_VERSION};
use crate::error::{CliError, CliResult};

type C64 = Complex<f64>;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Writes rows of already formatted cells under `header`.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::io(path, e);
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io(path, e))?;
    write_bytes(path, &bytes)
}

/// Known ground truth of a synthesized trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceTruth {
    pub params: ResonanceParams,
    pub baseline: Baseline,
    pub snr_db: Option<f64>,
}

/// Metadata stored next to a trace as `<stem>.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSidecar {
    pub format_version: u32,
    /// Instrument output power, dBm.
    #[serde(default)]
    pub drive_power_dbm: Option<f64>,
    /// `(frequency GHz, attenuation dB)` pairs.
    #[serde(default)]
    pub attenuation: Option<Vec<(f64, f64)>>,
    /// CSV with columns `frequency_hz, attenuation_db`, relative to the sidecar.
    #[serde(default)]
    pub attenuation_file: Option<PathBuf>,
    #[serde(default)]
    pub sweep_direction: Option<SweepDirection>,
    #[serde(default)]
    pub truth: Option<TraceTruth>,
}

pub fn sidecar_path(trace: &Path) -> PathBuf {
    trace.with_extension("json")
}

/// A trace with the hash of every file it was read from.
#[derive(Debug, Clone)]
pub struct LoadedTrace {
    pub trace: SweepTrace,
    pub sidecar: Option<TraceSidecar>,
    pub hashes: Vec<(PathBuf, String)>,
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

fn cell(path: &Path, rec: &csv::StringRecord, row: usize, idx: usize, name: &str) -> CliResult<f64> {
    let raw = rec.get(idx).unwrap_or("").trim();
    raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
        CliError::Validation(format!("{}: row {row}: {name} = {raw:?} is not a finite number", path.display()))
    })
}

/// Reads a trace CSV (`frequency_hz` with `s21_real, s21_imag` or
/// `s21_mag_db, s21_phase_deg`) and its optional sidecar. Rows are numbered
/// as lines of the file, header included.
pub fn read_trace(path: &Path) -> CliResult<LoadedTrace> {
    let bytes = read_bytes(path)?;
    let mut hashes = vec![(path.to_path_buf(), sha256_hex(&bytes))];
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes.as_slice());
    let headers = rdr.headers().map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?.clone();
    let invalid = |msg: String| CliError::Validation(format!("{}: {msg}", path.display()));
    let f_col = column(&headers, "frequency_hz").ok_or_else(|| invalid("missing column frequency_hz".into()))?;
    let (polar, c1, c2) = match (
        column(&headers, "s21_real"),
        column(&headers, "s21_imag"),
        column(&headers, "s21_mag_db"),
        column(&headers, "s21_phase_deg"),
    ) {
        (Some(r), Some(i), _, _) => (false, r, i),
        (_, _, Some(m), Some(p)) => (true, m, p),
        _ => return Err(invalid("expected columns s21_real, s21_imag or s21_mag_db, s21_phase_deg".into())),
    };
    let (n1, n2) = if polar { ("s21_mag_db", "s21_phase_deg") } else { ("s21_real", "s21_imag") };
    let mut freqs = Vec::new();
    let mut s21 = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| invalid(format!("row {row}: {e}")))?;
        let f = cell(path, &rec, row, f_col, "frequency_hz")? * 1e-9;
        let (u, v) = (cell(path, &rec, row, c1, n1)?, cell(path, &rec, row, c2, n2)?);
        if let Some(&prev) = freqs.last() {
            if !(f > prev) {
                return Err(invalid(format!("row {row}: frequency_hz is not increasing")));
            }
        }
        freqs.push(f);
        s21.push(if polar { C64::from_polar(10f64.powf(u / 20.0), v.to_radians()) } else { C64::new(u, v) });
    }
    let mut trace = SweepTrace::new(freqs, s21).map_err(|e| invalid(e.to_string()))?;
    let side = sidecar_path(path);
    let sidecar = if side.exists() {
        let bytes = read_bytes(&side)?;
        hashes.push((side.clone(), sha256_hex(&bytes)));
        let meta: TraceSidecar =
            serde_json::from_slice(&bytes).map_err(|e| CliError::Validation(format!("{}: {e}", side.display())))?;
        if meta.format_version != FORMAT_VERSION {
            return Err(CliError::Validation(format!(
                "{}: unsupported format_version {}",
                side.display(),
                meta.format_version
            )));
        }
        trace.drive_power = meta.drive_power_dbm;
        trace.sweep_direction = meta.sweep_direction.unwrap_or_default();
        let mut points = meta.attenuation.clone().unwrap_or_default();
        if let Some(file) = &meta.attenuation_file {
            let file = side.parent().map_or(file.clone(), |d| d.join(file));
            let bytes = read_bytes(&file)?;
            hashes.push((file.clone(), sha256_hex(&bytes)));
            points.extend(read_attenuation(&file, &bytes)?);
        }
        if !points.is_empty() {
            trace.line_attenuation = Some(
                AttenuationTable::new(points).map_err(|e| CliError::Validation(format!("{}: {e}", side.display())))?,
            );
        }
        Some(meta)
    } else {
        None
    };
    Ok(LoadedTrace { trace, sidecar, hashes })
}

fn read_attenuation(path: &Path, bytes: &[u8]) -> CliResult<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let headers = rdr.headers().map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?.clone();
    let missing = |c: &str| CliError::Validation(format!("{}: missing column {c}", path.display()));
    let f = column(&headers, "frequency_hz").ok_or_else(|| missing("frequency_hz"))?;
    let a = column(&headers, "attenuation_db").ok_or_else(|| missing("attenuation_db"))?;
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Validation(format!("{}: row {}: {e}", path.display(), k + 2)))?;
        out.push((cell(path, &rec, k + 2, f, "frequency_hz")? * 1e-9, cell(path, &rec, k + 2, a, "attenuation_db")?));
    }
    Ok(out)
}

/// Trace CSV in the requested column convention.
pub fn trace_csv(trace: &SweepTrace, format: TraceFormat) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = match format {
        TraceFormat::RealImag => ["frequency_hz", "s21_real", "s21_imag"],
        TraceFormat::MagPhase => ["frequency_hz", "s21_mag_db", "s21_phase_deg"],
    };
    let fail = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(fail)?;
    for (f, z) in trace.frequencies.iter().zip(&trace.s21) {
        let (u, v) = match format {
            TraceFormat::RealImag => (z.re, z.im),
            TraceFormat::MagPhase => (20.0 * z.norm().log10(), z.arg().to_degrees()),
        };
        w.write_record([(f * 1e9).to_string(), u.to_string(), v.to_string()]).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// Expands directories into their `*.csv` files, sorted by name.
pub fn expand_traces(entries: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for e in entries {
        if e.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(e)
                .map_err(|err| CliError::io(e, err))?
                .filter_map(|d| d.ok().map(|d| d.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .collect();
            files.sort();
            out.extend(files);
        } else if e.exists() {
            out.push(e.clone());
        } else {
            return Err(CliError::io(e, "no such file or directory"));
        }
    }
    Ok(out)
}

/// Power-sweep points from `mean_n, q_int[, a]`.
pub fn read_power_points(path: &Path) -> CliResult<(Vec<PowerPoint>, String)> {
    let bytes = read_bytes(path)?;
    let hash = sha256_hex(&bytes);
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes.as_slice());
    let headers = rdr.headers().map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?.clone();
    let missing = |c: &str| CliError::Validation(format!("{}: missing column {c}", path.display()));
    let n = column(&headers, "mean_n").ok_or_else(|| missing("mean_n"))?;
    let q = column(&headers, "q_int").ok_or_else(|| missing("q_int"))?;
    let a = column(&headers, "a");
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| CliError::Validation(format!("{}: row {row}: {e}", path.display())))?;
        out.push(PowerPoint {
            mean_n: cell(path, &rec, row, n, "mean_n")?,
            q_int: cell(path, &rec, row, q, "q_int")?,
            a: match a {
                Some(i) => cell(path, &rec, row, i, "a")?,
                None => 0.0,
            },
        });
    }
    Ok((out, hash))
}

/// Spectroscopy lines from `flux, frequency_ghz, kind, i, j[, sigma_ghz]`
/// where `kind` is `qubit` or `resonator`.
pub fn read_observations(path: &Path) -> CliResult<(Vec<SpectrumObservation>, String)> {
    let bytes = read_bytes(path)?;
    let hash = sha256_hex(&bytes);
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes.as_slice());
    let headers = rdr.headers().map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?.clone();
    let missing = |c: &str| CliError::Validation(format!("{}: missing column {c}", path.display()));
    let flux = column(&headers, "flux").ok_or_else(|| missing("flux"))?;
    let freq = column(&headers, "frequency_ghz").ok_or_else(|| missing("frequency_ghz"))?;
    let kind = column(&headers, "kind").ok_or_else(|| missing("kind"))?;
    let (ci, cj) = (column(&headers, "i"), column(&headers, "j"));
    let sigma = column(&headers, "sigma_ghz");
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| CliError::Validation(format!("{}: row {row}: {e}", path.display())))?;
        let level = |c: Option<usize>, name: &str| -> CliResult<usize> {
            let raw = c.and_then(|c| rec.get(c)).unwrap_or("");
            raw.parse().map_err(|_| {
                CliError::Validation(format!("{}: row {row}: {name} = {raw:?} is not a level index", path.display()))
            })
        };
        let kind = match rec.get(kind).unwrap_or("") {
            "resonator" => TransitionKind::Resonator,
            "qubit" => TransitionKind::Qubit { i: level(ci, "i")?, j: level(cj, "j")? },
            other => {
                return Err(CliError::Validation(format!(
                    "{}: row {row}: kind {other:?} must be qubit or resonator",
                    path.display()
                )))
            }
        };
        let sigma = match sigma.and_then(|c| rec.get(c)).filter(|s| !s.is_empty()) {
            Some(_) => Some(cell(path, &rec, row, sigma.unwrap_or_default(), "sigma_ghz")?),
            None => None,
        };
        out.push(SpectrumObservation {
            flux: cell(path, &rec, row, flux, "flux")?,
            frequency: cell(path, &rec, row, freq, "frequency_ghz")?,
            kind,
            sigma,
        });
    }
    Ok((out, hash))
}

pub fn observation_rows(obs: &[SpectrumObservation]) -> Vec<Vec<String>> {
    obs.iter()
        .map(|o| {
            let (kind, i, j) = match o.kind {
                TransitionKind::Resonator => ("resonator", String::new(), String::new()),
                TransitionKind::Qubit { i, j } => ("qubit", i.to_string(), j.to_string()),
            };
            vec![
                o.flux.to_string(),
                o.frequency.to_string(),
                kind.to_string(),
                i,
                j,
                o.sigma.map(|s| s.to_string()).unwrap_or_default(),
            ]
        })
        .collect()
}

pub const OBSERVATION_HEADER: [&str; 6] = ["flux", "frequency_ghz", "kind", "i", "j", "sigma_ghz"];
