use std::path::{Path, PathBuf};

use fluxkit::circuit::{coupled_spectrum, dressed_point, fluxonium_spectrum, CoupledSystemSpec, FluxSpectrum};
use fluxkit::fit::{
    fit_power_sweep, fit_s21, fit_spectrum, PowerSweepFit, PowerSweepFitInput, S21Fit, SpectrumFit, TransitionKind,
};
use fluxkit::loss::{q_int_power, t1_budget_at_flux, thermal_warning, LossBudget, LossChannel};
use fluxkit::resonator::{
    draw_resonance, linewidth_grid, photon_number, synthesize_trace, Baseline, Regime, ResonanceParams, SweepDirection,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigDoc, Directions, FluxGrid, FORMAT_VERSION};
use crate::error::{CliError, CliResult};
use crate::files::{
    expand_traces, observation_rows, read_observations, read_power_points, read_trace, sha256_hex, sidecar_path,
    trace_csv, write_bytes, write_csv, write_json, TraceSidecar, TraceTruth, OBSERVATION_HEADER,
};
use crate::report::{FileError, InputHash, Report};
use crate::Command;

/// Subdirectory of the synthesis output that holds the traces, so it can be
/// handed to `fit-s21` as is.
const TRACE_DIR: &str = "traces";

/// Noise stream of the synthetic spectrum, disjoint from the per-trace streams.
const SPECTRUM_STREAM: u64 = 1 << 40;

pub(crate) struct Context {
    pub doc: ConfigDoc,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

impl Context {
    fn config_inputs(&self) -> CliResult<Vec<InputHash>> {
        match &self.doc.path {
            Some(p) => Ok(vec![InputHash::new(p, sha256_hex(self.doc.text.as_bytes()))]),
            None => Ok(Vec::new()),
        }
    }

    fn out(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

pub(crate) fn dispatch(ctx: &Context, command: &Command) -> CliResult<()> {
    match command {
        Command::SimulateSpectrum => simulate_spectrum(ctx),
        Command::FitS21 { traces, nonlinear } => fit_traces(ctx, traces, *nonlinear),
        Command::FitPowerSweep => power_sweep(ctx),
        Command::FitSpectrum => spectrum_fit(ctx),
        Command::PredictT1 => predict_t1(ctx),
        Command::Synthesize => synthesize(ctx),
        Command::Validate => validate(ctx),
    }
}

fn flux_points(doc: &ConfigDoc, grid: &FluxGrid, key: &str) -> CliResult<Vec<f64>> {
    let flux = grid.points();
    if flux.is_empty() {
        return Err(doc.invalid(key, "flux array is empty"));
    }
    if let Some(x) = flux.iter().find(|x| !x.is_finite()) {
        return Err(doc.invalid(key, format!("flux value {x} is not finite")));
    }
    Ok(flux)
}

fn simulate_spectrum(ctx: &Context) -> CliResult<()> {
    let doc = &ctx.doc;
    let circuit = doc.require(&doc.config.circuit, "circuit")?;
    let block = doc.require(&doc.config.spectrum, "spectrum")?;
    let flux = flux_points(doc, &block.flux, "spectrum.flux")?;
    if block.levels < 2 {
        return Err(doc.invalid("spectrum.levels", "at least 2 levels are needed"));
    }
    let spectrum = if circuit.modes.is_empty() {
        let spec = circuit.circuit().map_err(|e| doc.invalid("circuit", e))?;
        let rows: Vec<Vec<f64>> = flux
            .par_iter()
            .map(|&x| fluxonium_spectrum(&spec.at_flux(x), block.levels).map(|s| s.relative_energies()))
            .collect::<fluxkit::Result<_>>()?;
        let labels: Vec<(usize, usize)> =
            (0..block.levels).flat_map(|i| ((i + 1)..block.levels).map(move |j| (i, j))).collect();
        FluxSpectrum {
            transitions: rows.iter().map(|e| labels.iter().map(|&(i, j)| e[j] - e[i]).collect()).collect(),
            dressed_resonator_freq: Vec::new(),
            dressed_mode_freqs: vec![Vec::new(); flux.len()],
            flux_points: flux,
            labels,
        }
    } else {
        let spec = circuit.coupled().map_err(|e| doc.invalid("circuit", e))?;
        if block.levels > spec.qubit_levels {
            return Err(doc.invalid("spectrum.levels", format!("exceeds circuit.qubit_levels = {}", spec.qubit_levels)));
        }
        coupled_spectrum(&spec, block.levels, &flux)?
    };

    let mut header: Vec<String> = vec!["flux".into()];
    header.extend(spectrum.labels.iter().map(|(i, j)| format!("f_{i}_{j}_ghz")));
    header.extend((0..circuit.modes.len()).map(|m| format!("mode_{m}_ghz")));
    let rows: Vec<Vec<String>> = (0..spectrum.flux_points.len())
        .map(|k| {
            let mut r = vec![spectrum.flux_points[k].to_string()];
            r.extend(spectrum.transitions[k].iter().map(|v| v.to_string()));
            r.extend(spectrum.dressed_mode_freqs[k].iter().map(|v| v.to_string()));
            r
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&ctx.out("spectrum.csv"), &header, &rows)?;
    let report = Report::new("simulate-spectrum", &doc.config, None, ctx.config_inputs()?, spectrum);
    write_json(&ctx.out("spectrum.json"), &report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFitRecord {
    pub file: String,
    pub fit: S21Fit,
    /// Power at the resonator, W, when the sidecar gives the drive.
    pub input_power: Option<f64>,
    pub mean_n: Option<f64>,
    pub truth: Option<TraceTruth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S21Results {
    pub allow_nonlinear: bool,
    /// In input order.
    pub traces: Vec<TraceFitRecord>,
}

fn fit_one(path: &Path, allow_nonlinear: bool) -> CliResult<(TraceFitRecord, Vec<InputHash>)> {
    let loaded = read_trace(path)?;
    let fit = fit_s21(&loaded.trace, allow_nonlinear).map_err(|e| CliError::from(e).context(path.display()))?;
    let input_power = loaded.trace.input_power(fit.params.f0);
    let mean_n = match input_power {
        Some(p) => Some(photon_number(&fit.params, p, fit.params.f0)?.mean_n),
        None => None,
    };
    let hashes = loaded.hashes.into_iter().map(|(p, h)| InputHash::new(&p, h)).collect();
    let truth = loaded.sidecar.and_then(|s| s.truth);
    Ok((TraceFitRecord { file: path.display().to_string(), fit, input_power, mean_n, truth }, hashes))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn fit_traces(ctx: &Context, cli_traces: &[PathBuf], nonlinear: bool) -> CliResult<()> {
    let doc = &ctx.doc;
    let block = doc.config.fit_s21.clone().unwrap_or_default();
    let entries = if cli_traces.is_empty() { block.traces.clone() } else { cli_traces.to_vec() };
    let allow_nonlinear = nonlinear || block.allow_nonlinear;
    if entries.is_empty() {
        return Err(CliError::Validation("no trace files given (positional arguments or fit_s21.traces)".into()));
    }
    let files = expand_traces(&entries)?;
    if files.is_empty() {
        return Err(CliError::Validation("trace directories contain no .csv files".into()));
    }
    let outcomes: Vec<CliResult<(TraceFitRecord, Vec<InputHash>)>> =
        files.par_iter().map(|p| fit_one(p, allow_nonlinear)).collect();

    let mut inputs = ctx.config_inputs()?;
    let mut traces = Vec::new();
    let mut errors = Vec::new();
    let mut first_error = None;
    for (path, outcome) in files.iter().zip(outcomes) {
        match outcome {
            Ok((rec, hashes)) => {
                inputs.extend(hashes);
                traces.push(rec);
            }
            Err(e) => {
                log::error!("{e}");
                if let Ok(bytes) = std::fs::read(path) {
                    inputs.push(InputHash::new(path, sha256_hex(&bytes)));
                }
                errors.push(FileError {
                    path: path.display().to_string(),
                    message: e.to_string(),
                    exit_code: e.exit_code(),
                });
                first_error.get_or_insert(e);
            }
        }
    }

    let mut table: Vec<&TraceFitRecord> = traces.iter().collect();
    table.sort_by(|a, b| a.fit.params.f0.total_cmp(&b.fit.params.f0));
    let rows: Vec<Vec<String>> = table
        .iter()
        .map(|r| {
            let p = &r.fit.params;
            let se = |name: &str| fmt_opt(r.fit.result.standard_error(name));
            vec![
                r.file.clone(),
                p.f0.to_string(),
                se("f0"),
                p.q_int.to_string(),
                se("q_int"),
                p.q_ext.to_string(),
                se("q_ext"),
                p.a.to_string(),
                se("a"),
                fmt_opt(r.mean_n),
                match r.fit.regime {
                    Regime::NonBifurcated => "non-bifurcated",
                    Regime::Bifurcated => "bifurcated",
                }
                .to_string(),
                r.fit.result.converged.to_string(),
            ]
        })
        .collect();
    write_csv(
        &ctx.out("fit_s21.csv"),
        &[
            "file",
            "f0_ghz",
            "f0_err",
            "q_int",
            "q_int_err",
            "q_ext",
            "q_ext_err",
            "a",
            "a_err",
            "mean_n",
            "regime",
            "converged",
        ],
        &rows,
    )?;
    let failed = errors.len();
    let mut report = Report::new("fit-s21", &doc.config, None, inputs, S21Results { allow_nonlinear, traces });
    report.errors = errors;
    write_json(&ctx.out("fit_s21.json"), &report)?;
    match first_error {
        Some(e) => Err(e.context(format!("{failed} of {} traces failed; first", files.len()))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSweepResults {
    pub label: Option<String>,
    pub fit: PowerSweepFit,
    pub delta0: f64,
}

fn power_sweep(ctx: &Context) -> CliResult<()> {
    let doc = &ctx.doc;
    let block = doc.require(&doc.config.power_sweep, "power_sweep")?;
    let (points, hash) = read_power_points(&block.input)?;
    if points.is_empty() {
        return Err(CliError::Validation(format!("{}: no power-sweep points", block.input.display())));
    }
    let mut input = PowerSweepFitInput::new(points.clone());
    if let Some(f) = block.a_crit_fraction {
        input.a_crit_fraction = f;
    }
    let fit = fit_power_sweep(&input)?;
    let spec = fit.spec;
    let label = block.label.clone().unwrap_or_default();
    write_csv(
        &ctx.out("loss_table.csv"),
        &["label", "q0", "beta", "gamma", "delta0", "a_max", "n_min", "n_max", "points_used"],
        &[vec![
            label,
            spec.q0.to_string(),
            spec.beta.to_string(),
            spec.gamma.to_string(),
            spec.delta0().to_string(),
            fit.a_max.to_string(),
            fit.n_range.0.to_string(),
            fit.n_range.1.to_string(),
            fit.used.to_string(),
        ]],
    )?;
    let rows = points
        .iter()
        .enumerate()
        .map(|(k, p)| {
            Ok(vec![
                p.mean_n.to_string(),
                p.q_int.to_string(),
                p.a.to_string(),
                q_int_power(&spec, p.mean_n)?.to_string(),
                (!fit.excluded.contains(&k)).to_string(),
            ])
        })
        .collect::<fluxkit::Result<Vec<_>>>()?;
    write_csv(&ctx.out("power_fit.csv"), &["mean_n", "q_int", "a", "q_int_model", "in_window"], &rows)?;
    let mut inputs = ctx.config_inputs()?;
    inputs.push(InputHash::new(&block.input, hash));
    let warnings = fit.warnings.clone();
    let results = PowerSweepResults { label: block.label.clone(), delta0: spec.delta0(), fit };
    let mut report = Report::new("fit-power-sweep", &doc.config, None, inputs, results);
    report.warnings = warnings;
    write_json(&ctx.out("power_sweep.json"), &report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFitResults {
    pub initial: CoupledSystemSpec,
    pub fit: SpectrumFit,
}

fn spectrum_fit(ctx: &Context) -> CliResult<()> {
    let doc = &ctx.doc;
    let circuit = doc.require(&doc.config.circuit, "circuit")?;
    let block = doc.require(&doc.config.fit_spectrum, "fit_spectrum")?;
    let initial = circuit.coupled().map_err(|e| doc.invalid("circuit", e))?;
    let (obs, hash) = read_observations(&block.observations)?;
    if obs.is_empty() {
        return Err(CliError::Validation(format!("{}: no observations", block.observations.display())));
    }
    let fit = fit_spectrum(&obs, &initial)?;
    let rows: Vec<Vec<String>> = fit
        .used
        .iter()
        .zip(&fit.residuals_ghz)
        .map(|(&k, r)| {
            let o = &obs[k];
            let (kind, i, j) = match o.kind {
                TransitionKind::Resonator => ("resonator", String::new(), String::new()),
                TransitionKind::Qubit { i, j } => ("qubit", i.to_string(), j.to_string()),
            };
            vec![
                o.flux.to_string(),
                kind.into(),
                i,
                j,
                o.frequency.to_string(),
                (o.frequency + r).to_string(),
                r.to_string(),
            ]
        })
        .collect();
    write_csv(
        &ctx.out("spectrum_fit.csv"),
        &["flux", "kind", "i", "j", "observed_ghz", "model_ghz", "residual_ghz"],
        &rows,
    )?;
    let mut inputs = ctx.config_inputs()?;
    inputs.push(InputHash::new(&block.observations, hash));
    let warnings = fit.result.diagnostics.clone();
    let mut report = Report::new("fit-spectrum", &doc.config, None, inputs, SpectrumFitResults { initial, fit });
    report.warnings = warnings;
    write_json(&ctx.out("spectrum_fit.json"), &report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct T1Point {
    pub flux: f64,
    pub budget: LossBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioCurve {
    pub label: String,
    pub channels: Vec<LossChannel>,
    pub points: Vec<T1Point>,
}

fn predict_t1(ctx: &Context) -> CliResult<()> {
    let doc = &ctx.doc;
    let circuit = doc.require(&doc.config.circuit, "circuit")?;
    let block = doc.require(&doc.config.predict_t1, "predict_t1")?;
    let flux = flux_points(doc, &block.flux, "predict_t1.flux")?;
    let spec = circuit.circuit().map_err(|e| doc.invalid("circuit", e))?;
    if block.scenarios.is_empty() {
        return Err(doc.invalid("predict_t1", "no loss channels configured"));
    }
    let mut curves = Vec::new();
    let mut warnings = Vec::new();
    for sc in &block.scenarios {
        if sc.channels.is_empty() {
            return Err(doc.invalid("predict_t1.scenarios", format!("scenario {:?} has no loss channels", sc.label)));
        }
        let budgets: Vec<LossBudget> = flux
            .par_iter()
            .map(|&x| t1_budget_at_flux(&sc.channels, &spec, x))
            .collect::<fluxkit::Result<_>>()
            .map_err(|e| CliError::from(e).context(format!("scenario {:?}", sc.label)))?;
        for (x, b) in flux.iter().zip(&budgets) {
            let thermal = block.temperature.and_then(|t| thermal_warning(b.f01, t));
            for w in b.warnings.iter().cloned().chain(thermal) {
                warnings.push(format!("{} at flux {x}: {w}", sc.label));
            }
        }
        let points = flux.iter().zip(budgets).map(|(&flux, budget)| T1Point { flux, budget }).collect();
        curves.push(ScenarioCurve { label: sc.label.clone(), channels: sc.channels.clone(), points });
    }
    let mut rows = Vec::new();
    for c in &curves {
        for p in &c.points {
            let b = &p.budget;
            let line = |name: &str, rate: f64| {
                vec![
                    c.label.clone(),
                    p.flux.to_string(),
                    b.f01.to_string(),
                    name.to_string(),
                    rate.to_string(),
                    (1.0 / rate).to_string(),
                ]
            };
            rows.extend(b.channels.iter().map(|ch| line(&ch.name, ch.rate)));
            rows.push(line("total", b.total_rate));
        }
    }
    write_csv(&ctx.out("t1.csv"), &["scenario", "flux", "f01_ghz", "channel", "rate_per_us", "t1_us"], &rows)?;
    for w in &warnings {
        log::warn!("{w}");
    }
    let mut report = Report::new("predict-t1", &doc.config, None, ctx.config_inputs()?, curves);
    report.warnings = warnings;
    write_json(&ctx.out("t1.json"), &report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTraceEntry {
    pub file: String,
    pub sidecar: String,
    pub direction: SweepDirection,
    pub truth: TraceTruth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpectrumEntry {
    pub file: String,
    pub truth: CoupledSystemSpec,
    pub noise_ghz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthResults {
    pub traces: Vec<SynthTraceEntry>,
    pub spectrum: Option<SynthSpectrumEntry>,
}

/// Per-item generator: every item owns a ChaCha stream, so output does not
/// depend on scheduling.
fn item_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn synthesize(ctx: &Context) -> CliResult<()> {
    let doc = &ctx.doc;
    let block = doc.require(&doc.config.synthesize, "synthesize")?;
    let seed =
        ctx.seed.or(doc.config.seed).ok_or_else(|| doc.invalid("seed", "a seed is required (config or --seed)"))?;
    if block.traces.is_none() && block.spectrum.is_none() {
        return Err(doc.invalid("synthesize", "nothing to synthesize: add synthesize.traces or synthesize.spectrum"));
    }
    let mut entries = Vec::new();
    if let Some(tb) = &block.traces {
        let count = if tb.resonators.is_empty() { tb.count } else { tb.resonators.len() };
        if count == 0 {
            return Err(doc.invalid("synthesize.traces", "count is zero and no resonators are listed"));
        }
        if tb.ranges.points < 20 {
            return Err(doc.invalid("synthesize.traces.ranges", "at least 20 points per trace are required"));
        }
        let directions: &[SweepDirection] = match tb.directions {
            Directions::Up => &[SweepDirection::Up],
            Directions::Down => &[SweepDirection::Down],
            Directions::Both => &[SweepDirection::Up, SweepDirection::Down],
        };
        let made: Vec<Vec<(String, Vec<u8>, TraceSidecar, SweepDirection)>> = (0..count)
            .into_par_iter()
            .map(|k| {
                let mut rng = item_rng(seed, k as u64);
                let (params, baseline, grid) = if tb.resonators.is_empty() {
                    draw_resonance(&mut rng, &tb.ranges)
                } else {
                    let p: ResonanceParams = tb.resonators[k];
                    p.validate().map_err(|e| doc.invalid("synthesize.traces.resonators", format!("entry {k}: {e}")))?;
                    (p, Baseline::unit(p.f0), linewidth_grid(p.f0, p.q_tot(), tb.ranges.half_span, tb.ranges.points))
                };
                directions
                    .iter()
                    .map(|&d| {
                        let trace = synthesize_trace(&params, &baseline, grid.clone(), d, tb.snr_db, &mut rng.clone())?;
                        let name = match tb.directions {
                            Directions::Both => {
                                format!(
                                    "{TRACE_DIR}/trace_{k:04}_{}.csv",
                                    if d == SweepDirection::Up { "up" } else { "down" }
                                )
                            }
                            _ => format!("{TRACE_DIR}/trace_{k:04}.csv"),
                        };
                        let sidecar = TraceSidecar {
                            format_version: FORMAT_VERSION,
                            drive_power_dbm: tb.drive_power_dbm,
                            sweep_direction: Some(d),
                            truth: Some(TraceTruth { params, baseline, snr_db: tb.snr_db }),
                            ..Default::default()
                        };
                        Ok((name, trace_csv(&trace, tb.format)?, sidecar, d))
                    })
                    .collect::<CliResult<Vec<_>>>()
            })
            .collect::<CliResult<_>>()?;
        for (name, bytes, sidecar, direction) in made.into_iter().flatten() {
            let path = ctx.out(&name);
            write_bytes(&path, &bytes)?;
            let side = sidecar_path(&path);
            write_json(&side, &sidecar)?;
            entries.push(SynthTraceEntry {
                sidecar: name.replace(".csv", ".json"),
                file: name,
                direction,
                truth: sidecar.truth.expect("set above"),
            });
        }
    }
    let spectrum = match &block.spectrum {
        None => None,
        Some(sb) => {
            let circuit = doc.require(&doc.config.circuit, "circuit")?;
            let spec = circuit.coupled().map_err(|e| doc.invalid("circuit", e))?;
            let flux = flux_points(doc, &sb.flux, "synthesize.spectrum.flux")?;
            if sb.include_resonator && spec.modes.is_empty() {
                return Err(doc.invalid("synthesize.spectrum.include_resonator", "the circuit has no modes"));
            }
            if let Some(&(i, j)) = sb.transitions.iter().find(|&&(i, j)| i >= j || j >= spec.qubit_levels) {
                return Err(
                    doc.invalid("synthesize.spectrum.transitions", format!("({i}, {j}) needs i < j < qubit_levels"))
                );
            }
            if !(sb.noise_ghz.is_finite() && sb.noise_ghz >= 0.0) {
                return Err(doc.invalid("synthesize.spectrum.noise_ghz", "must be non-negative"));
            }
            let noise = Normal::new(0.0, sb.noise_ghz).map_err(|e| doc.invalid("synthesize.spectrum.noise_ghz", e))?;
            let lines: Vec<Vec<fluxkit::fit::SpectrumObservation>> = flux
                .par_iter()
                .enumerate()
                .map(|(k, &x)| {
                    let p = dressed_point(&spec, x)?;
                    let mut rng = item_rng(seed, SPECTRUM_STREAM + k as u64);
                    let mut jitter = || if sb.noise_ghz > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                    let sigma = (sb.noise_ghz > 0.0).then_some(sb.noise_ghz);
                    let mut out: Vec<_> = sb
                        .transitions
                        .iter()
                        .map(|&(i, j)| fluxkit::fit::SpectrumObservation {
                            flux: x,
                            frequency: p.qubit_levels[j] - p.qubit_levels[i] + jitter(),
                            kind: TransitionKind::Qubit { i, j },
                            sigma,
                        })
                        .collect();
                    if sb.include_resonator {
                        out.push(fluxkit::fit::SpectrumObservation {
                            flux: x,
                            frequency: p.mode_freqs[0] + jitter(),
                            kind: TransitionKind::Resonator,
                            sigma,
                        });
                    }
                    Ok(out)
                })
                .collect::<fluxkit::Result<_>>()?;
            let obs: Vec<_> = lines.into_iter().flatten().collect();
            let file = "spectrum_observations.csv".to_string();
            write_csv(&ctx.out(&file), &OBSERVATION_HEADER, &observation_rows(&obs))?;
            Some(SynthSpectrumEntry { file, truth: spec, noise_ghz: sb.noise_ghz })
        }
    };
    let report = Report::new(
        "synthesize",
        &doc.config,
        Some(seed),
        ctx.config_inputs()?,
        SynthResults { traces: entries, spectrum },
    );
    write_json(&ctx.out("manifest.json"), &report)
}

fn validate(ctx: &Context) -> CliResult<()> {
    let doc = &ctx.doc;
    let cfg = &doc.config;
    let mut checked = Vec::new();
    if let Some(c) = &cfg.circuit {
        if c.modes.is_empty() {
            c.circuit().map_err(|e| doc.invalid("circuit", e))?;
        } else {
            c.coupled().map_err(|e| doc.invalid("circuit", e))?;
        }
        checked.push("circuit");
    }
    if let Some(s) = &cfg.spectrum {
        flux_points(doc, &s.flux, "spectrum.flux")?;
        doc.require(&cfg.circuit, "circuit")?;
        checked.push("spectrum");
    }
    if let Some(b) = &cfg.fit_s21 {
        for path in expand_traces(&b.traces)? {
            read_trace(&path)?;
        }
        checked.push("fit_s21");
    }
    if let Some(b) = &cfg.power_sweep {
        let (points, _) = read_power_points(&b.input)?;
        if points.is_empty() {
            return Err(CliError::Validation(format!("{}: no power-sweep points", b.input.display())));
        }
        checked.push("power_sweep");
    }
    if let Some(b) = &cfg.fit_spectrum {
        read_observations(&b.observations)?;
        doc.require(&cfg.circuit, "circuit")?;
        checked.push("fit_spectrum");
    }
    if let Some(b) = &cfg.predict_t1 {
        let circuit = doc.require(&cfg.circuit, "circuit")?.circuit().map_err(|e| doc.invalid("circuit", e))?;
        let flux = flux_points(doc, &b.flux, "predict_t1.flux")?;
        if b.scenarios.is_empty() {
            return Err(doc.invalid("predict_t1", "no loss channels configured"));
        }
        for sc in &b.scenarios {
            if sc.channels.is_empty() {
                return Err(
                    doc.invalid("predict_t1.scenarios", format!("scenario {:?} has no loss channels", sc.label))
                );
            }
            t1_budget_at_flux(&sc.channels, &circuit, flux[0])
                .map_err(|e| doc.invalid("predict_t1.scenarios", format!("scenario {:?}: {e}", sc.label)))?;
        }
        checked.push("predict_t1");
    }
    if cfg.synthesize.is_some() {
        ctx.seed.or(cfg.seed).ok_or_else(|| doc.invalid("seed", "a seed is required (config or --seed)"))?;
        checked.push("synthesize");
    }
    println!("ok: {}", if checked.is_empty() { "empty configuration".to_string() } else { checked.join(", ") });
    Ok(())
}
