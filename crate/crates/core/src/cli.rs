//! The `evolve`, `solitary` and `verify` commands.
//!
//! Each command reads one configuration file (TOML when the extension is
//! `.toml`, JSON otherwise), writes its outputs into the output directory and
//! finishes with `manifest.json`. The configuration snapshot stored in the
//! manifest is itself a valid JSON configuration for the same command.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::accel::cycled_solve;
use crate::error::{Error, Result};
use crate::evolution::{EvolutionConfig, SemiDiscrete};
use crate::harness::{
    acceleration_benchmark, acceleration_ordering, convergence_study, decay_fit, roundtrip_study,
    AccelRow, ConvergenceSetup, DecayFit, DecayModel, DecayWindow, OrderingCheck, RoundtripReport,
};
use crate::io::{fmt_f64, read_wave_csv, write_csv, write_json, write_snapshot_csv, write_trace_csv, write_wave_csv};
use crate::solitary::{
    seed_profile, FixedPointSystem, IterationTrace, SolitaryConfig, DEFAULT_HALF_LENGTH,
    DEFAULT_NODES,
};
use crate::spectral::{ModelParams, Regime, SpectralGrid};
use crate::state::StatePair;

pub const EXIT_OK: i32 = 0;
/// Output could not be written.
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;
pub const EXIT_SINGULAR: i32 = 5;
pub const EXIT_VERIFY_FAILED: i32 = 6;

/// Exit code for a command that stopped with `err`.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter { .. }
        | Error::Config { .. }
        | Error::LengthMismatch { .. }
        | Error::GridMismatch { .. } => EXIT_CONFIG,
        Error::SingularMode { .. } => EXIT_SINGULAR,
        Error::NonConvergence { .. } => EXIT_NOT_CONVERGED,
        Error::NonFinite
        | Error::DenominatorCollapse { .. }
        | Error::DegenerateSum { .. }
        | Error::WindowUnderflow { .. }
        | Error::StepFailed { .. } => EXIT_NUMERICAL,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => EXIT_IO,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Evolve,
    Solitary,
    Verify,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Evolve => "evolve",
            Command::Solitary => "solitary",
            Command::Verify => "verify",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub quiet: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    pub version: String,
    /// Resolved configuration, defaults filled in.
    pub config: serde_json::Value,
    /// Emitted files, relative to the output directory.
    pub outputs: Vec<String>,
    pub exit_status: i32,
    pub wall_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    /// Simulated time at which a time step failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_time: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub regime: Regime,
    pub gamma: f64,
    pub alpha: f64,
}

impl ModelSection {
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.regime, self.gamma, self.alpha)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Half-length `l` of the periodic domain `[-l, l)`.
    pub l: f64,
    /// Number of nodes `N`.
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            l: DEFAULT_HALF_LENGTH,
            n: DEFAULT_NODES,
        }
    }
}

impl GridSection {
    pub fn grid(&self) -> Result<SpectralGrid> {
        SpectralGrid::new(self.l, self.n).map_err(|e| match e {
            Error::InvalidParameter { name: "n", reason } => Error::param("grid.n", reason),
            Error::InvalidParameter { name: "l", reason } => Error::param("grid.l", reason),
            other => other,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialData {
    /// `zeta = amplitude exp(-((x - center)/width)^2)`, `u = u_factor zeta`.
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        u_factor: f64,
    },
    /// `zeta = amplitude sech^2((x - center)/width)`, `u = u_factor zeta`.
    Sech2 {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        u_factor: f64,
    },
    /// Nodal CSV with columns `x, zeta, u` on the configured grid.
    File { path: PathBuf },
}

impl InitialData {
    pub fn sample(&self, grid: &SpectralGrid) -> Result<StatePair> {
        match self {
            InitialData::Gaussian {
                amplitude,
                width,
                center,
                u_factor,
            }
            | InitialData::Sech2 {
                amplitude,
                width,
                center,
                u_factor,
            } => {
                if !(*width > 0.0) {
                    return Err(Error::param("initial.width", "must be positive"));
                }
                let gaussian = matches!(self, InitialData::Gaussian { .. });
                let shape = |x: f64| {
                    let s = (x - center) / width;
                    if gaussian {
                        amplitude * (-s * s).exp()
                    } else {
                        amplitude / s.cosh().powi(2)
                    }
                };
                StatePair::from_fn(grid, shape, |x| u_factor * shape(x))
            }
            InitialData::File { path } => read_wave_csv(path, grid),
        }
    }

    fn resolve_paths(&mut self, base: &Path) {
        if let InitialData::File { path } = self {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    pub evolution: EvolutionConfig,
    pub initial: InitialData,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitaryRunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub grid: GridSection,
    pub solitary: SolitaryConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Convergence,
    Roundtrip,
    Decay,
    Accel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceExperiment {
    pub half_length: f64,
    pub resolutions: Vec<usize>,
    pub t_end: f64,
    pub dt: f64,
    /// Initial data `zeta = amplitude exp(-x^2 / (2 width^2))`, `u = 0`.
    pub amplitude: f64,
    pub width: f64,
    pub min_ratio: f64,
}

impl Default for ConvergenceExperiment {
    fn default() -> Self {
        ConvergenceExperiment {
            half_length: 0.5,
            resolutions: vec![32, 64, 128],
            t_end: 0.5,
            dt: 1e-3,
            amplitude: 0.02,
            width: 0.02,
            min_ratio: 16.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoundtripExperiment {
    pub t_end: f64,
    pub dt: f64,
    pub max_deviation: f64,
    pub min_halving_ratio: f64,
    /// Deviations within this multiple of the defect floor count as converged in `dt`.
    pub floor_margin: f64,
}

impl Default for RoundtripExperiment {
    fn default() -> Self {
        RoundtripExperiment {
            t_end: 1.0,
            dt: 1e-3,
            max_deviation: 1e-6,
            min_halving_ratio: 8.0,
            floor_margin: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayExperiment {
    pub min_quality: f64,
    pub expected_rate: f64,
    pub rate_tolerance: f64,
}

impl Default for DecayExperiment {
    fn default() -> Self {
        DecayExperiment {
            min_quality: 0.99,
            expected_rate: 2.0,
            rate_tolerance: 0.3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AccelExperiment {
    pub widths: Vec<usize>,
}

impl Default for AccelExperiment {
    fn default() -> Self {
        AccelExperiment {
            widths: vec![1, 2, 3, 4],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub experiments: Vec<Experiment>,
    #[serde(default)]
    pub convergence: ConvergenceExperiment,
    #[serde(default)]
    pub roundtrip: RoundtripExperiment,
    #[serde(default)]
    pub decay: DecayExperiment,
    #[serde(default)]
    pub accel: AccelExperiment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub grid: GridSection,
    pub solitary: SolitaryConfig,
    pub verify: VerifySection,
}

/// Parses a configuration file; TOML by extension, JSON otherwise.
pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        key: "--config".into(),
        reason: format!("cannot read {}: {e}", path.display()),
    })?;
    let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    let parsed = if is_toml {
        toml::from_str(&text).map_err(|e| e.message().to_owned())
    } else {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|reason| Error::Config {
        key: offending_key(&reason),
        reason,
    })
}

fn offending_key(message: &str) -> String {
    for marker in ["missing field `", "unknown field `", "unknown variant `"] {
        if let Some(start) = message.find(marker) {
            let rest = &message[start + marker.len()..];
            if let Some(end) = rest.find('`') {
                return rest[..end].to_owned();
            }
        }
    }
    "config".to_owned()
}

/// Accumulates emitted files and assembles the manifest.
struct Run {
    command: Command,
    out: PathBuf,
    outputs: Vec<String>,
    started: Instant,
    quiet: bool,
}

impl Run {
    fn new(command: Command, opts: &RunOptions) -> Self {
        Run {
            command,
            out: opts.out.clone(),
            outputs: vec![],
            started: Instant::now(),
            quiet: opts.quiet,
        }
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_owned());
        self.out.join(name)
    }

    fn say(&self, line: &str) {
        if !self.quiet {
            println!("{line}");
        }
    }

    fn finish(
        self,
        config: serde_json::Value,
        exit_status: i32,
        message: Option<String>,
        failure_time: Option<f64>,
    ) -> i32 {
        if let Some(m) = &message {
            eprintln!("{}: {m}", self.command);
        }
        let manifest = RunManifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION").to_owned(),
            config,
            outputs: self.outputs,
            exit_status,
            wall_seconds: self.started.elapsed().as_secs_f64(),
            message,
            failure_time,
        };
        match write_json(&self.out.join("manifest.json"), &manifest) {
            Ok(()) => exit_status,
            Err(e) => {
                eprintln!("{}: cannot write manifest: {e}", manifest.command);
                EXIT_IO
            }
        }
    }
}

/// Runs `command` and returns the process exit code.
pub fn run(command: Command, opts: &RunOptions) -> i32 {
    match command {
        Command::Evolve => cmd_evolve(opts),
        Command::Solitary => cmd_solitary(opts),
        Command::Verify => cmd_verify(opts),
    }
}

fn config_failure(command: Command, opts: &RunOptions, err: Error) -> i32 {
    let run = Run::new(command, opts);
    let code = exit_code(&err);
    run.finish(serde_json::Value::Null, code, Some(err.to_string()), None)
}

fn snapshot(config: &impl Serialize) -> serde_json::Value {
    serde_json::to_value(config).unwrap_or(serde_json::Value::Null)
}

pub fn cmd_evolve(opts: &RunOptions) -> i32 {
    let mut config: EvolveConfig = match load_config(&opts.config) {
        Ok(c) => c,
        Err(e) => return config_failure(Command::Evolve, opts, e),
    };
    if let Some(base) = opts.config.parent() {
        let base = std::path::absolute(base).unwrap_or_else(|_| base.to_path_buf());
        config.initial.resolve_paths(&base);
    }
    let mut run = Run::new(Command::Evolve, opts);
    let outcome = evolve_outputs(&config, &mut run);
    let snap = snapshot(&config);
    match outcome {
        Ok(()) => run.finish(snap, EXIT_OK, None, None),
        Err(e) => {
            let time = match e {
                Error::StepFailed { time } => Some(time),
                _ => None,
            };
            let code = exit_code(&e);
            run.finish(snap, code, Some(e.to_string()), time)
        }
    }
}

#[derive(Serialize)]
struct SnapshotIndex<'a> {
    params: ModelParams,
    grid: GridSection,
    evolution: &'a EvolutionConfig,
    snapshots: Vec<SnapshotEntry>,
    max_zero_mode_drift: f64,
}

#[derive(Serialize)]
struct SnapshotEntry {
    t: f64,
    file: String,
}

fn evolve_outputs(config: &EvolveConfig, run: &mut Run) -> Result<()> {
    let params = config.model.params()?;
    let grid = config.grid.grid()?;
    let initial = config.initial.sample(&grid)?;
    let system = SemiDiscrete::new(params, grid.clone())?;
    let record = system.evolve(&initial, &config.evolution)?;

    let mut snapshots = vec![];
    for (i, (t, state)) in record.times.iter().zip(&record.states).enumerate() {
        let name = format!("snapshot_{i:05}.csv");
        write_snapshot_csv(&run.path(&name), *t, &grid, state)?;
        snapshots.push(SnapshotEntry { t: *t, file: name });
    }
    let rows = record.zero_modes.iter().map(|s| {
        vec![
            fmt_f64(s.t),
            fmt_f64(s.zeta.re),
            fmt_f64(s.zeta.im),
            fmt_f64(s.u.re),
            fmt_f64(s.u.im),
        ]
    });
    let path = run.path("zero_modes.csv");
    write_csv(&path, &["t", "zeta0_re", "zeta0_im", "u0_re", "u0_im"], rows)?;
    let index = SnapshotIndex {
        params,
        grid: config.grid,
        evolution: &config.evolution,
        snapshots,
        max_zero_mode_drift: record.max_zero_mode_drift(),
    };
    let path = run.path("snapshots.json");
    write_json(&path, &index)?;
    run.say(&format!(
        "evolved to t = {} in {} steps; {} snapshots; mean drift {:e}",
        config.evolution.t_end,
        record.zero_modes.len() - 1,
        record.states.len(),
        record.max_zero_mode_drift()
    ));
    Ok(())
}

#[derive(Serialize)]
struct SolitarySidecar<'a> {
    params: ModelParams,
    grid: GridSection,
    config: &'a SolitaryConfig,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    final_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zeta_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zeta_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    singular_wavenumber: Option<f64>,
}

pub fn cmd_solitary(opts: &RunOptions) -> i32 {
    let config: SolitaryRunConfig = match load_config(&opts.config) {
        Ok(c) => c,
        Err(e) => return config_failure(Command::Solitary, opts, e),
    };
    let mut run = Run::new(Command::Solitary, opts);
    let outcome = solitary_outputs(&config, &mut run);
    let snap = snapshot(&config);
    match outcome {
        Ok(()) => run.finish(snap, EXIT_OK, None, None),
        Err(e) => {
            let code = exit_code(&e);
            run.finish(snap, code, Some(e.to_string()), None)
        }
    }
}

fn solitary_outputs(config: &SolitaryRunConfig, run: &mut Run) -> Result<()> {
    let params = config.model.params()?;
    let grid = config.grid.grid()?;
    let sc = &config.solitary;
    let mut sidecar = SolitarySidecar {
        params,
        grid: config.grid,
        config: sc,
        status: "converged",
        iterations: None,
        final_residual: None,
        zeta_min: None,
        zeta_max: None,
        singular_wavenumber: None,
    };
    let outcome = seed_profile(&params, &grid, sc).and_then(|seed| cycled_solve(&params, &grid, sc, &seed));
    match outcome {
        Ok((wave, trace)) => {
            write_wave_csv(&run.path("wave.csv"), &grid, &wave)?;
            write_trace_csv(&run.path("trace.csv"), &trace)?;
            let (zeta, _) = wave.to_nodal(&grid)?;
            sidecar.iterations = Some(trace.iterations_used);
            sidecar.final_residual = trace.last_residual();
            sidecar.zeta_min = zeta.iter().copied().reduce(f64::min);
            sidecar.zeta_max = zeta.iter().copied().reduce(f64::max);
            write_json(&run.path("solitary.json"), &sidecar)?;
            run.say(&format!(
                "converged in {} iterations, residual {:e}, zeta in [{}, {}]",
                trace.iterations_used,
                trace.last_residual().unwrap_or(f64::NAN),
                sidecar.zeta_min.unwrap_or(f64::NAN),
                sidecar.zeta_max.unwrap_or(f64::NAN)
            ));
            Ok(())
        }
        Err(Error::NonConvergence { trace, last }) => {
            write_trace_csv(&run.path("trace.csv"), &trace)?;
            sidecar.status = "not_converged";
            sidecar.iterations = Some(trace.iterations_used);
            sidecar.final_residual = trace.last_residual();
            write_json(&run.path("solitary.json"), &sidecar)?;
            Err(Error::NonConvergence { trace, last })
        }
        Err(Error::SingularMode { wavenumber, det }) => {
            sidecar.status = "singular";
            sidecar.singular_wavenumber = Some(wavenumber);
            write_json(&run.path("solitary.json"), &sidecar)?;
            Err(Error::SingularMode { wavenumber, det })
        }
        Err(e) => Err(e),
    }
}

/// Outcome of one acceptance check in `verify`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Serialize)]
struct Provenance<'a> {
    version: &'static str,
    params: ModelParams,
    grid: GridSection,
    solitary: &'a SolitaryConfig,
    verify: &'a VerifySection,
}

#[derive(Serialize)]
struct DecayReport<'a> {
    provenance: &'a Provenance<'a>,
    exponential: Option<DecayFit>,
    algebraic: Option<DecayFit>,
    preferred: Option<DecayModel>,
}

#[derive(Serialize)]
struct RoundtripFile<'a> {
    provenance: &'a Provenance<'a>,
    report: &'a RoundtripReport,
}

#[derive(Serialize)]
struct AccelFile<'a> {
    provenance: &'a Provenance<'a>,
    rows: &'a [AccelRow],
    ordering: OrderingCheck,
}

pub fn cmd_verify(opts: &RunOptions) -> i32 {
    let config: VerifyConfig = match load_config(&opts.config) {
        Ok(c) => c,
        Err(e) => return config_failure(Command::Verify, opts, e),
    };
    let mut run = Run::new(Command::Verify, opts);
    let outcome = verify_outputs(&config, &mut run);
    let snap = snapshot(&config);
    match outcome {
        Ok(checks) => {
            let all = checks.iter().all(|c| c.passed);
            for c in &checks {
                run.say(&format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
            }
            let path = run.path("verify_summary.json");
            if let Err(e) = write_json(&path, &checks) {
                let code = exit_code(&e);
                return run.finish(snap, code, Some(e.to_string()), None);
            }
            let code = if all { EXIT_OK } else { EXIT_VERIFY_FAILED };
            let message = (!all).then(|| "one or more checks failed".to_owned());
            run.finish(snap, code, message, None)
        }
        Err(e) => {
            let code = exit_code(&e);
            run.finish(snap, code, Some(e.to_string()), None)
        }
    }
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.to_owned(),
        passed,
        detail,
    }
}

fn verify_outputs(config: &VerifyConfig, run: &mut Run) -> Result<Vec<CheckResult>> {
    let params = config.model.params()?;
    let grid = config.grid.grid()?;
    let sc = config.solitary;
    sc.validate()?;
    let v = &config.verify;
    let provenance = Provenance {
        version: env!("CARGO_PKG_VERSION"),
        params,
        grid: config.grid,
        solitary: &sc,
        verify: v,
    };
    let mut checks = vec![];
    let wants = |e: Experiment| v.experiments.contains(&e);

    if wants(Experiment::Convergence) {
        let ce = &v.convergence;
        let setup = ConvergenceSetup {
            half_length: ce.half_length,
            resolutions: ce.resolutions.clone(),
            t_end: ce.t_end,
            dt: ce.dt,
        };
        let (a, w) = (ce.amplitude, ce.width);
        let report = convergence_study(&params, &setup, |x| (a * (-x * x / (2.0 * w * w)).exp(), 0.0))?;
        let rates = std::iter::once(None).chain(report.observed_rates.iter().map(Some));
        let rows = report.resolutions.iter().zip(&report.errors).zip(rates).map(|((n, e), r)| {
            vec![n.to_string(), fmt_f64(*e), r.map(|r| fmt_f64(*r)).unwrap_or_default()]
        });
        write_csv(&run.path("convergence_report.csv"), &["N", "error", "rate"], rows)?;
        write_json(
            &run.path("convergence_report.json"),
            &serde_json::json!({ "provenance": &provenance, "report": &report }),
        )?;
        let drift_ok = report.max_zero_mode_drift <= 1e-12 * ce.t_end.max(1.0);
        checks.push(check(
            "convergence",
            report.is_spectral(ce.min_ratio) && drift_ok,
            format!(
                "error ratios {:?} (need >= {}), temporal error {:e}, mean drift {:e}",
                report.error_ratios(),
                ce.min_ratio,
                report.temporal_error,
                report.max_zero_mode_drift
            ),
        ));
    }

    let needs_wave = wants(Experiment::Roundtrip) || wants(Experiment::Decay);
    let wave = if needs_wave {
        let seed = seed_profile(&params, &grid, &sc)?;
        match cycled_solve(&params, &grid, &sc, &seed) {
            Ok((wave, trace)) => {
                write_wave_csv(&run.path("wave.csv"), &grid, &wave)?;
                write_trace_csv(&run.path("trace.csv"), &trace)?;
                let system = FixedPointSystem::new(params, grid.clone(), sc.c)?;
                let defect = system.algebraic_defect(&wave)?;
                checks.push(check(
                    "algebraic_residual",
                    defect <= 10.0 * sc.tol,
                    format!("max nodal defect {defect:e} (need <= {:e})", 10.0 * sc.tol),
                ));
                Some(wave)
            }
            Err(e @ (Error::NonConvergence { .. } | Error::DenominatorCollapse { .. })) => {
                checks.push(check("solitary", false, e.to_string()));
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    if wants(Experiment::Roundtrip) {
        let re = &v.roundtrip;
        match &wave {
            Some(wave) => {
                let system = SemiDiscrete::new(params, grid.clone())?;
                let report = roundtrip_study(&system, wave, sc.c, re.t_end, re.dt)?;
                write_json(
                    &run.path("roundtrip.json"),
                    &RoundtripFile {
                        provenance: &provenance,
                        report: &report,
                    },
                )?;
                let passed = report.deviation <= re.max_deviation
                    && report.halving_consistent(re.min_halving_ratio, re.floor_margin);
                checks.push(check(
                    "roundtrip",
                    passed,
                    format!(
                        "deviation {:e} (dt/2: {:e}, defect floor {:e})",
                        report.deviation, report.deviation_half_dt, report.defect_floor
                    ),
                ));
            }
            None => checks.push(check("roundtrip", false, "no converged wave".into())),
        }
    }

    if wants(Experiment::Decay) {
        let de = &v.decay;
        match &wave {
            Some(wave) => {
                let (zeta, _) = wave.to_nodal(&grid)?;
                let window = DecayWindow::for_grid(&grid, sc.seed_width);
                let exp = decay_fit(&grid, &zeta, &window, DecayModel::Exponential).ok();
                let alg = decay_fit(&grid, &zeta, &window, DecayModel::Algebraic).ok();
                let preferred = match (&exp, &alg) {
                    (Some(e), Some(a)) if e.fit_quality >= a.fit_quality => Some(DecayModel::Exponential),
                    (Some(_), None) => Some(DecayModel::Exponential),
                    (_, Some(_)) => Some(DecayModel::Algebraic),
                    _ => None,
                };
                write_json(
                    &run.path("decay_fit.json"),
                    &DecayReport {
                        provenance: &provenance,
                        exponential: exp,
                        algebraic: alg,
                        preferred,
                    },
                )?;
                let (passed, detail) = match params.regime {
                    Regime::Ilw => {
                        let q_exp = exp.map_or(f64::NAN, |f| f.fit_quality);
                        let q_alg = alg.map_or(f64::NAN, |f| f.fit_quality);
                        (
                            q_exp >= de.min_quality && q_exp > q_alg,
                            format!("exponential quality {q_exp:.4}, algebraic quality {q_alg:.4}"),
                        )
                    }
                    Regime::Bo => {
                        let rate = alg.map_or(f64::NAN, |f| f.fitted_rate);
                        (
                            (rate - de.expected_rate).abs() <= de.rate_tolerance,
                            format!("algebraic rate {rate:.4} (need {} +- {})", de.expected_rate, de.rate_tolerance),
                        )
                    }
                };
                checks.push(check("decay", passed, detail));
            }
            None => checks.push(check("decay", false, "no converged wave".into())),
        }
    }

    if wants(Experiment::Accel) {
        let seed = seed_profile(&params, &grid, &sc)?;
        let mut widths = v.accel.widths.clone();
        widths.sort_unstable();
        widths.dedup();
        let runs = acceleration_benchmark(&params, &grid, &sc, &seed, &widths);
        for r in &runs {
            write_trace_csv(&run.path(&format!("trace_mw{}.csv", r.row.mw)), &r.trace)?;
        }
        let rows: Vec<AccelRow> = runs.into_iter().map(|r| r.row).collect();
        let table = rows.iter().map(|r| {
            vec![
                r.mw.to_string(),
                r.iterations.map(|i| i.to_string()).unwrap_or_default(),
                fmt_f64(r.seconds),
            ]
        });
        write_csv(&run.path("acceleration_table.csv"), &["mw", "iterations", "seconds"], table)?;
        let ordering = acceleration_ordering(&rows);
        write_json(
            &run.path("acceleration_table.json"),
            &AccelFile {
                provenance: &provenance,
                rows: &rows,
                ordering,
            },
        )?;
        let counts: Vec<Option<usize>> = rows.iter().map(|r| r.iterations).collect();
        checks.push(check("accel", ordering.holds(), format!("iterations {counts:?}, {ordering:?}")));
    }
    Ok(checks)
}

/// Solves the solitary wave described by a run configuration.
pub fn solve_from_config(config: &SolitaryRunConfig) -> Result<(SpectralGrid, StatePair, IterationTrace)> {
    let params = config.model.params()?;
    let grid = config.grid.grid()?;
    let seed = seed_profile(&params, &grid, &config.solitary)?;
    let (wave, trace) = cycled_solve(&params, &grid, &config.solitary, &seed)?;
    Ok((grid, wave, trace))
}
