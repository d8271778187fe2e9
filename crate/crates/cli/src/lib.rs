// Copyright 2026 The isolator-qc Authors
// SPDX-License-Identifier: Apache-2.0

//! Configuration, experiment dispatch and report emission for `isolator-qc`.
//!
//! A run is `parse_config` → [`run_experiment`] → [`emit_report`]. Every
//! number in a [`ResultRecord`] is finite and rounded to 15 significant
//! digits, so identical configurations give byte-identical output.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use isolator_core::analysis::{
    crosstalk_sweep, extract_gate, idle_invariance_check, BlochAngles, IsolatorConfig,
};
use isolator_core::dynamics::{propagate_exact, rabi_evolve, to_interaction_picture};
use isolator_core::model::{build_cell_drift, detunings};
use isolator_core::protocols::{
    cnot_schedule, cphase_schedule, enumerate_matched, solve_matched_params, DEFAULT_K_MAX,
};
use isolator_core::{
    CellSpec, CphaseMode, FrameSpec, GateReport, GateSchedule, LatticeSpec, MatchedPulseSolution,
    PulseSpec, QuantumState, C64,
};
use serde::{Deserialize, Serialize};

/// Version of the record layout; bumped whenever fields change meaning.
pub const FORMAT_VERSION: &str = "1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

const SIGNIFICANT_DIGITS: usize = 15;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{kind}: {source}")]
    Domain {
        kind: ExperimentKind,
        #[source]
        source: isolator_core::Error,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status: 2 configuration, 3 domain, 4 capacity.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Domain { source: isolator_core::Error::Capacity { .. }, .. } => 4,
            CliError::Domain { source: isolator_core::Error::Config(_), .. } => 2,
            CliError::Domain { .. } => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SolveParams,
    SimulateCell,
    GateReport,
    SweepStrong,
    IdleCheck,
    Crosstalk,
    CnotCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::SolveParams,
        ExperimentKind::SimulateCell,
        ExperimentKind::GateReport,
        ExperimentKind::SweepStrong,
        ExperimentKind::IdleCheck,
        ExperimentKind::Crosstalk,
        ExperimentKind::CnotCheck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::SolveParams => "solve-params",
            ExperimentKind::SimulateCell => "simulate-cell",
            ExperimentKind::GateReport => "gate-report",
            ExperimentKind::SweepStrong => "sweep-strong",
            ExperimentKind::IdleCheck => "idle-check",
            ExperimentKind::Crosstalk => "crosstalk",
            ExperimentKind::CnotCheck => "cnot-check",
        }
    }

    /// Kinds that run on the full lattice rather than one cell.
    pub fn needs_lattice(self) -> bool {
        matches!(self, ExperimentKind::IdleCheck | ExperimentKind::Crosstalk)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| CliError::Config(format!("unknown experiment kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(CliError::Config(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Strong,
    Matched,
}

/// `[cell]`: every omitted field takes the default unit system (`J = 1`,
/// `ω_a1 = 50`, …).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_a1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_b1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j0: Option<f64>,
}

impl CellSection {
    pub fn resolve(&self) -> CellSpec {
        CellSpec {
            omega_1: self.omega_1.unwrap_or(10.0),
            omega_2: self.omega_2.unwrap_or(15.0),
            omega_a1: self.omega_a1.unwrap_or(50.0),
            omega_b1: self.omega_b1.unwrap_or(60.0),
            j: self.j.unwrap_or(1.0),
            j0: self.j0.unwrap_or(0.2),
        }
    }
}

fn default_true() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

/// `[experiment]`. Frequencies here (`rabi`, `sweep`, `separations`) are in
/// units of `J` and `duration` in units of `1/J` unless `j_unit = false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<[u32; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_qubit: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isolators: Option<IsolatorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubit_states: Option<Vec<BlochAngles>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separations: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    pub j_unit: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<CellSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseSpec>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn kind(&self) -> CliResult<ExperimentKind> {
        self.experiment.kind.ok_or_else(|| config_err("no experiment kind given"))
    }

    /// Fill in the kind requested on the command line; a different kind in
    /// the file is a conflict.
    pub fn with_kind(mut self, kind: ExperimentKind) -> CliResult<Self> {
        match self.experiment.kind {
            Some(k) if k != kind => {
                return Err(config_err(format!("conflicting experiment kinds: {kind} requested, config says {k}")))
            }
            _ => self.experiment.kind = Some(kind),
        }
        self.validate()?;
        Ok(self)
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    /// `J` for unit conversion of the experiment parameters.
    fn j_scale(&self) -> f64 {
        if !self.experiment.j_unit {
            return 1.0;
        }
        match &self.lattice {
            Some(l) if self.kind().map(ExperimentKind::needs_lattice).unwrap_or(false) => l.j.abs(),
            _ => self.cell().j.abs(),
        }
    }

    pub fn cell(&self) -> CellSpec {
        self.cell.unwrap_or_default().resolve()
    }

    /// Mode requested by the `[experiment]` section, with `rabi` converted to
    /// absolute units.
    pub fn mode(&self) -> CliResult<CphaseMode> {
        let e = &self.experiment;
        match e.mode {
            Some(ModeName::Matched) => {
                let k = e.k.ok_or_else(|| config_err("matched mode needs k = [k0, k1, k3]"))?;
                Ok(CphaseMode::Matched { k })
            }
            Some(ModeName::Strong) => {
                let r = e.rabi.ok_or_else(|| config_err("strong mode needs rabi"))?;
                Ok(CphaseMode::Strong { rabi: r * self.j_scale() })
            }
            None => Err(config_err("this experiment needs mode = \"strong\" or \"matched\"")),
        }
    }

    /// Schema rules that do not need any simulation.
    pub fn validate(&self) -> CliResult<()> {
        let e = &self.experiment;
        if let Some(k) = e.k {
            for (name, v) in ["k0", "k1", "k3"].iter().zip(k) {
                if v < 1 {
                    return Err(config_err(format!("{name} = {v}: k must be ≥ 1")));
                }
            }
        }
        if e.k_max == Some(0) {
            return Err(config_err("k_max = 0: k must be ≥ 1"));
        }
        let finite = |name: &str, xs: &[f64]| -> CliResult<()> {
            match xs.iter().find(|x| !x.is_finite()) {
                Some(x) => Err(config_err(format!("{name} contains non-finite value {x}"))),
                None => Ok(()),
            }
        };
        finite("rabi", e.rabi.as_slice())?;
        finite("duration", e.duration.as_slice())?;
        finite("sweep", e.sweep.as_deref().unwrap_or_default())?;
        finite("separations", e.separations.as_deref().unwrap_or_default())?;
        let Some(kind) = e.kind else { return Ok(()) };
        if kind.needs_lattice() {
            if self.cell.is_some() {
                return Err(config_err(format!("{kind} runs on [lattice]; a [cell] section conflicts")));
            }
            if self.lattice.is_none() {
                return Err(config_err(format!("{kind} needs a [lattice] section")));
            }
        } else if self.lattice.is_some() {
            return Err(config_err(format!("{kind} is a cell experiment; [lattice] conflicts with [cell]")));
        }
        match kind {
            ExperimentKind::SimulateCell if self.pulse.is_none() => {
                return Err(config_err("simulate-cell needs a [pulse] section"))
            }
            ExperimentKind::Crosstalk if e.separations.is_none() => {
                return Err(config_err("crosstalk needs separations"))
            }
            ExperimentKind::GateReport | ExperimentKind::CnotCheck | ExperimentKind::Crosstalk => {
                self.mode()?;
            }
            _ => {}
        }
        if kind != ExperimentKind::SimulateCell && self.pulse.is_some() {
            return Err(config_err(format!("{kind} designs its own pulse; [pulse] is only read by simulate-cell")));
        }
        Ok(())
    }
}

/// Parse and validate a TOML configuration.
pub fn parse_config(text: &str) -> CliResult<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// One row of a sweep or listing.
pub type SeriesPoint = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub kind: ExperimentKind,
    pub tool_version: String,
    pub format_version: String,
    /// No experiment draws random numbers; the seed is echoed so records from
    /// seeded studies remain traceable.
    pub seed: u64,
    pub input: ExperimentConfig,
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<SeriesPoint>,
    /// Complex matrix as `[re, im]` pairs, row-major.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Shortest decimal with at most 15 significant digits.
pub fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn round_value(v: &mut serde_json::Value) -> CliResult<()> {
    use serde_json::Value;
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            *n = serde_json::Number::from_f64(round_significant(x))
                .ok_or_else(|| config_err("non-finite number in record"))?;
        }
        Value::Array(xs) => xs.iter_mut().try_for_each(round_value)?,
        Value::Object(m) => m.values_mut().try_for_each(round_value)?,
        _ => {}
    }
    Ok(())
}

fn all_finite(record: &ResultRecord) -> bool {
    record.metrics.values().all(|x| x.is_finite())
        && record.series.iter().all(|p| p.values().all(|x| x.is_finite()))
        && record.matrix.iter().flatten().flatten().flatten().all(|x| x.is_finite())
}

/// Round every number and reject non-finite output.
fn finalize(record: ResultRecord) -> CliResult<ResultRecord> {
    if !all_finite(&record) {
        return Err(CliError::Domain {
            kind: record.kind,
            source: isolator_core::Error::InternalConsistency("non-finite value in result".into()),
        });
    }
    let mut value = serde_json::to_value(&record).map_err(|e| config_err(e.to_string()))?;
    round_value(&mut value)?;
    serde_json::from_value(value).map_err(|e| config_err(e.to_string()))
}

struct Builder {
    kind: ExperimentKind,
    metrics: BTreeMap<String, f64>,
    series: Vec<SeriesPoint>,
    matrix: Option<Vec<Vec<[f64; 2]>>>,
    warnings: Vec<String>,
}

impl Builder {
    fn new(kind: ExperimentKind) -> Self {
        Self { kind, metrics: BTreeMap::new(), series: Vec::new(), matrix: None, warnings: Vec::new() }
    }

    fn metric(&mut self, name: &str, value: f64) -> &mut Self {
        self.metrics.insert(name.to_owned(), value);
        self
    }

    fn point<'a>(&mut self, fields: impl IntoIterator<Item = (&'a str, f64)>) {
        self.series.push(fields.into_iter().map(|(k, v)| (k.to_owned(), v)).collect());
    }

    fn gate(&mut self, report: &GateReport) {
        self.metric("fidelity", report.fidelity)
            .metric("infidelity", report.infidelity())
            .metric("leakage", report.leakage)
            .metric("min_survival", report.min_survival)
            .metric("distance", report.distance)
            .metric("unitarity_deviation", report.unitarity_deviation);
        if let Some(theta) = report.global_phase {
            self.metric("theta_hat", theta);
        } else {
            self.warnings.push("global phase undefined: distance is unaligned".into());
        }
        if !report.is_near_unitary() {
            self.warnings.push(format!("extracted gate is not unitary (deviation {:.3e})", report.unitarity_deviation));
        }
        self.matrix = Some(
            report.gate.row_iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect(),
        );
    }

    fn finish(self, cfg: &ExperimentConfig) -> CliResult<ResultRecord> {
        finalize(ResultRecord {
            kind: self.kind,
            tool_version: TOOL_VERSION.to_owned(),
            format_version: FORMAT_VERSION.to_owned(),
            seed: cfg.experiment.seed.unwrap_or(0),
            input: cfg.clone(),
            metrics: self.metrics,
            series: self.series,
            matrix: self.matrix,
            warnings: self.warnings,
        })
    }
}

fn solution_fields(s: &MatchedPulseSolution) -> [(&'static str, f64); 10] {
    [
        ("k0", f64::from(s.k0)),
        ("k1", f64::from(s.k1)),
        ("k3", f64::from(s.k3)),
        ("denominator", s.denominator as f64),
        ("delta", s.delta),
        ("omega", s.omega),
        ("tau", s.tau),
        ("lambda0", s.lambda0),
        ("lambda12", s.lambda12),
        ("lambda3", s.lambda3),
    ]
}

/// Pulse parameters of the schedule's single pulse, relative to the cell.
fn pulse_metrics(b: &mut Builder, schedule: &GateSchedule, spec: &CellSpec) {
    if let Some(p) = schedule.steps.iter().find_map(|s| match s {
        isolator_core::GateStep::Pulse(p) => Some(p),
        _ => None,
    }) {
        b.metric("drive_freq", p.drive_freq)
            .metric("omega", p.rabi_freq)
            .metric("tau", p.duration)
            .metric("delta", p.drive_freq - spec.omega_a1 + spec.j0);
    }
}

/// Run the configured experiment. The configuration must carry its kind.
pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<ResultRecord> {
    cfg.validate()?;
    let kind = cfg.kind()?;
    let domain = |source: isolator_core::Error| CliError::Domain { kind, source };
    let e = &cfg.experiment;
    let scale = cfg.j_scale();
    let mut b = Builder::new(kind);
    match kind {
        ExperimentKind::SolveParams => {
            let j = cfg.cell().j;
            if let Some([k0, k1, k3]) = e.k {
                let s = solve_matched_params(k0, k1, k3, j).map_err(domain)?;
                for (name, v) in solution_fields(&s) {
                    b.metric(name, v);
                }
            } else {
                let k_max = e.k_max.unwrap_or(DEFAULT_K_MAX);
                for s in enumerate_matched(k_max, j) {
                    b.point(solution_fields(&s));
                }
                let n = b.series.len() as f64;
                b.metric("k_max", f64::from(k_max)).metric("solutions", n);
            }
        }
        ExperimentKind::SimulateCell => {
            let spec = cfg.cell();
            let pulse = cfg.pulse.clone().ok_or_else(|| config_err("simulate-cell needs a [pulse] section"))?;
            simulate_cell(&mut b, &spec, &pulse).map_err(domain)?;
        }
        ExperimentKind::GateReport | ExperimentKind::CnotCheck => {
            let spec = cfg.cell();
            let mode = cfg.mode()?;
            let schedule = if kind == ExperimentKind::GateReport {
                cphase_schedule(&spec, mode)
            } else {
                cnot_schedule(&spec, mode, e.target_qubit.unwrap_or(2))
            }
            .map_err(domain)?;
            let report = extract_gate(&schedule, &spec).map_err(domain)?;
            pulse_metrics(&mut b, &schedule, &spec);
            b.gate(&report);
            b.warnings.extend(schedule.warnings);
        }
        ExperimentKind::SweepStrong => {
            let spec = cfg.cell();
            let mut ratios = e.sweep.clone().unwrap_or_else(|| vec![0.02, 0.05, 0.1]);
            ratios.sort_by(f64::total_cmp);
            ratios.dedup();
            for r in ratios {
                let schedule = cphase_schedule(&spec, CphaseMode::Strong { rabi: r * scale }).map_err(domain)?;
                let report = extract_gate(&schedule, &spec).map_err(domain)?;
                b.point([
                    ("rabi", r),
                    ("infidelity", report.infidelity()),
                    ("leakage", report.leakage),
                    ("distance", report.distance),
                ]);
                b.warnings.extend(schedule.warnings);
            }
            let inf: Vec<f64> = b.series.iter().map(|p| p["infidelity"]).collect();
            b.metric("points", inf.len() as f64);
            b.metric("monotone", f64::from(u8::from(inf.windows(2).all(|w| w[0] < w[1]))));
        }
        ExperimentKind::IdleCheck => {
            let spec = cfg.lattice.clone().ok_or_else(|| config_err("idle-check needs [lattice]"))?;
            let n = spec.num_qubits();
            let qubits = e.qubit_states.clone().unwrap_or_else(|| vec![BlochAngles::PLUS; n]);
            let duration = e.duration.unwrap_or(100.0) / scale;
            let report = idle_invariance_check(
                &spec,
                &qubits,
                e.isolators.unwrap_or(IsolatorConfig::Opposite),
                duration,
                e.grid.unwrap_or(100),
            )
            .map_err(domain)?;
            for &(k, l, c) in &report.pair_concurrence {
                b.point([("qubit_k", k as f64), ("qubit_l", l as f64), ("concurrence", c)]);
            }
            b.metric("max_concurrence", report.max_concurrence)
                .metric("population_drift", report.population_drift)
                .metric("interaction_error", report.interaction_error)
                .metric("grid_points", report.grid_points as f64)
                .metric("duration", duration);
        }
        ExperimentKind::Crosstalk => {
            let lattice = cfg.lattice.clone().ok_or_else(|| config_err("crosstalk needs [lattice]"))?;
            lattice.validate().map_err(domain)?;
            let spec = cell_of(&lattice);
            let schedule = cphase_schedule(&spec, cfg.mode()?).map_err(domain)?;
            let qubits = e.qubit_states.clone().unwrap_or_else(|| vec![BlochAngles::PLUS; lattice.num_qubits()]);
            let mut seps: Vec<f64> = e.separations.clone().unwrap_or_default();
            seps.sort_by(f64::total_cmp);
            seps.dedup();
            let absolute: Vec<f64> = seps.iter().map(|s| s * scale).collect();
            let points = crosstalk_sweep(&lattice, &schedule, &qubits, &absolute).map_err(domain)?;
            for (s, p) in seps.iter().zip(&points) {
                b.point([
                    ("separation", *s),
                    ("spectator_excitation", p.spectator_excitation),
                    ("disturbance", p.disturbance),
                ]);
            }
            b.metric("points", points.len() as f64);
            b.warnings.extend(schedule.warnings);
        }
    }
    b.finish(cfg)
}

/// Cell 0 of a lattice as a standalone cell.
pub fn cell_of(lattice: &LatticeSpec) -> CellSpec {
    CellSpec {
        omega_1: lattice.qubit_freqs[0],
        omega_2: lattice.qubit_freqs[1],
        omega_a1: lattice.isolator_a_freqs[0],
        omega_b1: lattice.isolator_b_freqs[0],
        j: lattice.j,
        j0: lattice.j0,
    }
}

/// One pulse on the cell from the uniform superposition of the four idle
/// states; reports numeric and closed-form group amplitudes.
fn simulate_cell(b: &mut Builder, spec: &CellSpec, pulse: &PulseSpec) -> isolator_core::Result<()> {
    let layout = isolator_core::LatticeLayout::cell();
    let (zero, one) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    let plus = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let psi = QuantumState::product(&[[plus, plus], [plus, plus], [zero, one], [one, zero]])?;
    let drift = build_cell_drift(spec)?;
    let out = propagate_exact(&drift, &layout, pulse, &psi)?;
    let ip = to_interaction_picture(&out, &FrameSpec::for_cell(spec, 0.0)?, pulse.duration)?;
    let det = detunings(spec, pulse.drive_freq, pulse.rabi_freq);
    let mut worst = 0.0f64;
    let mut leakage = 0.0;
    for j in 0..4 {
        let c = ip.amplitude(CellSpec::idle_index(j));
        let ct = ip.amplitude(CellSpec::excited_index(j));
        let r = rabi_evolve(C64::new(0.5, 0.0), det.delta_j(j), pulse.rabi_freq, pulse.duration);
        worst = worst.max((c - r.c).norm()).max((ct - r.c_tilde).norm());
        leakage += 1.0 - c.norm_sqr() / 0.25;
        b.point([
            ("group", j as f64),
            ("delta_j", det.delta_j(j)),
            ("lambda_j", det.lambda_j(j)),
            ("c_re", c.re),
            ("c_im", c.im),
            ("c_tilde_re", ct.re),
            ("c_tilde_im", ct.im),
            ("phase", c.arg()),
            ("survival", c.norm_sqr() / 0.25),
        ]);
    }
    b.metric("analytic_deviation", worst)
        .metric("mean_leakage", (leakage / 4.0).max(0.0))
        .metric("norm", ip.norm())
        .metric("delta", det.delta);
    Ok(())
}

/// Same text as the JSON encoding of the number.
fn format_number(x: f64) -> String {
    serde_json::to_string(&x).unwrap_or_else(|_| x.to_string())
}

/// Serialise a record. JSON is the full record; CSV has one row per series
/// point (or a single row of metrics when there is no series).
pub fn emit_report(record: &ResultRecord, format: OutputFormat) -> CliResult<Vec<u8>> {
    match format {
        OutputFormat::Json => {
            let mut out = serde_json::to_vec_pretty(record).map_err(|e| config_err(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
        OutputFormat::Csv => {
            let rows: Vec<&BTreeMap<String, f64>> =
                if record.series.is_empty() { vec![&record.metrics] } else { record.series.iter().collect() };
            let header: Vec<&String> = rows.first().map(|r| r.keys().collect()).unwrap_or_default();
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
            let io = |e: csv::Error| config_err(format!("csv: {e}"));
            w.write_record(&header).map_err(io)?;
            for row in rows {
                w.write_record(header.iter().map(|k| row.get(*k).map(|v| format_number(*v)).unwrap_or_default()))
                    .map_err(io)?;
            }
            w.into_inner().map_err(|e| config_err(format!("csv: {e}")))
        }
    }
}
