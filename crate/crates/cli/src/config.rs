//! Experiment configuration documents.
//!
//! A config is a TOML document. Every dimensional quantity carries its unit
//! in the key name (`gamma2_khz`, `omega_hz_over_2pi`, `period_us`, ...), so
//! a bare `omega = 5` is rejected rather than guessed. Rates in kHz mean
//! 10³ s⁻¹; frequencies given as `_hz_over_2pi` are multiplied by 2π.

use std::f64::consts::TAU;
use std::fmt;

use qvdp_core::lindblad::DEFAULT_DT;
use qvdp_core::tomography::{DEFAULT_N_PHI, DEFAULT_N_R, DEFAULT_R_MAX};
use qvdp_core::trotter::{CycleTimes, DEFAULT_ETA, DEFAULT_OMEGA_Z, MAX_DT};
use qvdp_core::{
    coherent_state, displaced_thermal_state, fock_state, vacuum, DensityMatrix, FockTruncation, VdpParams, C64,
};
use toml::{Table, Value};

use crate::presets;

/// Above this truncation the steady-state solver's memory use is reported.
const LARGE_N_MAX: usize = 60;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("config does not parse: {0}")]
    Parse(String),
    #[error("missing required fields: {}", .0.join(", "))]
    Missing(Vec<String>),
    #[error("unknown key `{key}` in {section}")]
    UnknownKey { key: String, section: String },
    #[error("`{key}` in {section} needs a unit suffix; use {}", .expected.join(" or "))]
    MissingUnit { key: String, section: String, expected: Vec<String> },
    #[error("`{key}` conflicts with preset `{preset}`; presets fix it (see `qvdp preset show {preset}`)")]
    PresetConflict { key: String, preset: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

fn invalid(key: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.into(), reason: reason.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unit {
    /// Dissipation rate, stored in s⁻¹.
    Rate,
    /// Angular frequency, stored in rad/s.
    Frequency,
    Angle,
    /// Duration, stored in s.
    Time,
    Dimensionless,
}

/// Conversion from config units to SI.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scale {
    /// Decimal shift by 10^k, correctly rounded (0.23 kHz is exactly 230 s⁻¹).
    Pow10(i32),
    Factor(f64),
}

impl Scale {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Scale::Pow10(0) => v,
            Scale::Pow10(k) if v.is_finite() => format!("{v}e{k}").parse().unwrap_or(v * 10f64.powi(k)),
            Scale::Pow10(k) => v * 10f64.powi(k),
            Scale::Factor(f) => v * f,
        }
    }
}

impl Unit {
    fn suffixes(self) -> &'static [(&'static str, Scale)] {
        match self {
            Unit::Rate => &[("khz", Scale::Pow10(3)), ("per_s", Scale::Pow10(0))],
            Unit::Frequency => &[("hz_over_2pi", Scale::Factor(TAU))],
            Unit::Angle => &[("rad", Scale::Pow10(0))],
            Unit::Time => &[("us", Scale::Pow10(-6))],
            Unit::Dimensionless => &[],
        }
    }
}

/// Quantities that can be set in `[params]` / `[initial_state]` and swept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Param {
    Gamma1Plus,
    Gamma1Minus,
    Gamma2,
    GammaH,
    Omega,
    Delta,
    Omega2,
    Theta,
    DrivePhase,
    AlphaRe,
    AlphaIm,
    Nbar,
}

const MODEL_PARAMS: [(&str, Unit, Param); 9] = [
    ("gamma1_plus", Unit::Rate, Param::Gamma1Plus),
    ("gamma1_minus", Unit::Rate, Param::Gamma1Minus),
    ("gamma2", Unit::Rate, Param::Gamma2),
    ("gamma_h", Unit::Rate, Param::GammaH),
    ("omega", Unit::Frequency, Param::Omega),
    ("delta", Unit::Frequency, Param::Delta),
    ("omega2", Unit::Frequency, Param::Omega2),
    ("theta", Unit::Angle, Param::Theta),
    ("drive_phase", Unit::Angle, Param::DrivePhase),
];

const STATE_PARAMS: [(&str, Unit, Param); 3] = [
    ("alpha_re", Unit::Dimensionless, Param::AlphaRe),
    ("alpha_im", Unit::Dimensionless, Param::AlphaIm),
    ("nbar", Unit::Dimensionless, Param::Nbar),
];

impl Param {
    /// Resolves a full key such as `gamma1_minus_khz` to the parameter and
    /// its conversion from config units to SI.
    pub fn from_key(key: &str) -> Option<(Param, Scale)> {
        for (base, unit, p) in MODEL_PARAMS.iter().chain(&STATE_PARAMS) {
            if let Some(scale) = unit_scale(key, base, *unit) {
                return Some((*p, scale));
            }
        }
        None
    }

    pub fn apply(self, value: f64, params: &mut VdpParams, state: &mut InitialState) {
        match self {
            Param::Gamma1Plus => params.gamma1_plus = value,
            Param::Gamma1Minus => params.gamma1_minus = value,
            Param::Gamma2 => params.gamma2 = value,
            Param::GammaH => params.gamma_h = value,
            Param::Omega => params.omega = value,
            Param::Delta => params.delta = value,
            Param::Omega2 => params.omega2 = value,
            Param::Theta => params.theta = value,
            Param::DrivePhase => params.drive_phase = value,
            Param::AlphaRe => state.set_alpha(C64::new(value, state.alpha().im)),
            Param::AlphaIm => state.set_alpha(C64::new(state.alpha().re, value)),
            Param::Nbar => {
                if let InitialState::DisplacedThermal { nbar, .. } = state {
                    *nbar = value;
                }
            }
        }
    }

    fn is_state(self) -> bool {
        matches!(self, Param::AlphaRe | Param::AlphaIm | Param::Nbar)
    }
}

fn unit_scale(key: &str, base: &str, unit: Unit) -> Option<Scale> {
    if unit == Unit::Dimensionless {
        return (key == base).then_some(Scale::Pow10(0));
    }
    let rest = key.strip_prefix(base)?.strip_prefix('_')?;
    unit.suffixes().iter().find(|(s, _)| *s == rest).map(|(_, f)| *f)
}

/// `Some(error)` when `key` names a known quantity without a valid suffix.
fn unit_error(key: &str, section: &str, known: &[(&str, Unit)]) -> Option<ConfigError> {
    known.iter().find_map(|(base, unit)| {
        let bare = key == *base || key.strip_prefix(base).is_some_and(|r| r.starts_with('_'));
        (bare && *unit != Unit::Dimensionless).then(|| ConfigError::MissingUnit {
            key: key.to_string(),
            section: section.to_string(),
            expected: unit.suffixes().iter().map(|(s, _)| format!("`{base}_{s}`")).collect(),
        })
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    LimitCycle,
    Entrainment,
    PhaseLocking,
    PhaseDistribution,
    ArnoldTongue,
    DissipationBoost,
    SqueezingScan,
    Custom,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::LimitCycle,
        Scenario::Entrainment,
        Scenario::PhaseLocking,
        Scenario::PhaseDistribution,
        Scenario::ArnoldTongue,
        Scenario::DissipationBoost,
        Scenario::SqueezingScan,
        Scenario::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::LimitCycle => "limit_cycle",
            Scenario::Entrainment => "entrainment",
            Scenario::PhaseLocking => "phase_locking",
            Scenario::PhaseDistribution => "phase_distribution",
            Scenario::ArnoldTongue => "arnold_tongue",
            Scenario::DissipationBoost => "dissipation_boost",
            Scenario::SqueezingScan => "squeezing_scan",
            Scenario::Custom => "custom",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Mode used when the config does not set one; `None` for `custom`.
    pub fn default_mode(self) -> Option<Mode> {
        match self {
            Scenario::LimitCycle | Scenario::Entrainment | Scenario::PhaseLocking => Some(Mode::Evolve),
            Scenario::PhaseDistribution
            | Scenario::ArnoldTongue
            | Scenario::DissipationBoost
            | Scenario::SqueezingScan => Some(Mode::Steady),
            Scenario::Custom => None,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Engine {
    #[default]
    Exact,
    TrotterRwa,
    TrotterFull,
}

impl Engine {
    pub const ALL: [Engine; 3] = [Engine::Exact, Engine::TrotterRwa, Engine::TrotterFull];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::TrotterRwa => "trotter_rwa",
            Engine::TrotterFull => "trotter_full",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    pub fn is_trotter(self) -> bool {
        self != Engine::Exact
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Time-resolved integration or the stationary state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Evolve,
    Steady,
}

impl Mode {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "evolve" => Some(Mode::Evolve),
            "steady" => Some(Mode::Steady),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialState {
    Vacuum,
    Fock(usize),
    Coherent(C64),
    DisplacedThermal { nbar: f64, alpha: C64 },
}

impl InitialState {
    pub fn alpha(&self) -> C64 {
        match *self {
            InitialState::Coherent(a) | InitialState::DisplacedThermal { alpha: a, .. } => a,
            _ => C64::new(0.0, 0.0),
        }
    }

    fn set_alpha(&mut self, a: C64) {
        match self {
            InitialState::Coherent(alpha) | InitialState::DisplacedThermal { alpha, .. } => *alpha = a,
            _ => {}
        }
    }

    pub fn build(&self, trunc: &FockTruncation) -> qvdp_core::Result<DensityMatrix> {
        match *self {
            InitialState::Vacuum => Ok(vacuum(trunc)),
            InitialState::Fock(n) => fock_state(trunc, n),
            InitialState::Coherent(a) => coherent_state(trunc, a),
            InitialState::DisplacedThermal { nbar, alpha } => displaced_thermal_state(trunc, nbar, alpha),
        }
    }
}

/// Cycle layout and trap constants for the Trotter engines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleSpec {
    pub times: CycleTimes,
    /// Cycles run in steady mode.
    pub n_cycles: usize,
    pub eta: f64,
    pub omega_z: f64,
    pub trap_offset: f64,
    pub stark_compensation: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepAxis {
    /// Key as written in the config, e.g. `omega_hz_over_2pi`; also the CSV
    /// column name.
    pub name: String,
    pub param: Param,
    /// Conversion from config units to SI.
    pub scale: Scale,
    /// Values in config units.
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WignerSettings {
    pub r_max: f64,
    pub n_r: usize,
    pub n_phi: usize,
    /// Write one grid file per row.
    pub dump: bool,
}

impl Default for WignerSettings {
    fn default() -> Self {
        Self { r_max: DEFAULT_R_MAX, n_r: DEFAULT_N_R, n_phi: DEFAULT_N_PHI, dump: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSettings {
    pub dir: String,
    pub csv: String,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self { dir: "out".into(), csv: "results.csv".into() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Option<String>,
    pub scenario: Scenario,
    pub engine: Engine,
    pub mode: Mode,
    /// Base parameters in SI units; sweep axes override them per point.
    pub params: VdpParams,
    pub schedule: Option<ScheduleSpec>,
    pub initial_state: InitialState,
    pub sweep: Vec<SweepAxis>,
    /// Sample times in seconds (evolve mode).
    pub sample_times: Vec<f64>,
    /// Integration step; engine default when absent.
    pub dt: Option<f64>,
    pub wigner: WignerSettings,
    pub output: OutputSettings,
}

/// One point of the sweep grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    /// Coordinates in config units, one per axis.
    pub coords: Vec<f64>,
}

impl ExperimentConfig {
    /// Cartesian product of the sweep axes sorted by coordinates; a config
    /// without sweep has a single point.
    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        let mut coords: Vec<Vec<f64>> = vec![Vec::new()];
        for axis in &self.sweep {
            coords = coords
                .iter()
                .flat_map(|c| {
                    axis.values.iter().map(move |v| {
                        let mut c = c.clone();
                        c.push(*v);
                        c
                    })
                })
                .collect();
        }
        coords.sort_by(|a, b| {
            a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        });
        coords.into_iter().enumerate().map(|(index, coords)| SweepPoint { index, coords }).collect()
    }

    /// Parameters and initial state at a sweep point.
    pub fn resolve(&self, point: &SweepPoint) -> (VdpParams, InitialState) {
        let mut params = self.params;
        let mut state = self.initial_state;
        for (axis, v) in self.sweep.iter().zip(&point.coords) {
            axis.param.apply(axis.scale.apply(*v), &mut params, &mut state);
        }
        (params, state)
    }

    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(if self.engine.is_trotter() { MAX_DT } else { DEFAULT_DT })
    }

    pub fn with_engine(mut self, engine: Engine) -> Result<Self, ConfigError> {
        self.engine = engine;
        self.validate()?;
        Ok(self)
    }

    /// Non-fatal notes about the config, e.g. large memory use.
    pub fn warnings(&self) -> Vec<String> {
        let n = self.params.trunc.n_max;
        let mut out = Vec::new();
        if n > LARGE_N_MAX && self.mode == Mode::Steady && self.engine == Engine::Exact {
            let band = 2 * n + 2;
            let bytes = (n * n) as f64 * (3 * band + 1) as f64 * 16.0;
            out.push(format!("n_max = {n}: the steady-state solver needs about {:.0} MB per worker", bytes / 1e6));
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params.validate().map_err(|e| invalid("params", e.to_string()))?;
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(invalid("dt_us", format!("must be > 0, got {dt}")));
            }
            if self.engine.is_trotter() && dt > MAX_DT {
                return Err(invalid("dt_us", format!("trotter engines need dt <= {} us", MAX_DT * 1e6)));
            }
        }
        if self.engine.is_trotter() && self.schedule.is_none() {
            return Err(invalid("engine", format!("{} needs a [schedule] table", self.engine)));
        }
        if self.mode == Mode::Evolve {
            if self.sample_times.is_empty() {
                return Err(ConfigError::Missing(vec!["sample_times_us or sample_cycles".into()]));
            }
            if self.sample_times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
                return Err(invalid("sample_times", "times must be finite and >= 0"));
            }
            if self.sample_times.windows(2).any(|w| w[1] <= w[0]) {
                return Err(invalid("sample_times", "must be strictly increasing"));
            }
            if let (true, Some(s)) = (self.engine.is_trotter(), &self.schedule) {
                let t = s.times.period;
                if let Some(bad) = self.sample_times.iter().find(|x| ((*x / t).round() * t - *x).abs() > 1e-9 * t) {
                    return Err(invalid(
                        "sample_times",
                        format!("{bad} s is not a whole number of {t} s cycles, which trotter engines require"),
                    ));
                }
            }
        }
        for axis in &self.sweep {
            let compatible = match (axis.param, self.initial_state) {
                (
                    Param::AlphaRe | Param::AlphaIm,
                    InitialState::Coherent(_) | InitialState::DisplacedThermal { .. },
                ) => true,
                (Param::Nbar, InitialState::DisplacedThermal { .. }) => true,
                (p, _) => !p.is_state(),
            };
            if !compatible {
                return Err(invalid(format!("sweep.{}", axis.name), "the initial state kind has no such parameter"));
            }
        }
        let w = &self.wigner;
        if !(w.r_max > 0.0 && w.r_max.is_finite()) || w.n_r < 2 || w.n_phi < 1 {
            return Err(invalid("wigner", "need r_max > 0, n_r >= 2 and n_phi >= 1"));
        }
        for point in self.sweep_points() {
            let (params, state) = self.resolve(&point);
            params.validate().map_err(|e| invalid("sweep", e.to_string()))?;
            if let InitialState::DisplacedThermal { nbar, .. } = state {
                if !(nbar >= 0.0 && nbar.is_finite()) {
                    return Err(invalid("nbar", format!("must be >= 0, got {nbar}")));
                }
            }
        }
        Ok(())
    }
}

/// Parses and validates a config document, expanding a named preset.
pub fn load_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let doc: Table = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    match doc.get("preset") {
        Some(Value::String(name)) => {
            let name = name.clone();
            let preset = presets::find(&name).ok_or_else(|| ConfigError::UnknownPreset(name.clone()))?;
            let base: Table = toml::from_str(preset.document)
                .unwrap_or_else(|e| panic!("built-in preset {name} does not parse: {e}"));
            let merged = merge_preset(base, doc, &name)?;
            let mut config = parse_document(merged)?;
            config.preset = Some(name);
            Ok(config)
        }
        Some(_) => Err(invalid("preset", "must be a string")),
        None => parse_document(doc),
    }
}

/// Keys a config may set on top of a preset; tables are merged key by key.
const PRESET_OVERRIDABLE: [&str; 6] = ["engine", "n_max", "tail_tolerance", "dt_us", "wigner", "output"];

fn merge_preset(mut base: Table, doc: Table, preset: &str) -> Result<Table, ConfigError> {
    for (key, value) in doc {
        if key == "preset" {
            continue;
        }
        if key == "scenario" && base.get("scenario") == Some(&value) {
            continue;
        }
        if !PRESET_OVERRIDABLE.contains(&key.as_str()) {
            return Err(ConfigError::PresetConflict { key, preset: preset.to_string() });
        }
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(t)) => b.extend(t),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
    Ok(base)
}

/// Takes keys out of a table and reports whatever is left over.
struct Section {
    name: String,
    table: Table,
}

impl Section {
    fn new(name: &str, table: Table) -> Self {
        Self { name: name.to_string(), table }
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.table.remove(key)
    }

    fn key_name(&self, key: &str) -> String {
        if self.name == "top level" {
            key.to_string()
        } else {
            format!("{}.{key}", self.name)
        }
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.take(key)
            .map(|v| as_number(&v).ok_or_else(|| invalid(self.key_name(key), "expected a number")))
            .transpose()
    }

    fn count(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if i >= 0 => Ok(Some(i as usize)),
            Some(_) => Err(invalid(self.key_name(key), "expected a non-negative integer")),
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<String>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(invalid(self.key_name(key), "expected a string")),
        }
    }

    fn boolean(&mut self, key: &str) -> Result<Option<bool>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(b)),
            Some(_) => Err(invalid(self.key_name(key), "expected true or false")),
        }
    }

    fn table(&mut self, key: &str) -> Result<Option<Table>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(t)),
            Some(_) => Err(invalid(self.key_name(key), "expected a table")),
        }
    }

    /// Removes the unit-suffixed keys of `known`, returning SI values.
    fn quantities(&mut self, known: &[(&str, Unit)]) -> Result<Vec<(String, f64)>, ConfigError> {
        let mut out = Vec::new();
        for (base, unit) in known {
            let keys: Vec<String> =
                self.table.keys().filter(|k| unit_scale(k, base, *unit).is_some()).cloned().collect();
            if keys.len() > 1 {
                return Err(invalid(self.key_name(base), format!("given twice ({})", keys.join(", "))));
            }
            if let Some(key) = keys.into_iter().next() {
                let scale = unit_scale(&key, base, *unit).unwrap_or(Scale::Pow10(0));
                let v = self.number(&key)?.unwrap_or_default();
                out.push((base.to_string(), scale.apply(v)));
            }
        }
        Ok(out)
    }

    fn finish(self, known: &[(&str, Unit)]) -> Result<(), ConfigError> {
        match self.table.keys().next() {
            None => Ok(()),
            Some(key) => Err(unit_error(key, &self.name, known)
                .unwrap_or_else(|| ConfigError::UnknownKey { key: key.clone(), section: self.name.clone() })),
        }
    }
}

fn as_number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn number_list(v: Value, key: &str) -> Result<Vec<f64>, ConfigError> {
    match v {
        Value::Array(a) => a.iter().map(|x| as_number(x).ok_or_else(|| invalid(key, "expected numbers"))).collect(),
        _ => Err(invalid(key, "expected an array of numbers")),
    }
}

const TOP_UNITS: [(&str, Unit); 2] = [("dt", Unit::Time), ("sample_times", Unit::Time)];

const SCHEDULE_UNITS: [(&str, Unit); 9] = [
    ("tau_bsb", Unit::Time),
    ("tau_rsb", Unit::Time),
    ("tau_2rsb", Unit::Time),
    ("tau_sq", Unit::Time),
    ("tau_reset", Unit::Time),
    ("tau_idle", Unit::Time),
    ("period", Unit::Time),
    ("trap_frequency", Unit::Frequency),
    ("trap_offset", Unit::Frequency),
];

fn parse_document(doc: Table) -> Result<ExperimentConfig, ConfigError> {
    let mut missing = Vec::new();
    if !doc.contains_key("scenario") {
        missing.push("scenario".to_string());
    }
    if !doc.contains_key("params") {
        missing.push("params".to_string());
    }
    if !missing.is_empty() {
        missing.push("(or preset)".to_string());
        return Err(ConfigError::Missing(missing));
    }
    let mut top = Section::new("top level", doc);

    let scenario_name = top.string("scenario")?.unwrap_or_default();
    let scenario = Scenario::from_name(&scenario_name).ok_or_else(|| {
        let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
        invalid("scenario", format!("`{scenario_name}` is not one of {}", names.join(", ")))
    })?;
    let engine = match top.string("engine")? {
        None => Engine::default(),
        Some(name) => Engine::from_name(&name)
            .ok_or_else(|| invalid("engine", format!("`{name}` is not one of exact, trotter_rwa, trotter_full")))?,
    };
    let mode = match top.string("mode")? {
        Some(name) => Mode::from_name(&name).ok_or_else(|| invalid("mode", "expected `evolve` or `steady`"))?,
        None => scenario.default_mode().ok_or_else(|| ConfigError::Missing(vec!["mode".into()]))?,
    };
    let n_max = top.count("n_max")?.unwrap_or(qvdp_core::fock::DEFAULT_LEVELS);
    let tail = top.number("tail_tolerance")?.unwrap_or(qvdp_core::fock::DEFAULT_TAIL_TOLERANCE);
    let trunc = FockTruncation::with_tolerance(n_max, tail).map_err(|e| invalid("n_max", e.to_string()))?;

    let params = parse_params(top.table("params")?.unwrap_or_default(), trunc)?;
    let schedule = top.table("schedule")?.map(parse_schedule).transpose()?;
    let initial_state = parse_initial_state(top.table("initial_state")?)?;
    let sweep = parse_sweep(top.take("sweep"))?;
    let wigner = parse_wigner(top.table("wigner")?)?;
    let output = parse_output(top.table("output")?)?;

    let mut dt = None;
    let mut sample_times = Vec::new();
    for (base, v) in top.quantities(&TOP_UNITS[..1])? {
        if base == "dt" {
            dt = Some(v);
        }
    }
    let times_key = top.table.keys().find(|k| unit_scale(k, "sample_times", Unit::Time).is_some()).cloned();
    let cycles = top.take("sample_cycles");
    match (times_key, cycles) {
        (Some(_), Some(_)) => return Err(invalid("sample_cycles", "give either sample_times_us or sample_cycles")),
        (Some(key), None) => {
            let scale = unit_scale(&key, "sample_times", Unit::Time).unwrap_or(Scale::Pow10(0));
            let values = top.take(&key).map(|v| number_list(v, &key)).transpose()?.unwrap_or_default();
            sample_times = values.into_iter().map(|t| scale.apply(t)).collect();
        }
        (None, Some(v)) => {
            let period = schedule
                .map(|s| s.times.period)
                .ok_or_else(|| invalid("sample_cycles", "needs [schedule] period_us"))?;
            let values = number_list(v, "sample_cycles")?;
            if values.iter().any(|c| !(*c >= 0.0 && c.fract() == 0.0)) {
                return Err(invalid("sample_cycles", "expected non-negative whole numbers"));
            }
            // Rounded to picoseconds so 3 cycles of 200 us print as 0.0006.
            let us = |c: f64| (c * period * 1e12).round() / 1e6;
            sample_times = values.into_iter().map(|c| Scale::Pow10(-6).apply(us(c))).collect();
        }
        (None, None) => {}
    }
    top.finish(&TOP_UNITS)?;

    let config = ExperimentConfig {
        preset: None,
        scenario,
        engine,
        mode,
        params,
        schedule,
        initial_state,
        sweep,
        sample_times,
        dt,
        wigner,
        output,
    };
    config.validate()?;
    Ok(config)
}

fn known_units(list: &[(&'static str, Unit, Param)]) -> Vec<(&'static str, Unit)> {
    list.iter().map(|(b, u, _)| (*b, *u)).collect()
}

fn parse_params(table: Table, trunc: FockTruncation) -> Result<VdpParams, ConfigError> {
    let known = known_units(&MODEL_PARAMS);
    let mut section = Section::new("[params]", table);
    let mut params = VdpParams { trunc, ..Default::default() };
    let mut state = InitialState::Vacuum;
    for (base, v) in section.quantities(&known)? {
        let (_, _, p) = MODEL_PARAMS.iter().find(|(b, _, _)| *b == base).copied().expect("known base");
        p.apply(v, &mut params, &mut state);
    }
    section.finish(&known)?;
    Ok(params)
}

fn parse_schedule(table: Table) -> Result<ScheduleSpec, ConfigError> {
    let mut section = Section::new("[schedule]", table);
    let n_cycles = section.count("n_cycles")?.unwrap_or(0);
    let eta = section.number("eta")?.unwrap_or(DEFAULT_ETA);
    let stark_compensation = section.boolean("stark_compensation")?.unwrap_or(true);
    let mut times = CycleTimes::default();
    let mut idle = None;
    let mut omega_z = DEFAULT_OMEGA_Z;
    let mut trap_offset = 0.0;
    for (base, v) in section.quantities(&SCHEDULE_UNITS)? {
        match base.as_str() {
            "tau_bsb" => times.bsb = v,
            "tau_rsb" => times.rsb = v,
            "tau_2rsb" => times.rsb2 = v,
            "tau_sq" => times.squeeze = v,
            "tau_reset" => times.reset = v,
            "tau_idle" => idle = Some(v),
            "period" => times.period = v,
            "trap_frequency" => omega_z = v,
            _ => trap_offset = v,
        }
    }
    section.finish(&SCHEDULE_UNITS)?;
    if !(times.period > 0.0) {
        return Err(ConfigError::Missing(vec!["schedule.period_us".into()]));
    }
    let busy = [times.squeeze, times.bsb, times.rsb, times.rsb2, times.reset];
    if busy.iter().any(|t| !(*t >= 0.0)) {
        return Err(invalid("[schedule]", "pulse times must be >= 0"));
    }
    if times.idle() < -1e-9 * times.period {
        return Err(invalid("[schedule]", "pulse times exceed period_us"));
    }
    if let Some(idle) = idle {
        if (idle - times.idle()).abs() > 1e-9 * times.period {
            return Err(invalid(
                "schedule.tau_idle_us",
                format!("{} us does not fill the period (expected {} us)", idle * 1e6, times.idle() * 1e6),
            ));
        }
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid("schedule.eta", format!("must lie in (0, 1), got {eta}")));
    }
    if !(omega_z > 0.0) {
        return Err(invalid("schedule.trap_frequency_hz_over_2pi", "must be > 0"));
    }
    Ok(ScheduleSpec { times, n_cycles, eta, omega_z, trap_offset, stark_compensation })
}

fn parse_initial_state(table: Option<Table>) -> Result<InitialState, ConfigError> {
    let Some(table) = table else {
        return Ok(InitialState::Vacuum);
    };
    let mut s = Section::new("[initial_state]", table);
    let kind = s.string("kind")?.ok_or_else(|| ConfigError::Missing(vec!["initial_state.kind".into()]))?;
    let alpha = C64::new(s.number("alpha_re")?.unwrap_or(0.0), s.number("alpha_im")?.unwrap_or(0.0));
    let state = match kind.as_str() {
        "vacuum" => InitialState::Vacuum,
        "fock" => {
            InitialState::Fock(s.count("n")?.ok_or_else(|| ConfigError::Missing(vec!["initial_state.n".into()]))?)
        }
        "coherent" => InitialState::Coherent(alpha),
        "displaced_thermal" => InitialState::DisplacedThermal {
            nbar: s.number("nbar")?.ok_or_else(|| ConfigError::Missing(vec!["initial_state.nbar".into()]))?,
            alpha,
        },
        other => {
            return Err(invalid(
                "initial_state.kind",
                format!("`{other}` is not one of vacuum, fock, coherent, displaced_thermal"),
            ))
        }
    };
    if !matches!(state, InitialState::Coherent(_) | InitialState::DisplacedThermal { .. })
        && alpha != C64::new(0.0, 0.0)
    {
        return Err(invalid("initial_state", format!("kind `{kind}` takes no alpha")));
    }
    s.finish(&[])?;
    Ok(state)
}

const MAX_SWEEP_AXES: usize = 2;

fn parse_sweep(value: Option<Value>) -> Result<Vec<SweepAxis>, ConfigError> {
    let Some(value) = value else {
        return Ok(Vec::new());
    };
    let Value::Array(items) = value else {
        return Err(invalid("sweep", "expected [[sweep]] tables"));
    };
    if items.len() > MAX_SWEEP_AXES {
        return Err(invalid("sweep", format!("at most {MAX_SWEEP_AXES} axes, got {}", items.len())));
    }
    let mut axes: Vec<SweepAxis> = Vec::new();
    for item in items {
        let Value::Table(table) = item else {
            return Err(invalid("sweep", "expected [[sweep]] tables"));
        };
        let mut s = Section::new("[[sweep]]", table);
        let name = s.string("param")?.ok_or_else(|| ConfigError::Missing(vec!["sweep.param".into()]))?;
        let values = s
            .take("values")
            .map(|v| number_list(v, "sweep.values"))
            .transpose()?
            .ok_or_else(|| ConfigError::Missing(vec!["sweep.values".into()]))?;
        s.finish(&[])?;
        let known: Vec<(&str, Unit)> =
            known_units(&MODEL_PARAMS).into_iter().chain(known_units(&STATE_PARAMS)).collect();
        let (param, scale) = Param::from_key(&name).ok_or_else(|| {
            unit_error(&name, "[[sweep]]", &known)
                .unwrap_or_else(|| ConfigError::UnknownKey { key: name.clone(), section: "[[sweep]] param".into() })
        })?;
        if values.is_empty() {
            return Err(invalid(format!("sweep.{name}"), "value list is empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid(format!("sweep.{name}"), "values must be finite"));
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid(format!("sweep.{name}"), "values repeat"));
        }
        if axes.iter().any(|a| a.param == param) {
            return Err(invalid(format!("sweep.{name}"), "parameter swept twice"));
        }
        axes.push(SweepAxis { name, param, scale, values });
    }
    Ok(axes)
}

fn parse_wigner(table: Option<Table>) -> Result<WignerSettings, ConfigError> {
    let mut w = WignerSettings::default();
    if let Some(table) = table {
        let mut s = Section::new("[wigner]", table);
        w.r_max = s.number("r_max")?.unwrap_or(w.r_max);
        w.n_r = s.count("n_r")?.unwrap_or(w.n_r);
        w.n_phi = s.count("n_phi")?.unwrap_or(w.n_phi);
        w.dump = s.boolean("dump")?.unwrap_or(w.dump);
        s.finish(&[])?;
    }
    Ok(w)
}

fn parse_output(table: Option<Table>) -> Result<OutputSettings, ConfigError> {
    let mut o = OutputSettings::default();
    if let Some(table) = table {
        let mut s = Section::new("[output]", table);
        o.dir = s.string("dir")?.unwrap_or(o.dir);
        o.csv = s.string("csv")?.unwrap_or(o.csv);
        s.finish(&[])?;
    }
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const MINIMAL: &str = r#"
scenario = "custom"
mode = "steady"

[params]
gamma1_plus_khz = 0.23
gamma2_per_s = 1310
omega_hz_over_2pi = 173
theta_rad = 0.5
"#;

    #[test]
    fn units_convert_to_si() {
        let c = load_config(MINIMAL).unwrap();
        assert!((c.params.gamma1_plus - 230.0).abs() < 1e-9);
        assert_eq!(c.params.gamma2, 1310.0);
        assert!((c.params.omega - 2.0 * PI * 173.0).abs() < 1e-9);
        assert_eq!(c.params.theta, 0.5);
        assert_eq!(c.engine, Engine::Exact);
        assert_eq!(c.initial_state, InitialState::Vacuum);
        assert_eq!(c.sweep_points().len(), 1);
    }

    #[test]
    fn empty_document_lists_required_fields() {
        let e = load_config("").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("scenario") && msg.contains("params") && msg.contains("preset"), "{msg}");
    }

    #[test]
    fn unknown_key_is_named() {
        let e = load_config(&format!("{MINIMAL}gamma3 = 1.0\n")).unwrap_err();
        assert!(matches!(&e, ConfigError::UnknownKey { key, .. } if key == "gamma3"), "{e}");
        assert!(e.to_string().contains("gamma3"));
        let e = load_config(&format!("{MINIMAL}gamma3_khz = 1.0\n")).unwrap_err();
        assert!(e.to_string().contains("gamma3_khz"), "{e}");
    }

    #[test]
    fn bare_or_wrong_units_are_rejected() {
        for key in ["omega2", "gamma_h", "omega2_khz", "gamma_h_hz_over_2pi", "theta"] {
            let e = load_config(&format!("{MINIMAL}{key} = 1.0\n")).unwrap_err();
            assert!(matches!(&e, ConfigError::MissingUnit { key: k, .. } if k == key), "{key}: {e}");
        }
        let e = load_config(&MINIMAL.replace("mode", "dt = 1.0\nmode")).unwrap_err();
        assert!(matches!(e, ConfigError::MissingUnit { .. }), "{e}");
        let doubled = format!("{MINIMAL}gamma2_khz = 1.31\n");
        assert!(matches!(load_config(&doubled).unwrap_err(), ConfigError::Invalid { .. }));
    }

    #[test]
    fn custom_scenario_needs_a_mode() {
        let e = load_config(&MINIMAL.replace("mode = \"steady\"", "")).unwrap_err();
        assert_eq!(e, ConfigError::Missing(vec!["mode".into()]));
    }

    #[test]
    fn evolve_needs_sample_times() {
        let e = load_config(&MINIMAL.replace("steady", "evolve")).unwrap_err();
        assert!(matches!(e, ConfigError::Missing(_)), "{e}");
        let c =
            load_config(&MINIMAL.replace("mode = \"steady\"", "mode = \"evolve\"\nsample_times_us = [0, 50]")).unwrap();
        assert_eq!(c.sample_times, vec![0.0, 5e-5]);
    }

    #[test]
    fn sweep_points_are_sorted_products() {
        let text = format!(
            "{MINIMAL}\n[[sweep]]\nparam = \"delta_hz_over_2pi\"\nvalues = [10, -10]\n\n[[sweep]]\nparam = \"gamma1_minus_khz\"\nvalues = [0.5, 0.1, 0.3]\n"
        );
        let c = load_config(&text).unwrap();
        let pts = c.sweep_points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0].coords, vec![-10.0, 0.1]);
        assert_eq!(pts[5].coords, vec![10.0, 0.5]);
        let (p, _) = c.resolve(&pts[5]);
        assert!((p.delta - 2.0 * PI * 10.0).abs() < 1e-12);
        assert!((p.gamma1_minus - 500.0).abs() < 1e-9);
    }

    #[test]
    fn sweep_validation() {
        let bad = [
            ("param = \"gamma3_khz\"\nvalues = [1]", "gamma3_khz"),
            ("param = \"omega\"\nvalues = [1]", "omega"),
            ("param = \"omega_hz_over_2pi\"\nvalues = []", "empty"),
            ("param = \"omega_hz_over_2pi\"\nvalues = [1, 1]", "repeat"),
            ("param = \"alpha_re\"\nvalues = [1]", "initial state"),
        ];
        for (body, needle) in bad {
            let e = load_config(&format!("{MINIMAL}\n[[sweep]]\n{body}\n")).unwrap_err();
            assert!(e.to_string().contains(needle), "{needle}: {e}");
        }
        let three = "[[sweep]]\nparam = \"omega_hz_over_2pi\"\nvalues = [1]\n".repeat(3);
        assert!(load_config(&format!("{MINIMAL}\n{three}")).unwrap_err().to_string().contains("at most"));
    }

    #[test]
    fn trotter_engine_needs_a_schedule_and_whole_cycles() {
        let e = load_config(&format!("engine = \"trotter_rwa\"\n{MINIMAL}")).unwrap_err();
        assert!(e.to_string().contains("[schedule]"), "{e}");
        let with_schedule = format!(
            "engine = \"trotter_rwa\"\nsample_times_us = [0, 150]\n{}\n[schedule]\nperiod_us = 100\ntau_bsb_us = 10\n",
            MINIMAL.replace("steady", "evolve")
        );
        let e = load_config(&with_schedule).unwrap_err();
        assert!(e.to_string().contains("whole number"), "{e}");
        let ok = load_config(&with_schedule.replace("150", "200")).unwrap();
        assert_eq!(ok.dt(), MAX_DT);
        let s = ok.schedule.unwrap();
        assert!((s.times.idle() - 90e-6).abs() < 1e-15);
        assert_eq!(ok.clone().with_engine(Engine::Exact).unwrap().dt(), DEFAULT_DT);
    }

    #[test]
    fn schedule_idle_must_fill_the_period() {
        let text = format!("{MINIMAL}\n[schedule]\nperiod_us = 100\ntau_bsb_us = 10\ntau_idle_us = 80\n");
        assert!(load_config(&text).unwrap_err().to_string().contains("tau_idle_us"));
        assert!(load_config(&text.replace("80", "90")).is_ok());
        let over = format!("{MINIMAL}\n[schedule]\nperiod_us = 100\ntau_2rsb_us = 120\n");
        assert!(load_config(&over).is_err());
    }

    #[test]
    fn initial_states_parse() {
        let text = format!("{MINIMAL}\n[initial_state]\nkind = \"displaced_thermal\"\nnbar = 1.5\nalpha_re = 1\n");
        let c = load_config(&text).unwrap();
        assert_eq!(c.initial_state, InitialState::DisplacedThermal { nbar: 1.5, alpha: C64::new(1.0, 0.0) });
        let fock = format!("{MINIMAL}\n[initial_state]\nkind = \"fock\"\nn = 2\n");
        assert_eq!(load_config(&fock).unwrap().initial_state, InitialState::Fock(2));
        let bad = format!("{MINIMAL}\n[initial_state]\nkind = \"vacuum\"\nalpha_re = 1\n");
        assert!(load_config(&bad).is_err());
        let unknown = format!("{MINIMAL}\n[initial_state]\nkind = \"vacuum\"\nbeta = 1\n");
        assert!(matches!(load_config(&unknown).unwrap_err(), ConfigError::UnknownKey { key, .. } if key == "beta"));
    }

    #[test]
    fn negative_rates_are_rejected() {
        let e = load_config(&MINIMAL.replace("0.23", "-0.23")).unwrap_err();
        assert!(e.to_string().contains("gamma1_plus"), "{e}");
    }
}
