//! Experiment configuration.
//!
//! The config file is TOML restricted to dotted keys, for example
//!
//! ```toml
//! signal.H = 10000
//! ale.L = 5
//! lms.mu = 0.01
//! pso.n_particles = 60
//! run.n_seeds = 10
//! ber_awgn.snr_grid = [-10, -8, -6, -4, -2, 0, 2, 4, 6, 8, 10]
//! ```
//!
//! Every key is optional and unknown keys are rejected. Keys under a kind
//! section (`particle_sweep.`, `step_sweep.`, ...) only affect that kind.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use ale_core::{AleConfig, ModConfig, NonlinearProfile, PsoConfig, Tone};
use toml::{Table, Value};

use crate::error::{config_err, BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentKind {
    ParticleSweep,
    StepSweep,
    MseVsSnr,
    BerAwgn,
    BerNonlinear,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::ParticleSweep,
        ExperimentKind::StepSweep,
        ExperimentKind::MseVsSnr,
        ExperimentKind::BerAwgn,
        ExperimentKind::BerNonlinear,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::ParticleSweep => "particle_sweep",
            ExperimentKind::StepSweep => "step_sweep",
            ExperimentKind::MseVsSnr => "mse_vs_snr",
            ExperimentKind::BerAwgn => "ber_awgn",
            ExperimentKind::BerNonlinear => "ber_nonlinear",
        }
    }

    fn default_snr_grid(&self) -> Vec<f64> {
        match self {
            ExperimentKind::ParticleSweep | ExperimentKind::StepSweep => vec![-2.0],
            _ => (-5..=5).map(|i| 2.0 * i as f64).collect(),
        }
    }

    fn default_sweep_values(&self) -> Vec<f64> {
        match self {
            ExperimentKind::ParticleSweep => vec![10.0, 20.0, 30.0, 40.0, 50.0, 60.0],
            ExperimentKind::StepSweep => {
                vec![0.001, 0.0025, 0.005, 0.01, 0.02, 0.03, 0.04, 0.06, 0.08, 0.1, 0.15, 0.2]
            }
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| BenchError::Config { key: "kind".into(), message: format!("unknown experiment `{s}`") })
    }
}

/// Which enhancer output is fed to the demodulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionOutput {
    /// `e[n] = d[n] - y[n]`: the input with its predictable part removed.
    Error,
    /// `y[n]`, compared against the transmitted bits delayed by `delta`.
    Enhanced,
}

impl DecisionOutput {
    pub fn name(&self) -> &'static str {
        match self {
            DecisionOutput::Error => "error",
            DecisionOutput::Enhanced => "enhanced",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmsSettings {
    pub mu: f64,
    /// Initial weights; zeros when absent.
    pub w0: Option<Vec<f64>>,
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub snr_grid: Vec<f64>,
    /// Particle counts for `particle_sweep`, step sizes for `step_sweep`.
    pub sweep_values: Vec<f64>,
    pub n_seeds: usize,
    pub base_seed: u64,
    pub frame_len: usize,
    pub modulation: ModConfig,
    pub ale: AleConfig,
    pub decision: DecisionOutput,
    pub lms: LmsSettings,
    /// `seed` is ignored; each run derives its own swarm seed.
    pub pso: PsoConfig,
    pub profiles: Vec<NonlinearProfile>,
}

pub const DEFAULT_BASE_SEED: u64 = 20_180_517;

impl ExperimentSpec {
    /// Defaults: H = 10000, BPSK, L = 5, delta = 1, mu = 0.01, 60 particles.
    pub fn defaults(kind: ExperimentKind) -> Self {
        Self {
            kind,
            snr_grid: kind.default_snr_grid(),
            sweep_values: kind.default_sweep_values(),
            n_seeds: 10,
            base_seed: DEFAULT_BASE_SEED,
            frame_len: 10_000,
            modulation: ModConfig::bpsk(),
            ale: AleConfig::default(),
            decision: DecisionOutput::Error,
            lms: LmsSettings { mu: 0.01, w0: None },
            pso: PsoConfig::default(),
            profiles: NonlinearProfile::band_defaults(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let kind = self.kind.name();
        if self.snr_grid.is_empty() {
            return config_err(format!("{kind}.snr_grid"), "grid is empty");
        }
        if let Some(bad) = self.snr_grid.iter().find(|s| s.is_nan() || **s == f64::NEG_INFINITY) {
            return config_err(format!("{kind}.snr_grid"), format!("unusable SNR {bad}"));
        }
        match self.kind {
            ExperimentKind::ParticleSweep => {
                if self.sweep_values.is_empty() {
                    return config_err(format!("{kind}.sweep_values"), "particle counts are empty");
                }
                if let Some(v) = self.sweep_values.iter().find(|v| !(v.fract() == 0.0 && **v >= 1.0 && **v <= 1e6)) {
                    return config_err(format!("{kind}.sweep_values"), format!("particle count {v} is not a positive integer"));
                }
            }
            ExperimentKind::StepSweep => {
                if self.sweep_values.is_empty() {
                    return config_err(format!("{kind}.sweep_values"), "step sizes are empty");
                }
                if let Some(v) = self.sweep_values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                    return config_err(format!("{kind}.sweep_values"), format!("step size {v} is not finite and >= 0"));
                }
            }
            _ => {
                if !self.sweep_values.is_empty() {
                    return config_err(format!("{kind}.sweep_values"), "this experiment sweeps SNR only");
                }
            }
        }
        if self.kind == ExperimentKind::BerNonlinear && self.profiles.is_empty() {
            return config_err("channel.profiles", "ber_nonlinear needs at least one profile");
        }
        if self.n_seeds == 0 {
            return config_err("run.n_seeds", "must be at least 1");
        }
        let k = self.modulation.bits_per_symbol();
        if self.frame_len < self.ale.taps() + self.ale.delta() + 1 {
            return config_err(
                "signal.H",
                format!("{} samples cannot hold L + delta + 1 = {}", self.frame_len, self.ale.taps() + self.ale.delta() + 1),
            );
        }
        if self.frame_len.checked_mul(k).is_none() {
            return config_err("signal.H", "frame too long");
        }
        if !(self.lms.mu.is_finite() && self.lms.mu >= 0.0) {
            return config_err("lms.mu", "must be finite and >= 0");
        }
        if let Some(w0) = &self.lms.w0 {
            if w0.len() != self.ale.taps() {
                return config_err("lms.w0", format!("{} values for L = {}", w0.len(), self.ale.taps()));
            }
            if w0.iter().any(|w| !w.is_finite()) {
                return config_err("lms.w0", "values must be finite");
            }
        }
        self.pso.validate().map_err(|e| BenchError::Config { key: "pso".into(), message: e.to_string() })?;
        for (i, p) in self.profiles.iter().enumerate() {
            p.validate()
                .map_err(|e| BenchError::Config { key: format!("channel.profiles[{i}]"), message: e.to_string() })?;
        }
        Ok(())
    }

    /// The spec as a config document; parsing it back yields the same spec.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        let kind = self.kind.name();
        let floats = |v: &[f64]| format!("[{}]", v.iter().map(|x| fmt_float(*x)).collect::<Vec<_>>().join(", "));
        let _ = writeln!(out, "{kind}.snr_grid = {}", floats(&self.snr_grid));
        if !self.sweep_values.is_empty() {
            let _ = writeln!(out, "{kind}.sweep_values = {}", floats(&self.sweep_values));
        }
        let _ = writeln!(out, "run.n_seeds = {}", self.n_seeds);
        // TOML integers are signed 64-bit; seeds above i64::MAX go out as strings.
        if self.base_seed <= i64::MAX as u64 {
            let _ = writeln!(out, "run.base_seed = {}", self.base_seed);
        } else {
            let _ = writeln!(out, "run.base_seed = \"{}\"", self.base_seed);
        }
        let _ = writeln!(out, "signal.H = {}", self.frame_len);
        let _ = writeln!(out, "signal.M = {}", self.modulation.order());
        let _ = writeln!(out, "signal.phase_offset = {}", fmt_float(self.modulation.phase_offset()));
        let _ = writeln!(out, "ale.L = {}", self.ale.taps());
        let _ = writeln!(out, "ale.delta = {}", self.ale.delta());
        let _ = writeln!(out, "ale.decision_output = \"{}\"", self.decision.name());
        let _ = writeln!(out, "lms.mu = {}", fmt_float(self.lms.mu));
        if let Some(w0) = &self.lms.w0 {
            let _ = writeln!(out, "lms.w0 = {}", floats(w0));
        }
        let p = &self.pso;
        let _ = writeln!(out, "pso.n_particles = {}", p.n_particles);
        let _ = writeln!(out, "pso.c1 = {}", fmt_float(p.c1));
        let _ = writeln!(out, "pso.c2 = {}", fmt_float(p.c2));
        let _ = writeln!(out, "pso.inertia = {}", fmt_float(p.inertia));
        let _ = writeln!(out, "pso.max_iters = {}", p.max_iters);
        let _ = writeln!(out, "pso.tol = {}", fmt_float(p.tol));
        let _ = writeln!(out, "pso.patience = {}", p.patience);
        let _ = writeln!(out, "pso.init_range = {}", fmt_float(p.init_range));
        let _ = writeln!(out, "pso.v_max = {}", fmt_float(p.v_max));
        let _ = writeln!(out, "pso.per_component_random = {}", p.per_component_random);
        let _ = writeln!(out, "pso.parallel = {}", p.parallel);
        let profiles: Vec<String> = self
            .profiles
            .iter()
            .map(|pr| {
                let tones: Vec<String> = pr
                    .tones
                    .iter()
                    .map(|t| {
                        format!(
                            "{{ amplitude = {}, frequency = {}, phase = {} }}",
                            fmt_float(t.amplitude),
                            fmt_float(t.frequency),
                            fmt_float(t.phase)
                        )
                    })
                    .collect();
                format!(
                    "{{ label = {}, cubic_gain = {}, tones = [{}] }}",
                    Value::String(pr.label.clone()),
                    fmt_float(pr.cubic_gain),
                    tones.join(", ")
                )
            })
            .collect();
        let _ = writeln!(out, "channel.profiles = [{}]", profiles.join(", "));
        out
    }
}

/// TOML-compatible float with round-trip precision.
fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{x:.1}")
    } else {
        format!("{x:?}")
    }
}

fn flatten(prefix: &str, table: &Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&path, t, out),
            other => {
                out.insert(path, other.clone());
            }
        }
    }
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        other => config_err(key, format!("expected a number, found {}", other.type_str())),
    }
}

fn as_usize(key: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        Value::Integer(i) => config_err(key, format!("must be non-negative, found {i}")),
        other => config_err(key, format!("expected an integer, found {}", other.type_str())),
    }
}

fn as_bool(key: &str, v: &Value) -> Result<bool> {
    v.as_bool().map_or_else(|| config_err(key, format!("expected a boolean, found {}", v.type_str())), Ok)
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str().map_or_else(|| config_err(key, format!("expected a string, found {}", v.type_str())), Ok)
}

fn as_f64_list(key: &str, v: &Value) -> Result<Vec<f64>> {
    match v {
        Value::Array(items) => items.iter().enumerate().map(|(i, x)| as_f64(&format!("{key}[{i}]"), x)).collect(),
        other => config_err(key, format!("expected an array of numbers, found {}", other.type_str())),
    }
}

fn as_seed(key: &str, v: &Value) -> Result<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        Value::String(s) => s.parse().map_or_else(|_| config_err(key, format!("`{s}` is not a u64")), Ok),
        other => config_err(key, format!("expected a non-negative integer, found {}", other.type_str())),
    }
}

fn parse_profiles(key: &str, v: &Value) -> Result<Vec<NonlinearProfile>> {
    let Value::Array(items) = v else {
        return config_err(key, format!("expected an array of tables, found {}", v.type_str()));
    };
    let mut profiles = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let pkey = format!("{key}[{i}]");
        let Value::Table(t) = item else {
            return config_err(pkey, "expected a table");
        };
        let mut label = None;
        let mut cubic_gain = 0.0;
        let mut tones = Vec::new();
        for (k, val) in t {
            let fkey = format!("{pkey}.{k}");
            match k.as_str() {
                "label" => label = Some(as_str(&fkey, val)?.to_string()),
                "cubic_gain" => cubic_gain = as_f64(&fkey, val)?,
                "tones" => {
                    let Value::Array(ts) = val else {
                        return config_err(fkey, "expected an array of tables");
                    };
                    for (j, tv) in ts.iter().enumerate() {
                        let tkey = format!("{fkey}[{j}]");
                        let Value::Table(tt) = tv else {
                            return config_err(tkey, "expected a table");
                        };
                        let mut tone = Tone { amplitude: f64::NAN, frequency: f64::NAN, phase: 0.0 };
                        for (tk, tval) in tt {
                            let key = format!("{tkey}.{tk}");
                            match tk.as_str() {
                                "amplitude" => tone.amplitude = as_f64(&key, tval)?,
                                "frequency" => tone.frequency = as_f64(&key, tval)?,
                                "phase" => tone.phase = as_f64(&key, tval)?,
                                _ => return config_err(key, "unknown key"),
                            }
                        }
                        if tone.amplitude.is_nan() || tone.frequency.is_nan() {
                            return config_err(tkey, "tones need both amplitude and frequency");
                        }
                        tones.push(tone);
                    }
                }
                _ => return config_err(fkey, "unknown key"),
            }
        }
        let label = label.ok_or_else(|| BenchError::Config { key: format!("{pkey}.label"), message: "missing".into() })?;
        let profile = NonlinearProfile::new(label, cubic_gain, tones)
            .map_err(|e| BenchError::Config { key: pkey.clone(), message: e.to_string() })?;
        profiles.push(profile);
    }
    Ok(profiles)
}

/// Parses a config document and resolves it for `kind`.
///
/// Keys belonging to other kinds' sections are checked but otherwise ignored,
/// so one file can drive every experiment.
pub fn parse_config(text: &str, kind: ExperimentKind) -> Result<ExperimentSpec> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| BenchError::Config { key: "<document>".into(), message: e.to_string() })?;
    let mut flat = BTreeMap::new();
    flatten("", &table, &mut flat);

    let mut spec = ExperimentSpec::defaults(kind);
    let mut order = spec.modulation.order();
    let mut phase = spec.modulation.phase_offset();
    let mut taps = spec.ale.taps();
    let mut delta = spec.ale.delta();

    for (key, v) in &flat {
        let key = key.as_str();
        if let Some((section, field)) = key.split_once('.') {
            if let Ok(k) = section.parse::<ExperimentKind>() {
                if section != k.name() {
                    return config_err(key, "unknown key");
                }
                let parsed = match field {
                    "snr_grid" | "sweep_values" => as_f64_list(key, v)?,
                    _ => return config_err(key, "unknown key"),
                };
                if k == kind {
                    if field == "snr_grid" {
                        spec.snr_grid = parsed;
                    } else {
                        spec.sweep_values = parsed;
                    }
                }
                continue;
            }
        }
        match key {
            "run.n_seeds" => spec.n_seeds = as_usize(key, v)?,
            "run.base_seed" => spec.base_seed = as_seed(key, v)?,
            "signal.H" => spec.frame_len = as_usize(key, v)?,
            "signal.M" => order = u32::try_from(as_usize(key, v)?).unwrap_or(0),
            "signal.phase_offset" => phase = as_f64(key, v)?,
            "ale.L" => taps = as_usize(key, v)?,
            "ale.delta" => delta = as_usize(key, v)?,
            "ale.decision_output" => {
                spec.decision = match as_str(key, v)? {
                    "error" => DecisionOutput::Error,
                    "enhanced" => DecisionOutput::Enhanced,
                    other => return config_err(key, format!("`{other}` is not one of error, enhanced")),
                }
            }
            "lms.mu" => spec.lms.mu = as_f64(key, v)?,
            "lms.w0" => spec.lms.w0 = Some(as_f64_list(key, v)?),
            "pso.n_particles" => spec.pso.n_particles = as_usize(key, v)?,
            "pso.c1" => spec.pso.c1 = as_f64(key, v)?,
            "pso.c2" => spec.pso.c2 = as_f64(key, v)?,
            "pso.inertia" => spec.pso.inertia = as_f64(key, v)?,
            "pso.max_iters" => spec.pso.max_iters = as_usize(key, v)?,
            "pso.tol" => spec.pso.tol = as_f64(key, v)?,
            "pso.patience" => spec.pso.patience = as_usize(key, v)?,
            "pso.init_range" => spec.pso.init_range = as_f64(key, v)?,
            "pso.v_max" => spec.pso.v_max = as_f64(key, v)?,
            "pso.per_component_random" => spec.pso.per_component_random = as_bool(key, v)?,
            "pso.parallel" => spec.pso.parallel = as_bool(key, v)?,
            "channel.profiles" => spec.profiles = parse_profiles(key, v)?,
            _ => return config_err(key, "unknown key"),
        }
    }

    spec.modulation = ModConfig::new(order, phase)
        .map_err(|e| BenchError::Config { key: "signal".into(), message: e.to_string() })?;
    if taps == 0 {
        return config_err("ale.L", "filter order L must be at least 1");
    }
    if delta == 0 {
        return config_err("ale.delta", "must be at least 1");
    }
    spec.ale = AleConfig::new(taps, delta)?;
    for (key, bad) in [
        ("pso.n_particles", spec.pso.n_particles == 0),
        ("pso.max_iters", spec.pso.max_iters == 0),
        ("pso.init_range", !(spec.pso.init_range > 0.0)),
        ("pso.v_max", !(spec.pso.v_max > 0.0)),
    ] {
        if bad {
            return config_err(key, "must be positive");
        }
    }
    spec.validate()?;
    Ok(spec)
}
