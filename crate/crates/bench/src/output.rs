//! Result tables and CSV emission.
//!
//! Column schemas, one file per experiment kind:
//!
//! | kind            | columns |
//! |-----------------|---------|
//! | `ber_awgn`      | snr_db, algorithm, seed, ber, mse, mu, n_particles, L, delta, compared_bits, error_bits, clean_mse_diag, aggregate |
//! | `ber_nonlinear` | snr_db, profile, algorithm, seed, ber, mse, mu, n_particles, L, delta, compared_bits, error_bits, clean_mse_diag, aggregate |
//! | `mse_vs_snr`    | snr_db, algorithm, seed, mse, clean_mse_diag, mu, n_particles, L, delta, aggregate |
//! | `particle_sweep`| snr_db, n_particles, seed, iteration, gbest_cost, L, delta, aggregate |
//! | `step_sweep`    | snr_db, mu, seed, mse, diverged_runs, L, delta, aggregate |
//!
//! Raw rows have `aggregate = seed` and the seed index in `seed`. Each group
//! of raw rows is followed by its mean row, which has an empty `seed` and
//! `aggregate = mean`. Floats are written with Rust's shortest round-trip
//! formatting, so `inf` marks a diverged step size.

use std::fs;
use std::path::{Path, PathBuf};

use ale_core::MetricRecord;

use crate::config::{ExperimentKind, ExperimentSpec};
use crate::error::{BenchError, Result};

/// One BER/MSE measurement, raw (`seed = Some`) or seed-averaged.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub seed: Option<usize>,
    /// Impairment profile label, `ber_nonlinear` only.
    pub profile: Option<String>,
    pub mu: f64,
    pub n_particles: usize,
    pub record: MetricRecord,
}

/// Best cost after `iteration` swarm iterations (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRow {
    pub snr_db: f64,
    pub n_particles: usize,
    pub seed: Option<usize>,
    pub iteration: usize,
    pub gbest_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRow {
    pub snr_db: f64,
    pub mu: f64,
    pub seed: Option<usize>,
    /// `inf` when the run diverged; the mean is then `inf` too.
    pub mse: f64,
    pub diverged_runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rows {
    Metric(Vec<MetricRow>),
    History(Vec<HistoryRow>),
    Step(Vec<StepRow>),
}

impl Rows {
    pub fn len(&self) -> usize {
        match self {
            Rows::Metric(r) => r.len(),
            Rows::History(r) => r.len(),
            Rows::Step(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub spec: ExperimentSpec,
    pub rows: Rows,
}

impl ResultTable {
    pub fn empty(spec: ExperimentSpec) -> Self {
        let rows = match spec.kind {
            ExperimentKind::ParticleSweep => Rows::History(Vec::new()),
            ExperimentKind::StepSweep => Rows::Step(Vec::new()),
            _ => Rows::Metric(Vec::new()),
        };
        Self { spec, rows }
    }

    pub fn kind(&self) -> ExperimentKind {
        self.spec.kind
    }

    pub fn metric_rows(&self) -> &[MetricRow] {
        match &self.rows {
            Rows::Metric(r) => r,
            _ => &[],
        }
    }

    pub fn history_rows(&self) -> &[HistoryRow] {
        match &self.rows {
            Rows::History(r) => r,
            _ => &[],
        }
    }

    pub fn step_rows(&self) -> &[StepRow] {
        match &self.rows {
            Rows::Step(r) => r,
            _ => &[],
        }
    }

    pub fn header(&self) -> &'static [&'static str] {
        header(self.kind())
    }

    /// Sidecar metadata: version line and the resolved config.
    pub fn metadata(&self) -> String {
        format!(
            "# {} {}\n# kind = {}\n# rows = {}\n{}",
            env!("CARGO_PKG_NAME"),
            env!("CARGO_PKG_VERSION"),
            self.kind(),
            self.rows.len(),
            self.spec.to_document()
        )
    }

    /// CSV bytes exactly as [`emit_csv`] writes them.
    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(self.header())?;
        let taps = self.spec.ale.taps().to_string();
        let delta = self.spec.ale.delta().to_string();
        let with_profile = self.kind() == ExperimentKind::BerNonlinear;
        match &self.rows {
            Rows::Metric(rows) => {
                for r in rows {
                    let m = &r.record;
                    let mut rec: Vec<String> = vec![m.snr_db.to_string()];
                    if with_profile {
                        rec.push(r.profile.clone().unwrap_or_default());
                    }
                    rec.push(m.algorithm.to_string());
                    rec.push(seed_cell(r.seed));
                    if self.kind() == ExperimentKind::MseVsSnr {
                        rec.extend([
                            m.mse.to_string(),
                            m.clean_mse.to_string(),
                            r.mu.to_string(),
                            r.n_particles.to_string(),
                            taps.clone(),
                            delta.clone(),
                        ]);
                    } else {
                        rec.extend([
                            m.ber.to_string(),
                            m.mse.to_string(),
                            r.mu.to_string(),
                            r.n_particles.to_string(),
                            taps.clone(),
                            delta.clone(),
                            m.compared_bits.to_string(),
                            m.error_bits.to_string(),
                            m.clean_mse.to_string(),
                        ]);
                    }
                    rec.push(aggregate_cell(r.seed).into());
                    w.write_record(&rec)?;
                }
            }
            Rows::History(rows) => {
                for r in rows {
                    w.write_record([
                        r.snr_db.to_string(),
                        r.n_particles.to_string(),
                        seed_cell(r.seed),
                        r.iteration.to_string(),
                        r.gbest_cost.to_string(),
                        taps.clone(),
                        delta.clone(),
                        aggregate_cell(r.seed).into(),
                    ])?;
                }
            }
            Rows::Step(rows) => {
                for r in rows {
                    w.write_record([
                        r.snr_db.to_string(),
                        r.mu.to_string(),
                        seed_cell(r.seed),
                        r.mse.to_string(),
                        r.diverged_runs.to_string(),
                        taps.clone(),
                        delta.clone(),
                        aggregate_cell(r.seed).into(),
                    ])?;
                }
            }
        }
        w.into_inner().map_err(|e| BenchError::Io { path: PathBuf::from("<buffer>"), source: e.into_error() })
    }
}

fn seed_cell(seed: Option<usize>) -> String {
    seed.map(|s| s.to_string()).unwrap_or_default()
}

fn aggregate_cell(seed: Option<usize>) -> &'static str {
    if seed.is_some() { "seed" } else { "mean" }
}

pub fn header(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::BerAwgn => &[
            "snr_db", "algorithm", "seed", "ber", "mse", "mu", "n_particles", "L", "delta", "compared_bits",
            "error_bits", "clean_mse_diag", "aggregate",
        ],
        ExperimentKind::BerNonlinear => &[
            "snr_db", "profile", "algorithm", "seed", "ber", "mse", "mu", "n_particles", "L", "delta",
            "compared_bits", "error_bits", "clean_mse_diag", "aggregate",
        ],
        ExperimentKind::MseVsSnr => {
            &["snr_db", "algorithm", "seed", "mse", "clean_mse_diag", "mu", "n_particles", "L", "delta", "aggregate"]
        }
        ExperimentKind::ParticleSweep => {
            &["snr_db", "n_particles", "seed", "iteration", "gbest_cost", "L", "delta", "aggregate"]
        }
        ExperimentKind::StepSweep => &["snr_db", "mu", "seed", "mse", "diverged_runs", "L", "delta", "aggregate"],
    }
}

/// Writes `<dir>/<kind>.csv` and `<dir>/<kind>.meta.toml`, creating `dir`.
/// Returns the CSV path.
pub fn emit_csv(table: &ResultTable, dir: &Path) -> Result<PathBuf> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| BenchError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let csv_path = dir.join(format!("{}.csv", table.kind()));
    let meta_path = dir.join(format!("{}.meta.toml", table.kind()));
    let bytes = table.to_csv_bytes()?;
    fs::write(&csv_path, bytes).map_err(io(&csv_path))?;
    fs::write(&meta_path, table.metadata()).map_err(io(&meta_path))?;
    Ok(csv_path)
}
