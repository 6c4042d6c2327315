//! Experiment execution.
//!
//! Every `(snr point, variant, seed)` job is independent. Jobs run on a rayon
//! pool and are collected in index order, so the table never depends on
//! scheduling or on the thread count.

use ale_core::{
    align_and_compare, demodulate, filter_frame, generate_bits, lms_run, mse, run_pso, transmit, Algorithm,
    BitStream, ChannelConfig, Complex64, Error, FilterRun, FilterWeights, LmsConfig, MetricRecord,
    NonlinearProfile, PsoConfig,
};
use rayon::prelude::*;

use crate::config::{DecisionOutput, ExperimentKind, ExperimentSpec};
use crate::error::{BenchError, Result};
use crate::output::{HistoryRow, MetricRow, ResultTable, Rows, StepRow};
use crate::seeds::RunSeeds;

/// Runs on the global rayon pool.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    match spec.kind {
        ExperimentKind::ParticleSweep => particle_sweep(spec),
        ExperimentKind::StepSweep => step_sweep(spec),
        ExperimentKind::MseVsSnr | ExperimentKind::BerAwgn | ExperimentKind::BerNonlinear => snr_sweep(spec),
    }
}

/// Runs on a dedicated pool of `threads` workers; 0 means rayon's default.
pub fn run_experiment_with_threads(spec: &ExperimentSpec, threads: usize) -> Result<ResultTable> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    pool.install(|| run_experiment(spec))
}

/// The received frame for one job plus what is needed to score it.
struct Frame {
    bits: BitStream,
    clean: Vec<Complex64>,
    d: Vec<Complex64>,
}

fn make_frame(spec: &ExperimentSpec, snr_db: f64, profile: Option<&NonlinearProfile>, seeds: RunSeeds) -> ale_core::Result<Frame> {
    let k = spec.modulation.bits_per_symbol();
    let bits = generate_bits(spec.frame_len * k, seeds.bits)?;
    let x = ale_core::modulate(&bits, &spec.modulation)?;
    let channel = ChannelConfig { snr_db, nonlinear: profile.cloned(), seed: seeds.noise };
    let frame = transmit(&x, &channel)?;
    Ok(Frame { bits, clean: frame.clean.into_inner(), d: frame.d })
}

fn lms_config(spec: &ExperimentSpec, mu: f64) -> ale_core::Result<LmsConfig> {
    let mut cfg = LmsConfig::new(mu, spec.ale.taps())?;
    if let Some(w0) = &spec.lms.w0 {
        cfg.w0 = FilterWeights::new(w0.clone())?;
    }
    Ok(cfg)
}

fn pso_config(spec: &ExperimentSpec, n_particles: usize, seeds: RunSeeds) -> PsoConfig {
    PsoConfig { n_particles, seed: seeds.swarm, ..spec.pso.clone() }
}

/// Demodulates the chosen enhancer output over the valid range and scores it.
fn score(
    spec: &ExperimentSpec,
    frame: &Frame,
    run: &FilterRun,
    snr_db: f64,
    algorithm: Algorithm,
) -> ale_core::Result<MetricRecord> {
    let (signal, lag) = match spec.decision {
        DecisionOutput::Error => (&run.e, 0),
        DecisionOutput::Enhanced => (&run.y, spec.ale.delta()),
    };
    let valid = run.valid_range.clone();
    let k = spec.modulation.bits_per_symbol();
    let rx = demodulate(&signal[valid.clone()], &spec.modulation)?;
    let first_tx = valid.start - lag;
    let last_tx = valid.end - lag;
    let tx = BitStream::new(frame.bits.as_slice()[first_tx * k..last_tx * k].to_vec())?;
    let (compared_bits, error_bits) = align_and_compare(&tx, &rx, 0)?;
    let clean_mse = valid.clone().map(|n| (frame.clean[n - lag] - signal[n]).norm_sqr()).sum::<f64>() / valid.len() as f64;
    let record = MetricRecord {
        snr_db,
        algorithm,
        ber: error_bits as f64 / compared_bits as f64,
        mse: mse(&frame.d, &run.y, valid)?,
        compared_bits,
        error_bits,
        clean_mse,
        params: Vec::new(),
    };
    record.validate()?;
    Ok(record)
}

fn fail(spec: &ExperimentSpec, snr_idx: usize, point: String, seed_index: usize, source: Error) -> BenchError {
    BenchError::Run { snr_db: spec.snr_grid[snr_idx], point, seed_index, source }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Index triples `(snr, variant, seed)` in output order.
fn jobs(spec: &ExperimentSpec, variants: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::with_capacity(spec.snr_grid.len() * variants * spec.n_seeds);
    for s in 0..spec.snr_grid.len() {
        for v in 0..variants {
            for seed in 0..spec.n_seeds {
                out.push((s, v, seed));
            }
        }
    }
    out
}

fn snr_sweep(spec: &ExperimentSpec) -> Result<ResultTable> {
    let profiles: Vec<Option<&NonlinearProfile>> = match spec.kind {
        ExperimentKind::BerNonlinear => spec.profiles.iter().map(Some).collect(),
        _ => vec![None],
    };
    let n = spec.pso.n_particles;
    let results: Vec<ale_core::Result<[MetricRecord; 2]>> = jobs(spec, profiles.len())
        .into_par_iter()
        .map(|(s, v, seed)| {
            let snr_db = spec.snr_grid[s];
            let seeds = RunSeeds::derive(spec.base_seed, s, seed);
            let frame = make_frame(spec, snr_db, profiles[v], seeds)?;
            let lms = lms_run(&frame.d, &lms_config(spec, spec.lms.mu)?, &spec.ale)?;
            let (w, _) = run_pso(&frame.d, &pso_config(spec, n, seeds), &spec.ale)?;
            let pso = filter_frame(&frame.d, &w, &spec.ale)?;
            Ok([
                score(spec, &frame, &lms.run, snr_db, Algorithm::Lms)?,
                score(spec, &frame, &pso, snr_db, Algorithm::Pso)?,
            ])
        })
        .collect();

    let mut rows = Vec::with_capacity(results.len() * 2 + spec.snr_grid.len() * profiles.len() * 2);
    let mut iter = jobs(spec, profiles.len()).into_iter().zip(results);
    for s in 0..spec.snr_grid.len() {
        for profile in &profiles {
            let label = profile.map(|p| p.label.clone());
            let mut group = Vec::with_capacity(spec.n_seeds);
            for _ in 0..spec.n_seeds {
                let ((_, _, seed), res) = iter.next().expect("one result per job");
                let pair = res.map_err(|e| {
                    let point = label.as_deref().map_or_else(|| "awgn".to_string(), |l| format!("profile {l}"));
                    fail(spec, s, point, seed, e)
                })?;
                group.push((seed, pair));
            }
            for (a, algorithm) in [Algorithm::Lms, Algorithm::Pso].into_iter().enumerate() {
                let row = |seed, record| MetricRow { seed, profile: label.clone(), mu: spec.lms.mu, n_particles: n, record };
                for (seed, pair) in &group {
                    rows.push(row(Some(*seed), pair[a].clone()));
                }
                let records = group.iter().map(|(_, p)| &p[a]);
                let avg = MetricRecord {
                    snr_db: spec.snr_grid[s],
                    algorithm,
                    ber: mean(records.clone().map(|r| r.ber)),
                    mse: mean(records.clone().map(|r| r.mse)),
                    compared_bits: records.clone().map(|r| r.compared_bits).sum(),
                    error_bits: records.clone().map(|r| r.error_bits).sum(),
                    clean_mse: mean(records.map(|r| r.clean_mse)),
                    params: Vec::new(),
                };
                rows.push(row(None, avg));
            }
        }
    }
    Ok(ResultTable { spec: spec.clone(), rows: Rows::Metric(rows) })
}

fn step_sweep(spec: &ExperimentSpec) -> Result<ResultTable> {
    let results: Vec<ale_core::Result<f64>> = jobs(spec, spec.sweep_values.len())
        .into_par_iter()
        .map(|(s, v, seed)| {
            let snr_db = spec.snr_grid[s];
            let frame = make_frame(spec, snr_db, None, RunSeeds::derive(spec.base_seed, s, seed))?;
            match lms_run(&frame.d, &lms_config(spec, spec.sweep_values[v])?, &spec.ale) {
                Ok(trace) => mse(&frame.d, &trace.run.y, trace.run.valid_range),
                Err(Error::Diverged { .. }) => Ok(f64::INFINITY),
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut rows = Vec::new();
    let mut iter = jobs(spec, spec.sweep_values.len()).into_iter().zip(results);
    for s in 0..spec.snr_grid.len() {
        let snr_db = spec.snr_grid[s];
        for &mu in &spec.sweep_values {
            let start = rows.len();
            for _ in 0..spec.n_seeds {
                let ((_, _, seed), res) = iter.next().expect("one result per job");
                let value = res.map_err(|e| fail(spec, s, format!("mu {mu}"), seed, e))?;
                let diverged_runs = usize::from(value.is_infinite());
                rows.push(StepRow { snr_db, mu, seed: Some(seed), mse: value, diverged_runs });
            }
            let group = &rows[start..];
            let avg = StepRow {
                snr_db,
                mu,
                seed: None,
                mse: mean(group.iter().map(|r| r.mse)),
                diverged_runs: group.iter().map(|r| r.diverged_runs).sum(),
            };
            rows.push(avg);
        }
    }
    Ok(ResultTable { spec: spec.clone(), rows: Rows::Step(rows) })
}

/// Convergence curves run the full iteration budget so every series has
/// `max_iters` points.
fn particle_sweep(spec: &ExperimentSpec) -> Result<ResultTable> {
    let results: Vec<ale_core::Result<Vec<f64>>> = jobs(spec, spec.sweep_values.len())
        .into_par_iter()
        .map(|(s, v, seed)| {
            let seeds = RunSeeds::derive(spec.base_seed, s, seed);
            let frame = make_frame(spec, spec.snr_grid[s], None, seeds)?;
            let cfg = PsoConfig { patience: 0, ..pso_config(spec, spec.sweep_values[v] as usize, seeds) };
            Ok(run_pso(&frame.d, &cfg, &spec.ale)?.1.history)
        })
        .collect();

    let mut rows = Vec::new();
    let mut iter = jobs(spec, spec.sweep_values.len()).into_iter().zip(results);
    for s in 0..spec.snr_grid.len() {
        let snr_db = spec.snr_grid[s];
        for &value in &spec.sweep_values {
            let n_particles = value as usize;
            let mut histories = Vec::with_capacity(spec.n_seeds);
            for _ in 0..spec.n_seeds {
                let ((_, _, seed), res) = iter.next().expect("one result per job");
                let history = res.map_err(|e| fail(spec, s, format!("n_particles {n_particles}"), seed, e))?;
                for (i, &gbest_cost) in history.iter().enumerate() {
                    rows.push(HistoryRow { snr_db, n_particles, seed: Some(seed), iteration: i + 1, gbest_cost });
                }
                histories.push(history);
            }
            let len = histories.iter().map(Vec::len).min().unwrap_or(0);
            for i in 0..len {
                let gbest_cost = mean(histories.iter().map(|h| h[i]));
                rows.push(HistoryRow { snr_db, n_particles, seed: None, iteration: i + 1, gbest_cost });
            }
        }
    }
    Ok(ResultTable { spec: spec.clone(), rows: Rows::History(rows) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentSpec;

    fn small(kind: ExperimentKind) -> ExperimentSpec {
        let mut spec = ExperimentSpec::defaults(kind);
        spec.frame_len = 400;
        spec.n_seeds = 2;
        spec.pso.max_iters = 8;
        spec.pso.n_particles = 6;
        if kind == ExperimentKind::ParticleSweep {
            spec.sweep_values = vec![4.0, 6.0];
        }
        spec
    }

    #[test]
    fn snr_sweep_row_counts() {
        let mut spec = small(ExperimentKind::MseVsSnr);
        spec.snr_grid = vec![0.0, 5.0, 10.0];
        let table = run_experiment(&spec).unwrap();
        let rows = table.metric_rows();
        assert_eq!(rows.len(), 3 * 2 * (2 + 1));
        assert_eq!(rows.iter().filter(|r| r.seed.is_none()).count(), 6);
    }

    #[test]
    fn particle_histories_use_full_budget() {
        let table = run_experiment(&small(ExperimentKind::ParticleSweep)).unwrap();
        let means: Vec<_> = table.history_rows().iter().filter(|r| r.seed.is_none()).collect();
        assert_eq!(means.len(), 2 * 8);
        assert!(table.history_rows().iter().all(|r| r.iteration <= 8));
    }

    #[test]
    fn diverged_step_is_infinite() {
        let mut spec = small(ExperimentKind::StepSweep);
        spec.sweep_values = vec![0.01, 50.0];
        let table = run_experiment(&spec).unwrap();
        let big = table.step_rows().iter().find(|r| r.mu == 50.0 && r.seed.is_none()).unwrap();
        assert!(big.mse.is_infinite());
        assert_eq!(big.diverged_runs, 2);
    }

    #[test]
    fn error_identifies_run() {
        let mut spec = small(ExperimentKind::BerAwgn);
        spec.snr_grid = vec![0.0, 3.0];
        spec.lms.w0 = Some(vec![f64::MAX, f64::MAX, 0.0, 0.0, 0.0]);
        match run_experiment(&spec) {
            Err(BenchError::Run { snr_db, seed_index, .. }) => {
                assert_eq!(snr_db, 0.0);
                assert_eq!(seed_index, 0);
            }
            other => panic!("{other:?}"),
        }
    }
}
