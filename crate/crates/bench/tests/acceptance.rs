//! Acceptance run. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;

use ale_bench::seeds::mix;
use ale_bench::{emit_csv, parse_config, run_experiment_with_threads, ExperimentKind, ResultTable};
use ale_core::{
    add_awgn, demodulate, evaluate_cost, filter_frame, generate_bits, lms_step, modulate, mse, run_pso, AleConfig,
    Complex64, FilterWeights, ModConfig, PsoConfig,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// SplitMix64 stream for test instances.
struct Stream(u64);

impl Stream {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(1);
        mix(self.0)
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn index(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        lo + (self.next_u64() % (hi_inclusive - lo + 1) as u64) as usize
    }
}

fn run(kind: ExperimentKind, doc: &str, threads: usize) -> ResultTable {
    let spec = parse_config(doc, kind).expect("acceptance config");
    run_experiment_with_threads(&spec, threads).expect("experiment run")
}

/// Seed-averaged `(metric)` keyed by `(profile, algorithm, snr)`.
fn means(table: &ResultTable, pick: fn(&ale_core::MetricRecord) -> f64) -> BTreeMap<(String, String, i64), f64> {
    table
        .metric_rows()
        .iter()
        .filter(|r| r.seed.is_none())
        .map(|r| {
            let key = (r.profile.clone().unwrap_or_default(), r.record.algorithm.to_string(), r.record.snr_db.round() as i64);
            (key, pick(&r.record))
        })
        .collect()
}

fn step_ordering(table: &ResultTable) -> Outcome {
    let m: BTreeMap<String, f64> =
        table.step_rows().iter().filter(|r| r.seed.is_none()).map(|r| (r.mu.to_string(), r.mse)).collect();
    let at = |mu: &str| m[mu];
    let below_small = at("0.02") < at("0.005");
    let below_large = at("0.02") < at("0.08");
    let tail = ["0.04", "0.06", "0.08", "0.1", "0.15", "0.2"];
    let increasing = tail.windows(2).all(|w| at(w[1]) > at(w[0]) || (at(w[1]).is_infinite() && at(w[0]).is_finite()));
    let listing: Vec<String> = m.iter().map(|(k, v)| format!("{k}:{v:.5}")).collect();
    outcome(
        below_small && below_large && increasing,
        format!(
            "mse(0.02)<mse(0.005) {below_small}, mse(0.02)<mse(0.08) {below_large}, increasing 0.04..0.2 {increasing}; {}",
            listing.join(" ")
        ),
    )
}

fn swarm_convergence(table: &ResultTable) -> Outcome {
    let series = |n: usize| -> Vec<f64> {
        table.history_rows().iter().filter(|r| r.seed.is_none() && r.n_particles == n).map(|r| r.gbest_cost).collect()
    };
    let first_close = |s: &[f64]| {
        let last = *s.last().unwrap();
        s.iter().position(|c| (c - last).abs() <= 0.05 * last.abs()).map(|i| i + 1)
    };
    let s60 = series(60);
    let s10 = series(10);
    if s60.len() != 60 || s10.len() != 60 {
        return outcome(false, format!("series lengths {} and {}", s60.len(), s10.len()));
    }
    let rel15 = (s60[14] - s60[59]).abs() / s60[59];
    let (f60, f10) = (first_close(&s60), first_close(&s10));
    let pass = rel15 <= 0.05 && matches!((f60, f10), (Some(a), Some(b)) if b > a);
    outcome(
        pass,
        format!("N=60 gap at 15: {:.4}%, first within 5%: N=60 at {f60:?}, N=10 at {f10:?}", 100.0 * rel15),
    )
}

fn count_violations(
    m: &BTreeMap<(String, String, i64), f64>,
    profile: &str,
    from_db: i64,
) -> (usize, Vec<i64>) {
    let mut bad = Vec::new();
    let mut points = 0;
    for ((p, alg, snr), &pso) in m {
        if p != profile || alg != "PSO" || *snr < from_db {
            continue;
        }
        points += 1;
        let lms = m[&(p.clone(), "LMS".to_string(), *snr)];
        if pso > lms {
            bad.push(*snr);
        }
    }
    (points, bad)
}

fn pso_vs_lms(ber_table: &ResultTable, mse_table: &ResultTable) -> Outcome {
    let (nb, bad_ber) = count_violations(&means(ber_table, |r| r.ber), "", -6);
    let (nm, bad_mse) = count_violations(&means(mse_table, |r| r.mse), "", -2);
    let pso_ber_0 = means(ber_table, |r| r.ber)[&(String::new(), "PSO".into(), 0)];
    outcome(
        nb > 0 && nm > 0 && bad_ber.len() <= 1 && bad_mse.len() <= 1,
        format!(
            "BER violations {bad_ber:?} of {nb}, MSE violations {bad_mse:?} of {nm}; PSO BER at 0 dB {pso_ber_0:.5} (reference only)"
        ),
    )
}

fn nonlinear_degradation(nl: &ResultTable, awgn: &ResultTable) -> Outcome {
    let nl_ber = means(nl, |r| r.ber);
    let awgn_ber = means(awgn, |r| r.ber);
    let mut not_worse = Vec::new();
    let mut ordering = Vec::new();
    let profiles: Vec<String> = nl.spec.profiles.iter().map(|p| p.label.clone()).collect();
    for profile in &profiles {
        for ((p, alg, snr), &b) in &nl_ber {
            if p == profile && *snr >= 0 && b < awgn_ber[&(String::new(), alg.clone(), *snr)] {
                not_worse.push(format!("{profile}/{alg}@{snr}"));
            }
        }
        let (_, bad) = count_violations(&nl_ber, profile, 0);
        if bad.len() > 1 {
            ordering.push(format!("{profile}:{bad:?}"));
        }
    }
    outcome(
        not_worse.is_empty() && ordering.is_empty(),
        format!("nonlinear better than AWGN at {not_worse:?}; PSO>LMS beyond tolerance {ordering:?}"),
    )
}

fn brute_cost(d: &[Complex64], w: &[f64], delta: usize) -> f64 {
    let mut total = 0.0;
    let mut count = 0;
    for n in delta + w.len() - 1..d.len() {
        let (mut yr, mut yi) = (0.0, 0.0);
        for (k, wk) in w.iter().enumerate() {
            yr += wk * d[n - delta - k].re;
            yi += wk * d[n - delta - k].im;
        }
        total += (d[n].re - yr).powi(2) + (d[n].im - yi).powi(2);
        count += 1;
    }
    total / count as f64
}

fn random_instance(s: &mut Stream) -> (Vec<Complex64>, Vec<f64>, AleConfig) {
    let taps = s.index(1, 8);
    let delta = s.index(1, 4);
    let len = s.index(taps + delta + 1, 64);
    let d = (0..len).map(|_| Complex64::new(s.uniform(-3.0, 3.0), s.uniform(-3.0, 3.0))).collect();
    let w = (0..taps).map(|_| s.uniform(-2.0, 2.0)).collect();
    (d, w, AleConfig::new(taps, delta).unwrap())
}

fn oracles() -> Outcome {
    let mut s = Stream(11);
    let mut worst_cost: f64 = 0.0;
    let mut worst_mse: f64 = 0.0;
    for _ in 0..100 {
        let (d, w, ale) = random_instance(&mut s);
        let fw = FilterWeights::new(w.clone()).unwrap();
        let fast = evaluate_cost(&fw, &d, &ale).unwrap().cost;
        worst_cost = worst_cost.max((fast - brute_cost(&d, &w, ale.delta())).abs() / fast.abs().max(f64::MIN_POSITIVE));
        let run = filter_frame(&d, &fw, &ale).unwrap();
        let m = mse(&d, &run.y, run.valid_range).unwrap();
        worst_mse = worst_mse.max((m - fast).abs() / fast.abs().max(f64::MIN_POSITIVE));
    }

    let h = 1e-4;
    let mut worst_grad: f64 = 0.0;
    for _ in 0..100 {
        let taps = s.index(1, 8);
        let v: Vec<f64> = (0..taps).map(|_| s.uniform(-2.0, 2.0)).collect();
        let w: Vec<f64> = (0..taps).map(|_| s.uniform(-1.0, 1.0)).collect();
        let target = s.uniform(-3.0, 3.0);
        let mu = s.uniform(0.001, 0.2);
        let sq = |w: &[f64]| (target - v.iter().zip(w).map(|(a, b)| a * b).sum::<f64>()).powi(2);
        let e = target - v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        let vc: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let next = lms_step(&FilterWeights::new(w.clone()).unwrap(), Complex64::new(e, 0.0), &vc, mu).unwrap();
        for k in 0..taps {
            let (mut p, mut m) = (w.clone(), w.clone());
            p[k] += h;
            m[k] -= h;
            let expected = -0.5 * mu * (sq(&p) - sq(&m)) / (2.0 * h);
            let got = next.as_slice()[k] - w[k];
            worst_grad = worst_grad.max((got - expected).abs() / got.abs().max(1e-3));
        }
    }
    outcome(
        worst_cost <= 1e-12 && worst_grad <= 1e-6 && worst_mse <= 1e-12,
        format!("cost rel {worst_cost:.2e}, step rel {worst_grad:.2e}, mse-vs-cost rel {worst_mse:.2e}"),
    )
}

fn invariants() -> Outcome {
    let mut s = Stream(23);
    let mut history_ok = true;
    let mut reconstruct_ok = true;
    for run in 0..50u64 {
        let (d, _, ale) = random_instance(&mut s);
        let cfg = PsoConfig { n_particles: 5 + s.index(0, 20), max_iters: 10 + s.index(0, 30), seed: run, ..PsoConfig::default() };
        let (w, state) = run_pso(&d, &cfg, &ale).unwrap();
        history_ok &= state.history.windows(2).all(|p| p[1] <= p[0]);
        let out = filter_frame(&d, &w, &ale).unwrap();
        for n in out.valid_range.clone() {
            let tol = 4.0 * f64::EPSILON * (d[n].norm() + out.y[n].norm());
            reconstruct_ok &= out.e[n] == d[n] - out.y[n] && (out.e[n] + out.y[n] - d[n]).norm() <= tol;
        }
    }

    let mut roundtrip_ok = true;
    for order in [2u32, 4, 8] {
        let cfg = ModConfig::new(order, 0.3).unwrap();
        let bits = generate_bits(3 * 4000, u64::from(order)).unwrap();
        let back = demodulate(modulate(&bits, &cfg).unwrap().as_slice(), &cfg).unwrap();
        roundtrip_ok &= back == bits;
    }

    let x = modulate(&generate_bits(1_000_000, 5).unwrap(), &ModConfig::bpsk()).unwrap();
    let frame = add_awgn(&x, 7.0, 6).unwrap();
    let noise: f64 = frame.d.iter().zip(x.as_slice()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / 1e6;
    let signal: f64 = x.as_slice().iter().map(|v| v.norm_sqr()).sum::<f64>() / 1e6;
    let snr = 10.0 * (signal / noise).log10();
    let snr_ok = (snr - 7.0).abs() <= 0.1;

    outcome(
        history_ok && reconstruct_ok && roundtrip_ok && snr_ok,
        format!(
            "gbest monotone {history_ok}, e+y=d {reconstruct_ok}, demod(mod) {roundtrip_ok}, empirical SNR {snr:.4} dB for 7 dB"
        ),
    )
}

fn determinism(runs: &[(ExperimentKind, &str, ResultTable)]) -> Outcome {
    let mut mismatched = Vec::new();
    for (kind, doc, first) in runs {
        let again = run(*kind, doc, 1);
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let pa = emit_csv(first, a.path()).unwrap();
        let pb = emit_csv(&again, b.path()).unwrap();
        if std::fs::read(pa).unwrap() != std::fs::read(pb).unwrap() {
            mismatched.push(kind.name());
        }
    }
    outcome(mismatched.is_empty(), format!("4 threads vs 1 thread, {} experiments, differing: {mismatched:?}", runs.len()))
}

fn main() -> ExitCode {
    let step_doc = "run.n_seeds = 20";
    let particle_doc = "run.n_seeds = 10";
    let snr_doc = "run.n_seeds = 10";

    let step = run(ExperimentKind::StepSweep, step_doc, 4);
    let particle = run(ExperimentKind::ParticleSweep, particle_doc, 4);
    let ber_awgn = run(ExperimentKind::BerAwgn, snr_doc, 4);
    let mse_snr = run(ExperimentKind::MseVsSnr, snr_doc, 4);
    let ber_nl = run(ExperimentKind::BerNonlinear, snr_doc, 4);

    let mut results = vec![
        ("1 step-size ordering", step_ordering(&step)),
        ("2 swarm-size convergence", swarm_convergence(&particle)),
        ("3 PSO vs LMS on AWGN", pso_vs_lms(&ber_awgn, &mse_snr)),
        ("4 nonlinear degradation", nonlinear_degradation(&ber_nl, &ber_awgn)),
        ("5 oracle equivalences", oracles()),
        ("6 exact invariants", invariants()),
    ];
    let runs = vec![
        (ExperimentKind::StepSweep, step_doc, step),
        (ExperimentKind::ParticleSweep, particle_doc, particle),
        (ExperimentKind::BerAwgn, snr_doc, ber_awgn),
        (ExperimentKind::MseVsSnr, snr_doc, mse_snr),
        (ExperimentKind::BerNonlinear, snr_doc, ber_nl),
    ];
    results.push(("7 determinism", determinism(&runs)));

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
