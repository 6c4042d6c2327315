//! Statistical behaviour of the two adaptation schemes on AWGN frames.

use ale_core::{generate_bits, lms_run, modulate, run_pso, transmit, AleConfig, ChannelConfig, Complex64, LmsConfig, ModConfig, PsoConfig};

const LEN: usize = 10_000;

fn awgn_frame(snr_db: f64, seed: u64) -> Vec<Complex64> {
    let x = modulate(&generate_bits(LEN, seed).unwrap(), &ModConfig::bpsk()).unwrap();
    transmit(&x, &ChannelConfig::awgn(snr_db, seed ^ 0x9e37_79b9_7f4a_7c15)).unwrap().d
}

#[test]
fn lms_error_falls_between_first_and_last_tenth() {
    let ale = AleConfig::default();
    let tenth = LEN / 10;
    for mu in [0.01, 0.02, 0.04] {
        let mut cfg = LmsConfig::new(mu, ale.taps()).unwrap();
        cfg.record_squared_error = true;
        let (mut early, mut late) = (0.0, 0.0);
        for seed in 0..20 {
            let d = awgn_frame(-2.0, 500 + seed);
            let sq = lms_run(&d, &cfg, &ale).unwrap().per_sample_mse.unwrap();
            let start = ale.first_valid();
            early += sq[start..start + tenth].iter().sum::<f64>() / tenth as f64;
            late += sq[LEN - tenth..].iter().sum::<f64>() / tenth as f64;
        }
        assert!(late < early, "mu={mu}: first tenth {} last tenth {}", early / 20.0, late / 20.0);
    }
}

#[test]
fn swarm_cost_beats_lms_residual() {
    let ale = AleConfig::default();
    let lms = LmsConfig::new(0.01, ale.taps()).unwrap();
    for snr_db in [-2.0, 4.0, 10.0] {
        let (mut pso_total, mut lms_total) = (0.0, 0.0);
        for seed in 0..20 {
            let d = awgn_frame(snr_db, 900 + seed);
            let trace = lms_run(&d, &lms, &ale).unwrap();
            let valid = trace.run.valid_range.clone();
            lms_total += valid.clone().map(|n| trace.run.e[n].norm_sqr()).sum::<f64>() / valid.len() as f64;
            let cfg = PsoConfig { seed, ..PsoConfig::default() };
            pso_total += run_pso(&d, &cfg, &ale).unwrap().1.gbest_cost;
        }
        assert!(pso_total <= lms_total, "snr {snr_db}: PSO {pso_total} LMS {lms_total}");
    }
}
