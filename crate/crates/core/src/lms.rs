//! Sample-by-sample LMS adaptation of the enhancer weights.
//!
//! For each sample in the valid range the output is formed with the current
//! weights, the error is taken against the received sample and the weights
//! move along the instantaneous gradient:
//!
//! ```text
//! w[n+1] = w[n] + mu * Re(e[n] * conj(v[n]))
//! ```
//!
//! For real signals the real projection is the plain `mu * e[n] * v[n]` update.

use num_complex::Complex64;

use crate::ale::{output_at, regressor, AleConfig, FilterRun, FilterWeights, Padding};
use crate::error::{invalid, Error, Result};

/// Any weight magnitude above this aborts the run as diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct LmsConfig {
    pub mu: f64,
    pub w0: FilterWeights,
    /// Keep `|e[n]|^2` for every sample in the trace.
    pub record_squared_error: bool,
}

impl LmsConfig {
    /// Zero initial weights for a filter with `taps` coefficients.
    pub fn new(mu: f64, taps: usize) -> Result<Self> {
        let cfg = Self { mu, w0: FilterWeights::zeros(taps), record_squared_error: false };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return invalid(format!("step size {} must be finite and non-negative", self.mu));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmsTrace {
    pub final_weights: FilterWeights,
    pub run: FilterRun,
    pub per_sample_mse: Option<Vec<f64>>,
}

/// One LMS update.
pub fn lms_step(w: &FilterWeights, e_n: Complex64, v_n: &[Complex64], mu: f64) -> Result<FilterWeights> {
    if w.len() != v_n.len() {
        return invalid(format!("{} weights but a regressor of length {}", w.len(), v_n.len()));
    }
    if !(mu.is_finite() && e_n.re.is_finite() && e_n.im.is_finite())
        || v_n.iter().any(|v| !(v.re.is_finite() && v.im.is_finite()))
    {
        return Err(Error::Numeric("non-finite input to the LMS update".into()));
    }
    let mut next = w.as_slice().to_vec();
    update_in_place(&mut next, e_n, v_n.iter().copied(), mu);
    FilterWeights::new(next)
}

#[inline]
fn update_in_place(w: &mut [f64], e: Complex64, v: impl Iterator<Item = Complex64>, mu: f64) {
    for (wk, vk) in w.iter_mut().zip(v) {
        // Re(e * conj(v))
        *wk += mu * (e.re * vk.re + e.im * vk.im);
    }
}

/// Adapts the weights across one frame, recording the output and error
/// sequences. Warm-up samples are filtered with the initial weights and do
/// not update them.
pub fn lms_run(d: &[Complex64], cfg: &LmsConfig, ale: &AleConfig) -> Result<LmsTrace> {
    cfg.validate()?;
    ale.check_frame(d.len())?;
    if cfg.w0.len() != ale.taps() {
        return invalid(format!("{} initial weights for a {}-tap filter", cfg.w0.len(), ale.taps()));
    }
    if let Some(i) = d.iter().position(|s| !(s.re.is_finite() && s.im.is_finite())) {
        return Err(Error::Numeric(format!("received sample {i} is not finite")));
    }

    let mut w = cfg.w0.as_slice().to_vec();
    let mut y = Vec::with_capacity(d.len());
    let mut e = Vec::with_capacity(d.len());
    let valid = ale.valid_range(d.len());
    let delta = ale.delta();

    for n in 0..valid.start {
        let yn = output_at(d, n, &w, delta);
        y.push(yn);
        e.push(d[n] - yn);
    }
    for n in valid.clone() {
        let yn = output_at(d, n, &w, delta);
        let en = d[n] - yn;
        y.push(yn);
        e.push(en);
        let newest = n - delta;
        let taps = w.len();
        update_in_place(&mut w, en, (0..taps).map(|k| d[newest - k]), cfg.mu);
        if w.iter().any(|x| !(x.abs() <= DIVERGENCE_THRESHOLD)) {
            return Err(Error::Diverged { index: n, threshold: DIVERGENCE_THRESHOLD });
        }
    }

    let per_sample_mse = cfg
        .record_squared_error
        .then(|| e.iter().map(|x| x.norm_sqr()).collect());
    Ok(LmsTrace {
        final_weights: FilterWeights::new(w)?,
        run: FilterRun { y, e, valid_range: valid },
        per_sample_mse,
    })
}

/// Regressor-level reference for a single update, used by tests that check
/// the fast loop against [`lms_step`].
#[doc(hidden)]
pub fn lms_step_at(d: &[Complex64], n: usize, w: &FilterWeights, mu: f64, ale: &AleConfig) -> Result<FilterWeights> {
    let v = regressor(d, n, ale, Padding::None)?;
    let y: Complex64 = w.as_slice().iter().zip(&v).map(|(wk, vk)| vk * *wk).sum();
    lms_step(w, d[n] - y, &v, mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn zero_error_or_zero_step_keeps_weights() {
        let w = FilterWeights::new(vec![0.2, -0.4]).unwrap();
        let v = [c(1.0), c(-2.0)];
        assert_eq!(lms_step(&w, c(0.0), &v, 0.3).unwrap(), w);
        assert_eq!(lms_step(&w, c(1.7), &v, 0.0).unwrap(), w);
    }

    #[test]
    fn single_term_update() {
        let w = FilterWeights::zeros(2);
        let next = lms_step(&w, c(1.0), &[c(1.0), c(0.0)], 0.1).unwrap();
        assert_eq!(next.as_slice(), &[0.1, 0.0]);
    }

    #[test]
    fn step_rejects_bad_input() {
        let w = FilterWeights::zeros(2);
        assert!(matches!(lms_step(&w, c(f64::NAN), &[c(1.0), c(0.0)], 0.1), Err(Error::Numeric(_))));
        assert!(matches!(lms_step(&w, c(1.0), &[c(1.0)], 0.1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn no_adaptation_at_zero_step() {
        let d: Vec<Complex64> = (0..40).map(|n| c(((n * 7) % 5) as f64 - 2.0)).collect();
        let ale = AleConfig::new(3, 1).unwrap();
        let cfg = LmsConfig::new(0.0, 3).unwrap();
        let trace = lms_run(&d, &cfg, &ale).unwrap();
        assert_eq!(trace.final_weights, FilterWeights::zeros(3));
        assert_eq!(trace.run.e, d);
    }

    #[test]
    fn loop_matches_single_steps() {
        let d: Vec<Complex64> = (0..30)
            .map(|n| Complex64::new((n as f64 * 0.7).sin(), (n as f64 * 0.3).cos()))
            .collect();
        let ale = AleConfig::new(4, 2).unwrap();
        let mut cfg = LmsConfig::new(0.05, 4).unwrap();
        cfg.record_squared_error = true;
        let trace = lms_run(&d, &cfg, &ale).unwrap();
        let mut w = cfg.w0.clone();
        for n in ale.valid_range(d.len()) {
            w = lms_step_at(&d, n, &w, cfg.mu, &ale).unwrap();
        }
        for (a, b) in w.as_slice().iter().zip(trace.final_weights.as_slice()) {
            assert!((a - b).abs() < 1e-14);
        }
        let sq = trace.per_sample_mse.unwrap();
        assert_eq!(sq.len(), d.len());
    }

    #[test]
    fn huge_step_diverges() {
        let d: Vec<Complex64> = (0..2000).map(|n| c(if (n * 37 + 11) % 7 < 3 { 1.0 } else { -1.0 })).collect();
        let ale = AleConfig::new(5, 1).unwrap();
        let cfg = LmsConfig::new(10.0, 5).unwrap();
        assert!(matches!(lms_run(&d, &cfg, &ale), Err(Error::Diverged { .. })));
    }

    #[test]
    fn negative_step_rejected() {
        assert!(LmsConfig::new(-0.1, 3).is_err());
        assert!(LmsConfig::new(f64::INFINITY, 3).is_err());
    }
}
