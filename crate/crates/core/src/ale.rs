//! Adaptive line enhancer structure: a delay of `delta` samples followed by
//! an `taps`-long FIR predictor with real coefficients.
//!
//! ```text
//! y[n] = sum_k w[k] * d[n - delta - k]      k = 0..taps
//! e[n] = d[n] - y[n]
//! ```
//!
//! Samples with `n < delta + taps - 1` need inputs from before the frame.
//! Those are zero-padded and kept out of every cost or metric window.

use std::ops::Range;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AleConfig {
    taps: usize,
    delta: usize,
}

impl Default for AleConfig {
    fn default() -> Self {
        Self { taps: 5, delta: 1 }
    }
}

impl AleConfig {
    pub fn new(taps: usize, delta: usize) -> Result<Self> {
        if taps == 0 {
            return invalid("filter order L must be at least 1");
        }
        if delta == 0 {
            return invalid("decorrelation delay must be at least 1 sample");
        }
        Ok(Self { taps, delta })
    }

    /// Filter order `L`.
    pub fn taps(&self) -> usize {
        self.taps
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    /// First index whose regressor lies entirely inside the frame.
    pub fn first_valid(&self) -> usize {
        self.delta + self.taps - 1
    }

    pub fn valid_range(&self, len: usize) -> Range<usize> {
        self.first_valid().min(len)..len
    }

    pub(crate) fn check_frame(&self, len: usize) -> Result<()> {
        if len <= self.delta + self.taps {
            return invalid(format!(
                "frame of {len} samples is too short for L={} and delta={}",
                self.taps, self.delta
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterWeights(Vec<f64>);

impl FilterWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return invalid("weight vector is empty");
        }
        if let Some(i) = w.iter().position(|x| !x.is_finite()) {
            return Err(Error::Numeric(format!("weight {i} is not finite")));
        }
        Ok(Self(w))
    }

    pub fn zeros(taps: usize) -> Self {
        Self(vec![0.0; taps])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Output and error of one pass over a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterRun {
    pub y: Vec<Complex64>,
    pub e: Vec<Complex64>,
    pub valid_range: Range<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    /// Reject indices whose regressor would reach before the frame start.
    None,
    /// Treat samples before the frame start as zero.
    Zero,
}

/// `[d[n-delta], d[n-delta-1], ..., d[n-delta-L+1]]`.
pub fn regressor(d: &[Complex64], n: usize, cfg: &AleConfig, padding: Padding) -> Result<Vec<Complex64>> {
    if n >= d.len() {
        return invalid(format!("index {n} outside a frame of {} samples", d.len()));
    }
    if padding == Padding::None && n < cfg.first_valid() {
        return invalid(format!(
            "index {n} needs samples before the frame start (first valid index is {})",
            cfg.first_valid()
        ));
    }
    Ok((0..cfg.taps)
        .map(|k| match n.checked_sub(cfg.delta + k) {
            Some(i) => d[i],
            None => Complex64::new(0.0, 0.0),
        })
        .collect())
}

/// Output for index `n`; taps that would index before the frame contribute zero.
#[inline]
pub(crate) fn output_at(d: &[Complex64], n: usize, w: &[f64], delta: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    if n < delta {
        return acc;
    }
    let newest = n - delta;
    for (k, &wk) in w.iter().enumerate().take(newest + 1) {
        let s = d[newest - k];
        acc.re += wk * s.re;
        acc.im += wk * s.im;
    }
    acc
}

/// Runs the enhancer with fixed weights over the whole frame.
pub fn filter_frame(d: &[Complex64], w: &FilterWeights, cfg: &AleConfig) -> Result<FilterRun> {
    cfg.check_frame(d.len())?;
    if w.len() != cfg.taps {
        return invalid(format!("{} weights supplied for a {}-tap filter", w.len(), cfg.taps));
    }
    let w = w.as_slice();
    let y: Vec<Complex64> = (0..d.len()).map(|n| output_at(d, n, w, cfg.delta)).collect();
    let e = d.iter().zip(&y).map(|(d, y)| d - y).collect();
    Ok(FilterRun { y, e, valid_range: cfg.valid_range(d.len()) })
}
