//! Bit error rate and mean squared residual.

use std::fmt;
use std::ops::Range;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::signal::{align_and_compare, BitStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Lms,
    Pso,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Lms => "LMS",
            Algorithm::Pso => "PSO",
        })
    }
}

/// Metrics from one adapted frame plus the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub snr_db: f64,
    pub algorithm: Algorithm,
    pub ber: f64,
    pub mse: f64,
    pub compared_bits: usize,
    pub error_bits: usize,
    /// Mean |clean - decision signal|^2. Diagnostic only, not the residual MSE.
    pub clean_mse: f64,
    pub params: Vec<(String, String)>,
}

impl MetricRecord {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.ber) {
            return invalid(format!("BER {} outside [0, 1]", self.ber));
        }
        if !(self.mse >= 0.0) {
            return invalid(format!("MSE {} is negative or NaN", self.mse));
        }
        Ok(())
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Corrupted bits over compared bits after shifting `rx` by `lag`.
pub fn ber(tx: &BitStream, rx: &BitStream, lag: usize) -> Result<f64> {
    let (compared, errors) = align_and_compare(tx, rx, lag)?;
    if compared == 0 {
        return invalid("no overlapping bits to compare");
    }
    Ok(errors as f64 / compared as f64)
}

/// Mean of `|d[n] - y[n]|^2` over `valid`.
pub fn mse(d: &[Complex64], y: &[Complex64], valid: Range<usize>) -> Result<f64> {
    if d.len() != y.len() {
        return invalid(format!("length mismatch: {} noisy samples, {} outputs", d.len(), y.len()));
    }
    if valid.is_empty() || valid.end > d.len() {
        return invalid(format!("window {valid:?} is empty or exceeds {} samples", d.len()));
    }
    let n = valid.len();
    let sum: f64 = valid.map(|i| (d[i] - y[i]).norm_sqr()).sum();
    Ok(sum / n as f64)
}
