//! Bit generation, M-PSK mapping and hard-decision demodulation.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

/// A sequence of hard bits, each 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitStream(Vec<u8>);

impl BitStream {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return invalid(format!("bit {pos} has value {}, expected 0 or 1", bits[pos]));
        }
        Ok(Self(bits))
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }
}

/// Complex baseband samples at one sample per symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolStream(Vec<Complex64>);

impl SymbolStream {
    pub fn new(samples: Vec<Complex64>) -> Self {
        Self(samples)
    }

    pub fn from_real(samples: &[f64]) -> Self {
        Self(samples.iter().map(|&re| Complex64::new(re, 0.0)).collect())
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Mean of |x|² over the stream; zero for an empty stream.
    pub fn mean_power(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.0.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.0.len() as f64
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }
}

/// M-PSK constellation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModConfig {
    order: u32,
    phase_offset: f64,
}

impl Default for ModConfig {
    fn default() -> Self {
        Self { order: 2, phase_offset: 0.0 }
    }
}

impl ModConfig {
    pub fn new(order: u32, phase_offset: f64) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            return invalid(format!("constellation order {order} must be a power of two >= 2"));
        }
        if !(0.0..TAU).contains(&phase_offset) {
            return invalid(format!("phase offset {phase_offset} must lie in [0, 2pi)"));
        }
        Ok(Self { order, phase_offset })
    }

    pub fn bpsk() -> Self {
        Self::default()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn phase_offset(&self) -> f64 {
        self.phase_offset
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    /// Constellation point with index `m`.
    pub fn point(&self, m: u32) -> Complex64 {
        Complex64::from_polar(1.0, TAU * m as f64 / self.order as f64 + self.phase_offset)
    }

    /// Bit label (as an integer, MSB first) carried by point `m`.
    ///
    /// BPSK is antipodal with bit 1 on the zero-phase point; higher orders use
    /// the reflected binary Gray code so neighbouring points differ in one bit.
    pub fn label(&self, m: u32) -> u32 {
        if self.order == 2 {
            1 - m
        } else {
            m ^ (m >> 1)
        }
    }

    fn index_of_label(&self, label: u32) -> u32 {
        if self.order == 2 {
            return 1 - label;
        }
        let mut m = label;
        let mut shift = label >> 1;
        while shift != 0 {
            m ^= shift;
            shift >>= 1;
        }
        m
    }
}

/// Draws `count` independent fair bits from a ChaCha stream keyed by `seed`.
pub fn generate_bits(count: usize, seed: u64) -> Result<BitStream> {
    if count == 0 {
        return invalid("bit count must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(BitStream((0..count).map(|_| u8::from(rng.random::<bool>())).collect()))
}

pub fn modulate(bits: &BitStream, cfg: &ModConfig) -> Result<SymbolStream> {
    let k = cfg.bits_per_symbol();
    if !bits.len().is_multiple_of(k) {
        return invalid(format!(
            "{} bits cannot be split into {k}-bit groups for {}-PSK",
            bits.len(),
            cfg.order
        ));
    }
    let symbols = bits
        .as_slice()
        .chunks_exact(k)
        .map(|group| {
            let label = group.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
            cfg.point(cfg.index_of_label(label))
        })
        .collect();
    Ok(SymbolStream(symbols))
}

/// Minimum-distance hard decisions. Ties go to the lowest point index, which
/// for BPSK is the zero-phase point (bit 1).
pub fn demodulate(samples: &[Complex64], cfg: &ModConfig) -> Result<BitStream> {
    if samples.is_empty() {
        return invalid("cannot demodulate an empty stream");
    }
    let k = cfg.bits_per_symbol();
    let points: Vec<Complex64> = (0..cfg.order).map(|m| cfg.point(m)).collect();
    let mut bits = Vec::with_capacity(samples.len() * k);
    for s in samples {
        let mut best = 0u32;
        let mut best_dist = f64::INFINITY;
        for (m, p) in points.iter().enumerate() {
            let dist = (s - p).norm_sqr();
            if dist < best_dist {
                best_dist = dist;
                best = m as u32;
            }
        }
        let label = cfg.label(best);
        bits.extend((0..k).rev().map(|i| ((label >> i) & 1) as u8));
    }
    Ok(BitStream(bits))
}

/// Compares `tx[i]` with `rx[i + lag]` over the overlap and returns
/// `(compared, mismatched)`.
pub fn align_and_compare(tx: &BitStream, rx: &BitStream, lag: usize) -> Result<(usize, usize)> {
    if lag >= tx.len() || lag >= rx.len() {
        return invalid(format!(
            "lag {lag} leaves no overlap between streams of length {} and {}",
            tx.len(),
            rx.len()
        ));
    }
    let rx = &rx.as_slice()[lag..];
    let compared = tx.len().min(rx.len());
    let errors = tx.as_slice()[..compared]
        .iter()
        .zip(&rx[..compared])
        .filter(|(a, b)| a != b)
        .count();
    Ok((compared, errors))
}
