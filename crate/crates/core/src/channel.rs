//! Channel impairments: memoryless cubic distortion, low-frequency interferer
//! tones and SNR-calibrated complex AWGN.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::signal::SymbolStream;

/// Additive complex exponential `amplitude * exp(j(2 pi f n + phase))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tone {
    pub amplitude: f64,
    /// Cycles per sample, strictly inside (0, 0.5).
    pub frequency: f64,
    pub phase: f64,
}

/// Receiver front-end nonlinearity for one carrier band.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearProfile {
    pub label: String,
    pub cubic_gain: f64,
    pub tones: Vec<Tone>,
}

impl NonlinearProfile {
    pub fn new(label: impl Into<String>, cubic_gain: f64, tones: Vec<Tone>) -> Result<Self> {
        let profile = Self { label: label.into(), cubic_gain, tones };
        profile.validate()?;
        Ok(profile)
    }

    /// The profile that leaves every sample untouched.
    pub fn identity() -> Self {
        Self { label: "identity".into(), cubic_gain: 0.0, tones: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cubic_gain.is_finite() && self.cubic_gain >= 0.0) {
            return invalid(format!("profile {}: cubic gain must be finite and >= 0", self.label));
        }
        for (i, t) in self.tones.iter().enumerate() {
            if !(t.amplitude.is_finite() && t.amplitude >= 0.0) {
                return invalid(format!("profile {}: tone {i} amplitude must be finite and >= 0", self.label));
            }
            if !(t.frequency > 0.0 && t.frequency < 0.5) {
                return invalid(format!(
                    "profile {}: tone {i} frequency {} outside (0, 0.5)",
                    self.label, t.frequency
                ));
            }
            if !t.phase.is_finite() {
                return invalid(format!("profile {}: tone {i} phase must be finite", self.label));
            }
        }
        Ok(())
    }

    /// Default impairment profiles for the three carrier bands.
    ///
    /// The carrier only changes which low-frequency spurs and how much cubic
    /// compression show up at baseband; the numbers are tunable defaults.
    pub fn band_defaults() -> Vec<Self> {
        let tone = |amplitude, frequency, phase| Tone { amplitude, frequency, phase };
        vec![
            Self {
                label: "60MHz".into(),
                cubic_gain: 0.05,
                tones: vec![tone(0.30, 0.010, 0.0), tone(0.20, 0.030, 1.0)],
            },
            Self {
                label: "2.4GHz".into(),
                cubic_gain: 0.10,
                tones: vec![tone(0.25, 0.020, 0.0), tone(0.15, 0.050, 0.5)],
            },
            Self {
                label: "5.8GHz".into(),
                cubic_gain: 0.15,
                tones: vec![tone(0.35, 0.015, 0.3), tone(0.20, 0.040, 1.2)],
            },
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    /// Signal power over noise power in dB. `f64::INFINITY` disables noise.
    pub snr_db: f64,
    pub nonlinear: Option<NonlinearProfile>,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn awgn(snr_db: f64, seed: u64) -> Self {
        Self { snr_db, nonlinear: None, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return invalid(format!("snr_db {} is not usable", self.snr_db));
        }
        if let Some(p) = &self.nonlinear {
            p.validate()?;
        }
        Ok(())
    }
}

/// Received samples together with the clean symbols that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyFrame {
    pub d: Vec<Complex64>,
    pub clean: SymbolStream,
}

impl NoisyFrame {
    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }
}

/// Noise variance giving `snr_db` against a signal of power `signal_power`.
pub fn noise_variance(signal_power: f64, snr_db: f64) -> f64 {
    signal_power / 10f64.powf(snr_db / 10.0)
}

pub fn add_awgn(x: &SymbolStream, snr_db: f64, seed: u64) -> Result<NoisyFrame> {
    let power = x.mean_power();
    if x.is_empty() || !(power.is_finite() && power > 0.0) {
        return invalid("AWGN needs a non-empty input with finite positive power");
    }
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return invalid(format!("snr_db {snr_db} is not usable"));
    }
    let variance = noise_variance(power, snr_db);
    if variance == 0.0 {
        return Ok(NoisyFrame { d: x.as_slice().to_vec(), clean: x.clone() });
    }
    let scale = (variance / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = x
        .as_slice()
        .iter()
        .map(|&s| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            s + Complex64::new(scale * re, scale * im)
        })
        .collect();
    Ok(NoisyFrame { d, clean: x.clone() })
}

pub fn apply_nonlinear(x: &SymbolStream, profile: &NonlinearProfile) -> Result<SymbolStream> {
    profile.validate()?;
    if profile.cubic_gain == 0.0 && profile.tones.is_empty() {
        return Ok(x.clone());
    }
    let a3 = profile.cubic_gain;
    let out = x
        .as_slice()
        .iter()
        .enumerate()
        .map(|(n, &s)| {
            let mut y = s + s * (a3 * s.norm_sqr());
            for t in &profile.tones {
                y += Complex64::from_polar(t.amplitude, TAU * t.frequency * n as f64 + t.phase);
            }
            y
        })
        .collect();
    Ok(SymbolStream::new(out))
}

/// Nonlinearity (if any) followed by AWGN calibrated on the distorted signal.
/// The returned frame keeps the undistorted symbols as its clean reference.
pub fn transmit(x: &SymbolStream, cfg: &ChannelConfig) -> Result<NoisyFrame> {
    cfg.validate()?;
    let distorted = match &cfg.nonlinear {
        Some(p) => apply_nonlinear(x, p)?,
        None => x.clone(),
    };
    let NoisyFrame { d, .. } = add_awgn(&distorted, cfg.snr_db, cfg.seed)?;
    Ok(NoisyFrame { d, clean: x.clone() })
}
