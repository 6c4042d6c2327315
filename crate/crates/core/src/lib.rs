//! Adaptive noise cancellation for a simulated M-PSK link.
//!
//! The received samples pass through an adaptive line enhancer (ALE): a
//! delayed copy of the input feeds an FIR predictor whose real weights are
//! tuned either sample by sample with LMS or globally with a particle swarm
//! minimizing the mean squared residual over the whole frame.
//!
//! ```text
//! bits -> modulate -> channel (nonlinearity + AWGN) -> ALE(LMS | PSO) -> demodulate -> BER / MSE
//! ```

pub mod ale;
pub mod channel;
pub mod error;
pub mod lms;
pub mod metrics;
pub mod pso;
pub mod signal;

pub use num_complex::Complex64;

pub use ale::{filter_frame, regressor, AleConfig, FilterRun, FilterWeights, Padding};
pub use channel::{
    add_awgn, apply_nonlinear, transmit, ChannelConfig, NoisyFrame, NonlinearProfile, Tone,
};
pub use error::{Error, Result};
pub use lms::{lms_run, lms_step, LmsConfig, LmsTrace, DIVERGENCE_THRESHOLD};
pub use metrics::{ber, mse, Algorithm, MetricRecord};
pub use pso::{
    evaluate_cost, init_swarm, run_pso, update_position, update_velocity, AleObjective, CostEval,
    Objective, Particle, PsoConfig, SwarmState,
};
pub use signal::{align_and_compare, demodulate, generate_bits, modulate, BitStream, ModConfig, SymbolStream};
