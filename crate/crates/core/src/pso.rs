//! Particle swarm search for enhancer weights.
//!
//! Each particle's position is a candidate weight vector. Velocities follow
//! the inertia-free form
//!
//! ```text
//! v <- inertia * v + c1 * r1 * (pbest - w) + c2 * r2 * (gbest - w)
//! w <- w + v
//! ```
//!
//! with `inertia = 1` by default and every velocity component clamped to
//! `[-v_max, v_max]`. Positions are never clamped.
//!
//! All random numbers of an iteration are drawn in one sequential pass before
//! any cost is evaluated, so results do not depend on whether evaluations run
//! serially or on the rayon pool.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ale::{output_at, AleConfig, FilterWeights};
use crate::error::{invalid, Error, Result};

/// A cost surface over real vectors of fixed dimension.
pub trait Objective: Sync {
    fn dim(&self) -> usize;
    fn cost(&self, w: &[f64]) -> Result<f64>;
}

/// Mean squared residual of the enhancer with fixed weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEval {
    pub cost: f64,
    /// Number of samples averaged (the valid range).
    pub samples: usize,
}

/// Filters the whole frame with fixed `w` and averages `|e[n]|^2` over the
/// valid range.
pub fn evaluate_cost(w: &FilterWeights, d: &[Complex64], ale: &AleConfig) -> Result<CostEval> {
    ale.check_frame(d.len())?;
    if w.len() != ale.taps() {
        return invalid(format!("{} weights supplied for a {}-tap filter", w.len(), ale.taps()));
    }
    Ok(residual_power(d, w.as_slice(), ale))
}

fn residual_power(d: &[Complex64], w: &[f64], ale: &AleConfig) -> CostEval {
    let range = ale.valid_range(d.len());
    let samples = range.len();
    let mut sum = 0.0;
    for n in range {
        let e = d[n] - output_at(d, n, w, ale.delta());
        sum += e.norm_sqr();
    }
    CostEval { cost: sum / samples as f64, samples }
}

/// The enhancer cost over one received frame.
#[derive(Debug, Clone, Copy)]
pub struct AleObjective<'a> {
    d: &'a [Complex64],
    ale: AleConfig,
}

impl<'a> AleObjective<'a> {
    pub fn new(d: &'a [Complex64], ale: AleConfig) -> Result<Self> {
        ale.check_frame(d.len())?;
        Ok(Self { d, ale })
    }
}

impl Objective for AleObjective<'_> {
    fn dim(&self) -> usize {
        self.ale.taps()
    }

    fn cost(&self, w: &[f64]) -> Result<f64> {
        if w.len() != self.ale.taps() {
            return invalid(format!("{} weights supplied for a {}-tap filter", w.len(), self.ale.taps()));
        }
        Ok(residual_power(self.d, w, &self.ale).cost)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoConfig {
    pub n_particles: usize,
    pub c1: f64,
    pub c2: f64,
    /// Weight on the previous velocity; 1 reproduces the plain update.
    pub inertia: f64,
    pub max_iters: usize,
    /// Minimum gbest improvement that counts as progress.
    pub tol: f64,
    /// Stop after this many consecutive iterations without progress; 0 never stops early.
    pub patience: usize,
    pub init_range: f64,
    pub v_max: f64,
    /// Draw r1, r2 per component instead of once per particle.
    pub per_component_random: bool,
    pub seed: u64,
    /// Evaluate particle costs on the rayon pool.
    pub parallel: bool,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            n_particles: 60,
            c1: 2.0,
            c2: 2.0,
            inertia: 1.0,
            max_iters: 60,
            tol: 1e-4,
            patience: 5,
            init_range: 2.0,
            v_max: 1.0,
            per_component_random: false,
            seed: 0,
            parallel: true,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return invalid("swarm needs at least one particle");
        }
        if self.max_iters == 0 {
            return invalid("max_iters must be at least 1");
        }
        for (name, v) in [("c1", self.c1), ("c2", self.c2), ("tol", self.tol), ("inertia", self.inertia)] {
            if !(v.is_finite() && v >= 0.0) {
                return invalid(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        for (name, v) in [("init_range", self.init_range), ("v_max", self.v_max)] {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub pbest_position: Vec<f64>,
    pub pbest_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    pub particles: Vec<Particle>,
    pub gbest_position: Vec<f64>,
    pub gbest_cost: f64,
    /// gbest cost after each iteration; entry 0 is the initial swarm.
    pub history: Vec<f64>,
}

impl SwarmState {
    fn refresh_gbest(&mut self) {
        let mut best = 0;
        for (i, p) in self.particles.iter().enumerate().skip(1) {
            if p.pbest_cost < self.particles[best].pbest_cost {
                best = i;
            }
        }
        let candidate = &self.particles[best];
        if candidate.pbest_cost < self.gbest_cost || self.gbest_cost.is_nan() {
            self.gbest_cost = candidate.pbest_cost;
            self.gbest_position.clone_from(&candidate.pbest_position);
        }
    }
}

fn evaluate_all<O: Objective>(objective: &O, positions: &[&[f64]], parallel: bool) -> Result<Vec<f64>> {
    let results: Vec<Result<f64>> = if parallel {
        positions.par_iter().map(|w| objective.cost(w)).collect()
    } else {
        positions.iter().map(|w| objective.cost(w)).collect()
    };
    results.into_iter().collect()
}

/// Uniform positions in `[-init_range, init_range]^dim`, zero velocities.
pub fn init_swarm<O: Objective, R: Rng>(cfg: &PsoConfig, objective: &O, rng: &mut R) -> Result<SwarmState> {
    cfg.validate()?;
    let dim = objective.dim();
    if dim == 0 {
        return invalid("objective has zero dimensions");
    }
    let positions: Vec<Vec<f64>> = (0..cfg.n_particles)
        .map(|_| (0..dim).map(|_| rng.random_range(-cfg.init_range..=cfg.init_range)).collect())
        .collect();
    let refs: Vec<&[f64]> = positions.iter().map(Vec::as_slice).collect();
    let costs = evaluate_all(objective, &refs, cfg.parallel)?;
    let particles: Vec<Particle> = positions
        .into_iter()
        .zip(costs)
        .map(|(position, cost)| Particle {
            velocity: vec![0.0; dim],
            pbest_position: position.clone(),
            position,
            pbest_cost: cost,
        })
        .collect();
    let mut state = SwarmState {
        gbest_position: particles[0].pbest_position.clone(),
        gbest_cost: particles[0].pbest_cost,
        particles,
        history: Vec::new(),
    };
    state.refresh_gbest();
    state.history.push(state.gbest_cost);
    Ok(state)
}

/// Velocity update with one `r1`, `r2` pair shared by every component.
pub fn update_velocity(p: &Particle, gbest: &[f64], cfg: &PsoConfig, r1: f64, r2: f64) -> Vec<f64> {
    let dim = p.position.len();
    update_velocity_per_component(p, gbest, cfg, &vec![r1; dim], &vec![r2; dim])
}

pub fn update_velocity_per_component(p: &Particle, gbest: &[f64], cfg: &PsoConfig, r1: &[f64], r2: &[f64]) -> Vec<f64> {
    (0..p.position.len())
        .map(|k| {
            let w = p.position[k];
            let v = cfg.inertia * p.velocity[k]
                + cfg.c1 * r1[k] * (p.pbest_position[k] - w)
                + cfg.c2 * r2[k] * (gbest[k] - w);
            v.clamp(-cfg.v_max, cfg.v_max)
        })
        .collect()
}

pub fn update_position(p: &Particle, v_new: &[f64]) -> Vec<f64> {
    p.position.iter().zip(v_new).map(|(w, v)| w + v).collect()
}

/// Runs the swarm until `max_iters` iterations (counting initialization) or
/// until `patience` consecutive iterations improve gbest by less than `tol`.
pub fn minimize<O: Objective>(objective: &O, cfg: &PsoConfig) -> Result<SwarmState> {
    let mut rng = cfg.rng();
    let mut state = init_swarm(cfg, objective, &mut rng)?;
    let dim = objective.dim();
    let mut stalled = 0;

    for _ in 1..cfg.max_iters {
        let draws: Vec<(Vec<f64>, Vec<f64>)> = (0..cfg.n_particles)
            .map(|_| {
                if cfg.per_component_random {
                    let r1 = (0..dim).map(|_| rng.random::<f64>()).collect();
                    let r2 = (0..dim).map(|_| rng.random::<f64>()).collect();
                    (r1, r2)
                } else {
                    let r1: f64 = rng.random();
                    let r2: f64 = rng.random();
                    (vec![r1; dim], vec![r2; dim])
                }
            })
            .collect();

        for (p, (r1, r2)) in state.particles.iter_mut().zip(&draws) {
            let v = update_velocity_per_component(p, &state.gbest_position, cfg, r1, r2);
            p.position = update_position(p, &v);
            p.velocity = v;
        }

        let refs: Vec<&[f64]> = state.particles.iter().map(|p| p.position.as_slice()).collect();
        let costs = evaluate_all(objective, &refs, cfg.parallel)?;
        for (p, c) in state.particles.iter_mut().zip(costs) {
            if c < p.pbest_cost {
                p.pbest_cost = c;
                p.pbest_position.clone_from(&p.position);
            }
        }

        let previous = state.gbest_cost;
        state.refresh_gbest();
        state.history.push(state.gbest_cost);

        if previous - state.gbest_cost < cfg.tol {
            stalled += 1;
        } else {
            stalled = 0;
        }
        if cfg.patience > 0 && stalled >= cfg.patience {
            break;
        }
    }
    if !state.gbest_cost.is_finite() {
        return Err(Error::Numeric("swarm never found a finite cost".into()));
    }
    Ok(state)
}

/// Searches enhancer weights for one received frame.
pub fn run_pso(d: &[Complex64], cfg: &PsoConfig, ale: &AleConfig) -> Result<(FilterWeights, SwarmState)> {
    let objective = AleObjective::new(d, *ale)?;
    let state = minimize(&objective, cfg)?;
    Ok((FilterWeights::new(state.gbest_position.clone())?, state))
}
