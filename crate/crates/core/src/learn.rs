//! Local Hebbian learning and the streaming training loop.
//!
//! The weight update is an outer product of locally available quantities:
//!
//! ```text
//! Δθ_l = lr · ε_l f(x_{l+1})ᵀ
//! ```
//!
//! where ε_l is the interneuron error unit. Because the interneurons sample
//! the model's own conditional, ε already carries the −A′(η) "negative"
//! statistics — there is no separate negative phase. With exact A′
//! substituted for ε, the update direction equals −∇_θ energy (checked
//! against finite differences in the tests). The top prior learns by the
//! same rule with f ≡ 1: Δη_top = lr·(φ(x_L) − A′(η_top)).
//!
//! Training runs clamped-observation inference chains over the data stream.
//! `EndOfInference` (default) runs a fresh chain per example and applies one
//! averaged update per batch; `Online` is the coupled-dynamics reading,
//! updating after every sampler step, one example at a time.

use crate::error::{HeeError, Result};
use crate::expfam::{self, QuadratureGrid};
use crate::model::{self, ModelSpec, NetworkState, Params};
use crate::rng::{self, Domain};
use crate::sampler::{self, Method, Mode, SamplerConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    /// Run `inference_steps`, then one update from the final state.
    EndOfInference,
    /// Update after every sampler step (examples processed sequentially).
    Online,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Learning rate (dt/τ_θ). Decays linearly to `lr_final`.
    pub lr: f64,
    pub lr_final: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Outer sampler steps per example before (or while) updating.
    pub inference_steps: u64,
    pub update_mode: UpdateMode,
    pub sampler: SamplerConfig,
    /// Evaluate the held-out diagnostic every this many updates.
    pub eval_every: u64,
    pub seed: u64,
    /// Learn η_top by the top-layer rule (freeze with false).
    pub learn_eta_top: bool,
    /// Divergence guard: stop once held-out energy exceeds
    /// E₀ + (factor − 1)·max(|E₀|, 1).
    pub divergence_factor: f64,
    /// Fraction of the dataset held out for the diagnostic.
    pub heldout_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.01,
            lr_final: 0.001,
            epochs: 10,
            batch_size: 32,
            inference_steps: 40,
            update_mode: UpdateMode::EndOfInference,
            sampler: SamplerConfig::default(),
            eval_every: 50,
            seed: 0,
            learn_eta_top: true,
            divergence_factor: 10.0,
            heldout_fraction: 0.125,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(HeeError::InvalidConfig(format!("train.lr must be >= 0, got {}", self.lr)));
        }
        if self.inference_steps == 0 {
            return Err(HeeError::InvalidConfig("train.inference_steps must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(HeeError::InvalidConfig("train.batch_size must be >= 1".into()));
        }
        if !(0.0..0.9).contains(&self.heldout_fraction) {
            return Err(HeeError::InvalidConfig(format!(
                "train.heldout_fraction must be in [0, 0.9), got {}",
                self.heldout_fraction
            )));
        }
        if self.divergence_factor <= 1.0 {
            return Err(HeeError::InvalidConfig("train.divergence_factor must be > 1".into()));
        }
        self.sampler.validate()
    }
}

/// Hebbian update direction from the current state: ε_l f(x_{l+1})ᵀ per
/// weight matrix, φ(x_L) − A′(η_top) for the top prior. The θ_l component
/// reads nothing outside {ε_l, x_{l+1}}.
pub fn hebbian_delta(
    spec: &ModelSpec,
    params: &Params,
    state: &NetworkState,
    grid: &QuadratureGrid,
    learn_eta_top: bool,
) -> Result<Params> {
    let mut delta = Params::zeros(spec);
    for l in 0..spec.depth() {
        let fx: Vec<f64> = state.x[l + 1].iter().map(|&v| spec.activation.f(v)).collect();
        delta.theta[l].add_outer(1.0, &state.eps[l], &fx);
    }
    if learn_eta_top {
        let depth = spec.depth();
        let fam = spec.families[depth];
        for i in 0..spec.sizes[depth] {
            let a_prime = expfam::mean_suff_stat(fam, params.eta_top[i], grid)?;
            delta.eta_top[i] = fam.phi(state.x[depth][i]) - a_prime;
        }
    }
    Ok(delta)
}

/// θ_l += lr·ε_l f(x_{l+1})ᵀ (and the η_top analogue) in place.
pub fn hebbian_update(
    spec: &ModelSpec,
    params: &mut Params,
    state: &NetworkState,
    lr: f64,
    grid: &QuadratureGrid,
    learn_eta_top: bool,
) -> Result<()> {
    let delta = hebbian_delta(spec, params, state, grid, learn_eta_top)?;
    params.add_scaled(lr, &delta);
    Ok(())
}

#[derive(Debug, Clone)]
pub struct LogRow {
    pub step: u64,
    pub heldout_energy: f64,
    pub lr: f64,
    pub wallclock_s: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TrainingLog {
    pub rows: Vec<LogRow>,
}

impl TrainingLog {
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut out = String::from("step,heldout_energy,lr,wallclock_s\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{:.3}\n", r.step, r.heldout_energy, r.lr, r.wallclock_s));
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// At most this many held-out rows enter the diagnostic (keeps the eval
/// cost bounded on large datasets).
const EVAL_MAX_ROWS: usize = 128;

/// Mean exact energy over held-out examples at posterior states inferred by
/// short fixed-seed chains. Fixed seeds make consecutive evaluations differ
/// only through the parameters.
fn heldout_energy(
    spec: &ModelSpec,
    params: &Params,
    heldout: &[Vec<f64>],
    config: &TrainConfig,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let rows = &heldout[..heldout.len().min(EVAL_MAX_ROWS)];
    let energies: Vec<Result<f64>> = rows
        .par_iter()
        .enumerate()
        .map(|(i, x0)| {
            let mut rng = rng::stream(config.seed, Domain::Init, i as u64);
            let mut state = NetworkState::clamped(spec, x0)?;
            for _ in 0..config.inference_steps {
                step_once(spec, params, &mut state, &config.sampler, &mut rng)?;
            }
            model::energy(spec, params, &state.x, grid)
        })
        .collect();
    let mut total = 0.0;
    for e in energies {
        total += e?;
    }
    Ok(total / rows.len() as f64)
}

fn step_once(
    spec: &ModelSpec,
    params: &Params,
    state: &mut NetworkState,
    sampler_config: &SamplerConfig,
    rng: &mut rng::Rng,
) -> Result<()> {
    match sampler_config.method {
        Method::Ls => sampler::ls_step(spec, params, state, sampler_config, rng, Mode::Inference),
        Method::Sld => sampler::sld_step(spec, params, state, sampler_config, rng, Mode::Inference),
    }
}

/// Streaming training: clamped-observation inference chains provide
/// posterior samples, Hebbian updates accumulate the KL gradient. Returns
/// the trained parameters and the diagnostic log. Deterministic given
/// `config.seed` (data order and all chains are seeded streams).
pub fn train(
    spec: &ModelSpec,
    params0: &Params,
    dataset: &[Vec<f64>],
    config: &TrainConfig,
) -> Result<(Params, TrainingLog)> {
    config.validate()?;
    params0.validate(spec)?;
    if dataset.is_empty() {
        return Err(HeeError::InvalidConfig("train: empty dataset".into()));
    }
    for (i, row) in dataset.iter().enumerate() {
        if row.len() != spec.sizes[0] {
            return Err(HeeError::ShapeMismatch(format!(
                "dataset row {i} has {} values, layer 0 has {} units",
                row.len(),
                spec.sizes[0]
            )));
        }
    }

    let start = Instant::now();
    let grid = QuadratureGrid::default();

    // shuffle once, then split off the held-out tail
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    {
        use rand::seq::SliceRandom;
        let mut data_rng = rng::stream(config.seed, Domain::Data, 0);
        order.shuffle(&mut data_rng);
    }
    let n_heldout = ((dataset.len() as f64 * config.heldout_fraction).round() as usize)
        .min(dataset.len().saturating_sub(1));
    let (train_idx, heldout_idx) = order.split_at(dataset.len() - n_heldout);
    let heldout: Vec<Vec<f64>> = heldout_idx.iter().map(|&i| dataset[i].clone()).collect();
    let heldout_ref: &[Vec<f64>] = if heldout.is_empty() { dataset } else { &heldout };

    let mut params = params0.clone();
    let mut log = TrainingLog::default();

    let e0 = heldout_energy(spec, &params, heldout_ref, config, &grid)?;
    let guard = e0 + (config.divergence_factor - 1.0) * e0.abs().max(1.0);
    log.rows.push(LogRow { step: 0, heldout_energy: e0, lr: config.lr, wallclock_s: 0.0 });

    let n_batches = train_idx.len().div_ceil(config.batch_size);
    let total_updates = (config.epochs * n_batches).max(1) as u64;
    let lr_at = |update: u64| {
        if total_updates <= 1 {
            config.lr
        } else {
            let t = update as f64 / (total_updates - 1) as f64;
            config.lr + (config.lr_final - config.lr) * t
        }
    };

    let mut update: u64 = 0;
    for epoch in 0..config.epochs {
        let mut epoch_order: Vec<usize> = train_idx.to_vec();
        {
            use rand::seq::SliceRandom;
            let mut rng = rng::stream(config.seed, Domain::Data, 1 + epoch as u64);
            epoch_order.shuffle(&mut rng);
        }
        for batch in epoch_order.chunks(config.batch_size) {
            let lr = lr_at(update);
            match config.update_mode {
                UpdateMode::EndOfInference => {
                    let base_stream = update * config.batch_size as u64;
                    let deltas: Vec<Result<Params>> = batch
                        .par_iter()
                        .enumerate()
                        .map(|(k, &row)| {
                            let mut rng =
                                rng::stream(config.seed, Domain::Chain, base_stream + k as u64);
                            let mut state = NetworkState::clamped(spec, &dataset[row])?;
                            for _ in 0..config.inference_steps {
                                step_once(spec, &params, &mut state, &config.sampler, &mut rng)?;
                            }
                            hebbian_delta(spec, &params, &state, &grid, config.learn_eta_top)
                        })
                        .collect();
                    let mut sum = Params::zeros(spec);
                    for d in deltas {
                        sum.add_scaled(1.0, &d?);
                    }
                    params.add_scaled(lr / batch.len() as f64, &sum);
                }
                UpdateMode::Online => {
                    for (k, &row) in batch.iter().enumerate() {
                        let mut rng = rng::stream(
                            config.seed,
                            Domain::Chain,
                            update * config.batch_size as u64 + k as u64,
                        );
                        let mut state = NetworkState::clamped(spec, &dataset[row])?;
                        for _ in 0..config.inference_steps {
                            step_once(spec, &params, &mut state, &config.sampler, &mut rng)?;
                            hebbian_update(spec, &mut params, &state, lr, &grid, config.learn_eta_top)?;
                        }
                    }
                }
            }
            update += 1;

            if update % config.eval_every == 0 || update == total_updates {
                let e = heldout_energy(spec, &params, heldout_ref, config, &grid)?;
                log.rows.push(LogRow {
                    step: update,
                    heldout_energy: e,
                    lr,
                    wallclock_s: start.elapsed().as_secs_f64(),
                });
                if e > guard {
                    return Err(HeeError::Diverged { initial: e0, current: e, threshold: guard });
                }
            }
        }
    }
    Ok((params, log))
}
