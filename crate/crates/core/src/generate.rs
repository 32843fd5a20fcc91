//! Producing observations from a trained model.
//!
//! Three routes, all targeting (approximately or exactly) the model's own
//! marginal p_θ(x_0):
//!
//! - joint generation: one chain over (x_0, latents) with the inference
//!   dynamic on the latents — targets the joint, so x_0 marginally follows
//!   p_θ(x_0), but mixing pays for the full joint search space;
//! - marginal generation: latents follow the prior dynamic only. Either
//!   simultaneously with x_0, or staged (draw latents, freeze them, then
//!   run the x_0 conditional chain);
//! - ancestral oracle: exact top-down per-unit inverse-CDF sampling, valid
//!   because the conditionals factorize. This is the gold standard the
//!   Langevin routes are tested against.

use crate::error::Result;
use crate::model::{self, ModelSpec, NetworkState, Params};
use crate::rng::{self, Domain, Rng};
use crate::sampler::{self, Mode, SamplerConfig};
use crate::{analyze, expfam};
use rayon::prelude::*;

/// How chain-based generation harvests samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Harvest {
    /// One long chain, thinned. `None` thins at 10× a pilot-run IACT
    /// estimate (clamped to [1, 1000]); `Some(k)` pins the interval.
    Thinned(Option<u64>),
    /// Many short chains, one sample each (burn-in steps per chain).
    ShortChains,
}

/// Exact i.i.d. joint samples x_{0:L}, top-down.
pub fn ancestral_oracle(
    spec: &ModelSpec,
    params: &Params,
    n_samples: usize,
    rng: &mut Rng,
) -> Result<Vec<Vec<Vec<f64>>>> {
    params.validate(spec)?;
    let depth = spec.depth();
    let mut out = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let mut layers: Vec<Vec<f64>> = vec![Vec::new(); depth + 1];
        let fam_top = spec.families[depth];
        layers[depth] = params
            .eta_top
            .iter()
            .map(|&eta| expfam::sample_conditional_scalar(fam_top, eta, rng))
            .collect::<Result<_>>()?;
        for l in (0..depth).rev() {
            let eta = model::natural_params(spec, params, &layers[l + 1], l)?;
            let fam = spec.families[l];
            layers[l] = eta
                .iter()
                .map(|&e| expfam::sample_conditional_scalar(fam, e, rng))
                .collect::<Result<_>>()?;
        }
        out.push(layers);
    }
    Ok(out)
}

/// Ancestral x_0 samples only.
pub fn ancestral_x0(spec: &ModelSpec, params: &Params, n_samples: usize, rng: &mut Rng) -> Result<Vec<Vec<f64>>> {
    Ok(ancestral_oracle(spec, params, n_samples, rng)?
        .into_iter()
        .map(|mut layers| layers.swap_remove(0))
        .collect())
}

fn auto_thin(
    spec: &ModelSpec,
    params: &Params,
    config: &SamplerConfig,
    mode: Mode,
) -> Result<u64> {
    let pilot = SamplerConfig {
        n_steps: 20_000,
        burn_in: 2_000,
        record_every: 1,
        record_v: false,
        record_energy: false,
        seed: config.seed ^ 0x9e37_79b9_7f4a_7c15,
        ..config.clone()
    };
    let rec = sampler::run_chain(spec, params, &NetworkState::zeros(spec), &pilot, mode)?;
    let mut worst: f64 = 1.0;
    for unit in 0..spec.sizes[0] {
        worst = worst.max(analyze::iact(&rec.unit_series(0, unit)));
    }
    Ok(((10.0 * worst).ceil() as u64).clamp(1, 1000))
}

fn chain_generate(
    spec: &ModelSpec,
    params: &Params,
    config: &SamplerConfig,
    n_samples: usize,
    mode: Mode,
    harvest: Harvest,
) -> Result<Vec<Vec<f64>>> {
    params.validate(spec)?;
    match harvest {
        Harvest::Thinned(thin) => {
            let every = match thin {
                Some(k) => k.max(1),
                None => auto_thin(spec, params, config, mode)?,
            };
            let burn = config.burn_in.max(every);
            let run = SamplerConfig {
                record_every: every,
                burn_in: burn,
                n_steps: burn + (n_samples as u64 - 1) * every,
                record_v: false,
                record_energy: false,
                ..config.clone()
            };
            let rec = sampler::run_chain(spec, params, &NetworkState::zeros(spec), &run, mode)?;
            let mut samples = rec.x0_samples();
            samples.truncate(n_samples);
            Ok(samples)
        }
        Harvest::ShortChains => {
            let burn = config.burn_in.max(1);
            let results: Vec<Result<Vec<f64>>> = (0..n_samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = rng::stream(config.seed, Domain::Chain, i as u64);
                    let run = SamplerConfig {
                        n_steps: burn,
                        burn_in: burn,
                        record_every: 1,
                        record_v: false,
                        record_energy: false,
                        ..config.clone()
                    };
                    let rec = sampler::run_chain_with_rng(
                        spec,
                        params,
                        &NetworkState::zeros(spec),
                        &run,
                        mode,
                        &mut rng,
                    )?;
                    Ok(rec.x0_samples().pop().expect("one record per short chain"))
                })
                .collect();
            results.into_iter().collect()
        }
    }
}

/// Joint generation: x_0 and latents evolve together under the coupled
/// dynamics. Deterministic per `config.seed`.
pub fn joint_generate(
    spec: &ModelSpec,
    params: &Params,
    config: &SamplerConfig,
    n_samples: usize,
    harvest: Harvest,
) -> Result<Vec<Vec<f64>>> {
    chain_generate(spec, params, config, n_samples, Mode::JointGeneration, harvest)
}

/// Marginal generation. `staged = false`: latents and x_0 evolve
/// simultaneously (prior dynamic on the latents). `staged = true`: harvest
/// latent draws from a prior-only chain, freeze each, then relax x_0 against
/// the frozen latents — the two-phase search the O(n+m) argument describes.
pub fn marginal_generate(
    spec: &ModelSpec,
    params: &Params,
    config: &SamplerConfig,
    n_samples: usize,
    staged: bool,
    harvest: Harvest,
) -> Result<Vec<Vec<f64>>> {
    if !staged {
        return chain_generate(spec, params, config, n_samples, Mode::MarginalGeneration, harvest);
    }
    params.validate(spec)?;

    // phase 1: latent prior chain, thinned draws
    let every = match harvest {
        Harvest::Thinned(Some(k)) => k.max(1),
        Harvest::Thinned(None) => auto_thin(spec, params, config, Mode::MarginalGeneration)?,
        Harvest::ShortChains => config.burn_in.max(1),
    };
    let burn = config.burn_in.max(every);
    let run = SamplerConfig {
        record_every: every,
        burn_in: burn,
        n_steps: burn + (n_samples as u64 - 1) * every,
        record_v: false,
        record_energy: false,
        ..config.clone()
    };
    let rec = sampler::run_chain(spec, params, &NetworkState::zeros(spec), &run, Mode::MarginalGeneration)?;
    let latents: Vec<Vec<Vec<f64>>> = rec.x_traj.iter().take(n_samples).cloned().collect();

    // phase 2: per draw, freeze the latents and run the x_0 conditional
    // chain to its stationary law
    let settle = ((5.0 * config.tau_x / config.dt).ceil() as u64).max(100);
    let results: Vec<Result<Vec<f64>>> = latents
        .par_iter()
        .enumerate()
        .map(|(i, snap)| {
            let mut rng = rng::stream(config.seed, Domain::Init, i as u64);
            let eta0 = model::natural_params(spec, params, &snap[1], 0)?;
            let fam = spec.families[0];
            let step = config.dt / config.tau_x;
            let noise = (2.0 * config.dt / config.tau_x).sqrt();
            let mut x0 = vec![0.0; spec.sizes[0]];
            for _ in 0..settle {
                for (i, xi) in x0.iter_mut().enumerate() {
                    let z: f64 = rand::Rng::sample(&mut rng, rand_distr::StandardNormal);
                    let drift = fam.phi_prime(*xi) * eta0[i] + expfam::g_prime(*xi);
                    *xi += step * drift + noise * z;
                }
            }
            Ok(x0)
        })
        .collect();
    results.into_iter().collect()
}
