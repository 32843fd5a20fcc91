//! Depth/width trade-off sweep: how λ₁(H) and log det(H) move as a fixed
//! latent budget is split into more, narrower layers.

use crate::error::{HeeError, Result};
use crate::expfam::{Activation, Family, QuadratureGrid};
use crate::model::{ModelSpec, NetworkState, Params};
use crate::rng::{self, Domain};
use crate::sampler::{self, Mode, SamplerConfig};
use rand::Rng as _;
use rayon::prelude::*;

use super::hessian::{hessian, hj_quantities};

/// One row of the sweep: medians over the trials at a given depth.
#[derive(Debug, Clone)]
pub struct DepthWidthRow {
    pub depth: usize,
    pub width: usize,
    pub trials: usize,
    pub median_lambda_min: f64,
    pub median_log_det: f64,
}

/// Sampled-model ensemble for the sweep (documented protocol): observation
/// layer as wide as the latent budget, Sigmoid families, tanh activation,
/// θ entries uniform ±THETA_SCALE (fixed scale — strong coupling, so the
/// shallow-wide end of the sweep carries large spectral mass), η_top uniform
/// ±2, observation drawn N(0, 1), then a short noisy inference run to a
/// typical posterior state before the Hessian is taken.
const THETA_SCALE: f64 = 3.5;
const ETA_TOP_SCALE: f64 = 2.0;
const SETTLE_STEPS: u64 = 300;

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Evaluate λ₁(H) and ln|det H| for random models at each depth, holding the
/// total latent unit count fixed. `total_units` must divide evenly by every
/// requested depth.
pub fn depth_width_experiment(
    total_units: usize,
    depths: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<DepthWidthRow>> {
    if trials == 0 {
        return Err(HeeError::InvalidConfig("depth/width sweep needs at least one trial".into()));
    }
    for &depth in depths {
        if depth == 0 || total_units % depth != 0 {
            return Err(HeeError::InvalidConfig(format!(
                "total_units = {total_units} does not divide into {depth} equal layers"
            )));
        }
    }
    let grid = QuadratureGrid::default();
    let obs_units = total_units;
    let mut rows = Vec::with_capacity(depths.len());
    for &depth in depths {
        let width = total_units / depth;
        let mut sizes = vec![obs_units];
        sizes.extend(std::iter::repeat_n(width, depth));
        let spec = ModelSpec::uniform(sizes, Family::Sigmoid, Activation::Tanh)?;

        let results: Vec<Result<(f64, f64)>> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = rng::stream(seed, Domain::Trial, (depth as u64) << 32 | trial as u64);
                let mut params = Params::zeros(&spec);
                for theta in params.theta.iter_mut() {
                    for v in theta.data_mut() {
                        *v = rng.gen_range(-THETA_SCALE..THETA_SCALE);
                    }
                }
                for v in params.eta_top.iter_mut() {
                    *v = rng.gen_range(-ETA_TOP_SCALE..ETA_TOP_SCALE);
                }
                let x0: Vec<f64> = (0..obs_units)
                    .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                    .collect();
                let mut state = NetworkState::clamped(&spec, &x0)?;
                let config = SamplerConfig { n_steps: SETTLE_STEPS, ..Default::default() };
                for _ in 0..SETTLE_STEPS {
                    sampler::ls_step(&spec, &params, &mut state, &config, &mut rng, Mode::Inference)?;
                }
                let h = hessian(&spec, &params, &state.x, &grid)?;
                let rep = hj_quantities(&h, 1.0, 4.0, 1.0)?;
                Ok((rep.lambda_min, rep.log_det))
            })
            .collect();

        let mut lambdas = Vec::with_capacity(trials);
        let mut dets = Vec::with_capacity(trials);
        for r in results {
            let (l, d) = r?;
            lambdas.push(l);
            dets.push(d);
        }
        rows.push(DepthWidthRow {
            depth,
            width,
            trials,
            median_lambda_min: median(lambdas),
            median_log_det: median(dets),
        });
    }
    Ok(rows)
}
