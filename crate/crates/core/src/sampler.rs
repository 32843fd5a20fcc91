//! Time-discretized stochastic dynamics.
//!
//! Everything is Euler–Maruyama. One outer step of a chain does, in this
//! fixed order:
//!
//! 1. Interneuron relaxation, layers 0..L−1 in order: each u_l advances K
//!    substeps of size dt/K against the conditional tilted by the *current*
//!    η_l, drawing one standard normal per unit per substep (units in
//!    order). ε_l = φ(x_l) − φ(u_l) is then refreshed.
//! 2. All slow layers update simultaneously from the pre-step snapshot
//!    (Jacobi style, matching the coupled-SDE reading). For each updated
//!    layer in ascending order, one standard normal per unit is drawn; the
//!    same draw feeds both the x noise and, in second-order dynamics, the
//!    adaptation noise of that unit.
//!
//! The shared draw in (2) matters: the
//! adaptation current accumulates the *same* fluctuations that drive the
//! unit, and that coupling is exactly what leaves the stationary law of x
//! unchanged for any adaptation strength m (with τ_v = τ_z). It also makes
//! the m = 0 degeneracy exact: LS and SLD consume identical noise streams,
//! so their trajectories agree bitwise.
//!
//! Adaptation (second-order Langevin):
//!
//! ```text
//! τ_z dx_l/dt = drift_l − v_l + √(2τ_z) ξ_l
//! τ_v dv_l/dt = −m v_l / 2 + m √(2τ_v) ξ_l
//! ```
//!
//! v is an autonomous OU current (no x input) with stationary Var[v] = 2m.

use crate::error::{HeeError, Result};
use crate::expfam::{self, QuadratureGrid};
use crate::model::{self, EpsSource, ModelSpec, NetworkState, Params};
use crate::rng::{self, Rng};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// First-order Langevin (LS) or second-order with adaptation (SLD).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ls,
    Sld,
}

/// What the slow units are doing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// x_0 clamped to an observation; latents sample the posterior.
    Inference,
    /// x_0 free and driven by its conditional; latents keep the inference
    /// dynamic. Targets the joint p(x, z).
    JointGeneration,
    /// Latents follow the prior dynamic (no feedback); x_0 as above.
    /// Targets p(x) with the smaller search space.
    MarginalGeneration,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    /// Outer time step, in units of τ_z.
    pub dt: f64,
    pub tau_z: f64,
    /// Interneuron time constant; must satisfy τ_u < τ_z and dt ≤ 0.1 τ_u.
    pub tau_u: f64,
    pub tau_v: f64,
    /// Time constant of the free observation layer.
    pub tau_x: f64,
    /// Adaptation strength (only read by `Method::Sld`).
    pub m: f64,
    pub method: Method,
    /// Fast-chain substeps per outer step (K).
    pub inner_steps: usize,
    pub n_steps: u64,
    /// Outer steps discarded before recording.
    pub burn_in: u64,
    pub seed: u64,
    /// Thinning interval for recording.
    pub record_every: u64,
    /// Also record the adaptation currents.
    pub record_v: bool,
    /// Also record the (quadrature-exact) energy per recorded step.
    pub record_energy: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            tau_z: 1.0,
            tau_u: 0.1,
            tau_v: 1.0,
            tau_x: 1.0,
            m: 4.0,
            method: Method::Ls,
            inner_steps: 10,
            n_steps: 1000,
            burn_in: 0,
            seed: 0,
            record_every: 1,
            record_v: false,
            record_energy: false,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HeeError::InvalidConfig(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("sampler.dt must be positive, got {}", self.dt));
        }
        for (name, v) in [
            ("tau_z", self.tau_z),
            ("tau_u", self.tau_u),
            ("tau_v", self.tau_v),
            ("tau_x", self.tau_x),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("sampler.{name} must be positive, got {v}"));
            }
        }
        if self.tau_u >= self.tau_z {
            return bad(format!(
                "sampler.tau_u must be < tau_z (fast/slow separation), got {} >= {}",
                self.tau_u, self.tau_z
            ));
        }
        if self.dt > 0.1 * self.tau_u + 1e-12 {
            return bad(format!(
                "sampler.dt must be <= 0.1 * tau_u for fast-chain stability, got dt = {} with tau_u = {}",
                self.dt, self.tau_u
            ));
        }
        if self.m < 0.0 || !self.m.is_finite() {
            return bad(format!("sampler.m must be >= 0, got {}", self.m));
        }
        if self.inner_steps == 0 {
            return bad("sampler.inner_steps must be >= 1".into());
        }
        if self.record_every == 0 {
            return bad("sampler.record_every must be >= 1".into());
        }
        Ok(())
    }
}

/// Recorded trajectory of one chain.
#[derive(Debug, Clone)]
pub struct ChainRecord {
    /// Outer-step indices of the records (0 = initial state).
    pub times: Vec<u64>,
    /// Per record: all layers of x.
    pub x_traj: Vec<Vec<Vec<f64>>>,
    /// Per record: v_1..v_L (present when requested).
    pub v_traj: Option<Vec<Vec<Vec<f64>>>>,
    pub energy_traj: Option<Vec<f64>>,
    /// Time between consecutive records in units of τ_z.
    pub sample_interval_tau: f64,
}

impl ChainRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Scalar series of one unit: x[layer][unit] over the records.
    pub fn unit_series(&self, layer: usize, unit: usize) -> Vec<f64> {
        self.x_traj.iter().map(|snap| snap[layer][unit]).collect()
    }

    pub fn v_unit_series(&self, layer: usize, unit: usize) -> Option<Vec<f64>> {
        self.v_traj
            .as_ref()
            .map(|t| t.iter().map(|snap| snap[layer - 1][unit]).collect())
    }

    /// Recorded observation-layer vectors (useful as generation output).
    pub fn x0_samples(&self) -> Vec<Vec<f64>> {
        self.x_traj.iter().map(|snap| snap[0].clone()).collect()
    }
}

/// Advance the fast interneurons of `layer` by K substeps against the
/// current η_layer, then refresh ε_layer.
pub fn interneuron_relax(
    spec: &ModelSpec,
    params: &Params,
    state: &mut NetworkState,
    layer: usize,
    config: &SamplerConfig,
    rng: &mut Rng,
) -> Result<()> {
    let eta = model::natural_params(spec, params, &state.x[layer + 1], layer)?;
    let fam = spec.families[layer];
    let k = config.inner_steps;
    let dt_u = config.dt / k as f64;
    let step = dt_u / config.tau_u;
    let noise = (2.0 * dt_u / config.tau_u).sqrt();
    let u = &mut state.u[layer];
    for _ in 0..k {
        for (i, ui) in u.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            *ui += step * (fam.phi_prime(*ui) * eta[i] + expfam::g_prime(*ui)) + noise * z;
        }
    }
    for i in 0..spec.sizes[layer] {
        state.eps[layer][i] = fam.phi(state.x[layer][i]) - fam.phi(state.u[layer][i]);
    }
    Ok(())
}

fn relax_all(
    spec: &ModelSpec,
    params: &Params,
    state: &mut NetworkState,
    config: &SamplerConfig,
    rng: &mut Rng,
) -> Result<()> {
    for layer in 0..spec.depth() {
        interneuron_relax(spec, params, state, layer, config, rng)?;
    }
    Ok(())
}

fn updated_layers(spec: &ModelSpec, mode: Mode) -> std::ops::RangeInclusive<usize> {
    match mode {
        Mode::Inference => 1..=spec.depth(),
        Mode::JointGeneration | Mode::MarginalGeneration => 0..=spec.depth(),
    }
}

/// Drifts for all updated layers, computed from the pre-step snapshot.
fn compute_drifts(
    spec: &ModelSpec,
    params: &Params,
    state: &NetworkState,
    mode: Mode,
) -> Result<Vec<Vec<f64>>> {
    updated_layers(spec, mode)
        .map(|l| match mode {
            Mode::MarginalGeneration => model::drift_prior(spec, params, &state.x, l),
            Mode::Inference | Mode::JointGeneration => {
                model::drift_x(spec, params, &state.x, l, &EpsSource::Stored(state))
            }
        })
        .collect()
}

fn check_finite(state: &NetworkState) -> Result<()> {
    if state.is_finite() {
        Ok(())
    } else {
        Err(HeeError::NonFiniteState { step: 0, what: "chain state".into() })
    }
}

/// One first-order Langevin outer step.
pub fn ls_step(
    spec: &ModelSpec,
    params: &Params,
    state: &mut NetworkState,
    config: &SamplerConfig,
    rng: &mut Rng,
    mode: Mode,
) -> Result<()> {
    relax_all(spec, params, state, config, rng)?;
    let drifts = compute_drifts(spec, params, state, mode)?;
    for (drift, layer) in drifts.iter().zip(updated_layers(spec, mode)) {
        let tau = if layer == 0 { config.tau_x } else { config.tau_z };
        let step = config.dt / tau;
        let noise = (2.0 * config.dt / tau).sqrt();
        let x = &mut state.x[layer];
        for (i, xi) in x.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            *xi += step * drift[i] + noise * z;
        }
    }
    check_finite(state)
}

/// One second-order Langevin outer step: the x update subtracts the
/// adaptation current, and v integrates the same noise draw as its unit.
pub fn sld_step(
    spec: &ModelSpec,
    params: &Params,
    state: &mut NetworkState,
    config: &SamplerConfig,
    rng: &mut Rng,
    mode: Mode,
) -> Result<()> {
    relax_all(spec, params, state, config, rng)?;
    let drifts = compute_drifts(spec, params, state, mode)?;
    let m = config.m;
    let v_decay = m * config.dt / (2.0 * config.tau_v);
    let v_noise = m * (2.0 * config.dt / config.tau_v).sqrt();
    for (drift, layer) in drifts.iter().zip(updated_layers(spec, mode)) {
        let tau = if layer == 0 { config.tau_x } else { config.tau_z };
        let step = config.dt / tau;
        let noise = (2.0 * config.dt / tau).sqrt();
        if layer == 0 {
            // The observation layer carries no adaptation current.
            let x = &mut state.x[0];
            for (i, xi) in x.iter_mut().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                *xi += step * drift[i] + noise * z;
            }
        } else {
            let (x, v) = (&mut state.x[layer], &mut state.v[layer - 1]);
            for (i, (xi, vi)) in x.iter_mut().zip(v.iter_mut()).enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                *xi += step * (drift[i] - *vi) + noise * z;
                *vi += -v_decay * *vi + v_noise * z;
            }
        }
    }
    check_finite(state)
}

fn one_step(
    spec: &ModelSpec,
    params: &Params,
    state: &mut NetworkState,
    config: &SamplerConfig,
    rng: &mut Rng,
    mode: Mode,
) -> Result<()> {
    match config.method {
        Method::Ls => ls_step(spec, params, state, config, rng, mode),
        Method::Sld => sld_step(spec, params, state, config, rng, mode),
    }
}

/// Drive a chain for `config.n_steps` outer steps, recording every
/// `config.record_every` steps once past `config.burn_in`. Step index 0 is
/// the initial state. Deterministic given `config.seed`.
pub fn run_chain(
    spec: &ModelSpec,
    params: &Params,
    init: &NetworkState,
    config: &SamplerConfig,
    mode: Mode,
) -> Result<ChainRecord> {
    let mut rng = rng::seeded(config.seed);
    run_chain_with_rng(spec, params, init, config, mode, &mut rng)
}

/// Like [`run_chain`] but with a caller-supplied RNG (parallel batch runners
/// hand each chain its own stream).
pub fn run_chain_with_rng(
    spec: &ModelSpec,
    params: &Params,
    init: &NetworkState,
    config: &SamplerConfig,
    mode: Mode,
    rng: &mut Rng,
) -> Result<ChainRecord> {
    config.validate()?;
    let grid = if config.record_energy { Some(QuadratureGrid::default()) } else { None };
    let mut state = init.clone();
    let mut record = ChainRecord {
        times: Vec::new(),
        x_traj: Vec::new(),
        v_traj: if config.record_v { Some(Vec::new()) } else { None },
        energy_traj: if config.record_energy { Some(Vec::new()) } else { None },
        sample_interval_tau: config.dt * config.record_every as f64 / config.tau_z,
    };
    let maybe_record = |step: u64, state: &NetworkState, record: &mut ChainRecord| -> Result<()> {
        if step >= config.burn_in && (step - config.burn_in) % config.record_every == 0 {
            record.times.push(step);
            record.x_traj.push(state.x.clone());
            if let Some(vt) = record.v_traj.as_mut() {
                vt.push(state.v.clone());
            }
            if let Some(et) = record.energy_traj.as_mut() {
                et.push(model::energy(spec, params, &state.x, grid.as_ref().unwrap())?);
            }
        }
        Ok(())
    };
    maybe_record(0, &state, &mut record)?;
    for step in 1..=config.n_steps {
        one_step(spec, params, &mut state, config, rng, mode).map_err(|e| match e {
            HeeError::NonFiniteState { what, .. } => HeeError::NonFiniteState { step, what },
            other => other,
        })?;
        maybe_record(step, &state, &mut record)?;
    }
    Ok(record)
}

// ---------------------------------------------------------------------------
// Generic 2-D target chains (the sampler-bench regime)
// ---------------------------------------------------------------------------

/// LS / SLD on an arbitrary smooth log-density gradient, with the same
/// discretization and shared-noise contract as the network chains. Returns
/// the recorded positions. Used by the sampler bench on bundled 2-D mixture
/// energies, where the two methods are compared head-to-head.
pub fn run_target_chain(
    grad_log_p: &dyn Fn(&[f64]) -> Vec<f64>,
    init: &[f64],
    config: &SamplerConfig,
    rng: &mut Rng,
) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    let dim = init.len();
    let mut x = init.to_vec();
    let mut v = vec![0.0; dim];
    let step = config.dt / config.tau_z;
    let noise = (2.0 * config.dt / config.tau_z).sqrt();
    let m = if config.method == Method::Sld { config.m } else { 0.0 };
    let v_decay = m * config.dt / (2.0 * config.tau_v);
    let v_noise = m * (2.0 * config.dt / config.tau_v).sqrt();
    let mut out = Vec::new();
    if config.burn_in == 0 {
        out.push(x.clone());
    }
    for s in 1..=config.n_steps {
        let drift = grad_log_p(&x);
        for i in 0..dim {
            let z: f64 = rng.sample(StandardNormal);
            x[i] += step * (drift[i] - v[i]) + noise * z;
            v[i] += -v_decay * v[i] + v_noise * z;
        }
        if x.iter().any(|a| !a.is_finite()) {
            return Err(HeeError::NonFiniteState { step: s, what: "target chain".into() });
        }
        if s >= config.burn_in && (s - config.burn_in) % config.record_every == 0 {
            out.push(x.clone());
        }
    }
    Ok(out)
}
