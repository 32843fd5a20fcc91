//! The hierarchical joint distribution and its analytic derivatives.
//!
//! A model is a stack of layers 0..=L. Layer 0 is the observation; layers
//! 1..=L are latents. The top prior has a constant natural parameter η_L;
//! every other layer receives η_l = θ_l f(x_{l+1}) from the layer above.
//!
//! The energy −ln p_θ(x_{0:L}) decomposes per layer, and each per-unit
//! log-partition A(η) is a 1-D quadrature — that is what makes the energy
//! exactly computable here, unlike in monolithic energy-based models.
//!
//! Drift terms: the inference drift for a latent layer is
//!
//! ```text
//! τ_z dx_l/dt = f′(x_l) θ_{l−1}ᵀ ε_{l−1} + φ′(x_l) η_l + g′(x_l)
//! ```
//!
//! where ε_{l−1} = φ(x_{l−1}) − φ(u_{l−1}) is the interneuron estimate of
//! φ(x_{l−1}) − A′(η_{l−1}). With the exact A′ substituted, this drift is
//! exactly −∇_{x_l} energy (checked against finite differences in tests).
//! Layer 0 in generation mode, and latents in marginal generation, drop the
//! feedback term.

use crate::error::{HeeError, Result};
use crate::expfam::{self, Activation, Family, QuadratureGrid, ETA_MAX};
use crate::mat::Mat;
use crate::rng::Rng;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

/// Layer sizes, per-layer families, and the activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Units per layer, n_0..n_L. `sizes.len() == L + 1`.
    pub sizes: Vec<usize>,
    /// Sufficient statistic per layer 0..=L.
    pub families: Vec<Family>,
    /// Activation f used in η_l = θ_l f(x_{l+1}).
    pub activation: Activation,
}

impl ModelSpec {
    pub fn new(sizes: Vec<usize>, families: Vec<Family>, activation: Activation) -> Result<Self> {
        let spec = Self { sizes, families, activation };
        spec.validate()?;
        Ok(spec)
    }

    /// Same family on every layer.
    pub fn uniform(sizes: Vec<usize>, family: Family, activation: Activation) -> Result<Self> {
        let n = sizes.len();
        Self::new(sizes, vec![family; n], activation)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.len() < 2 {
            return Err(HeeError::InvalidConfig(
                "model needs at least one latent layer (sizes.len() >= 2)".into(),
            ));
        }
        if self.sizes.iter().any(|&n| n == 0) {
            return Err(HeeError::InvalidConfig("every layer needs at least one unit".into()));
        }
        if self.families.len() != self.sizes.len() {
            return Err(HeeError::InvalidConfig(format!(
                "families.len() = {} but sizes.len() = {}",
                self.families.len(),
                self.sizes.len()
            )));
        }
        Ok(())
    }

    /// Number of latent layers L.
    pub fn depth(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn n_units(&self, layer: usize) -> usize {
        self.sizes[layer]
    }

    /// Total latent units Σ_{l≥1} n_l (the Hessian dimension).
    pub fn latent_units(&self) -> usize {
        self.sizes[1..].iter().sum()
    }
}

/// Learnable parameters: θ_l (n_l × n_{l+1}) for l = 0..L−1 and the constant
/// top-level natural parameter η_L.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub theta: Vec<Mat>,
    pub eta_top: Vec<f64>,
}

impl Params {
    pub fn zeros(spec: &ModelSpec) -> Self {
        let depth = spec.depth();
        let theta = (0..depth).map(|l| Mat::zeros(spec.sizes[l], spec.sizes[l + 1])).collect();
        Self { theta, eta_top: vec![0.0; spec.sizes[depth]] }
    }

    /// θ_l ~ U[−a, a] with a = 1/√n_{l+1}; η_top = 0. Keeps initial η within
    /// range for any activation.
    pub fn init_uniform(spec: &ModelSpec, rng: &mut Rng) -> Self {
        let mut params = Self::zeros(spec);
        for (l, theta) in params.theta.iter_mut().enumerate() {
            let a = 1.0 / (spec.sizes[l + 1] as f64).sqrt();
            for v in theta.data_mut() {
                *v = rng.gen_range(-a..a);
            }
        }
        params
    }

    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        let depth = spec.depth();
        if self.theta.len() != depth {
            return Err(HeeError::ShapeMismatch(format!(
                "expected {depth} weight matrices, got {}",
                self.theta.len()
            )));
        }
        for (l, theta) in self.theta.iter().enumerate() {
            if theta.rows() != spec.sizes[l] || theta.cols() != spec.sizes[l + 1] {
                return Err(HeeError::ShapeMismatch(format!(
                    "theta[{l}] is {}x{}, expected {}x{}",
                    theta.rows(),
                    theta.cols(),
                    spec.sizes[l],
                    spec.sizes[l + 1]
                )));
            }
            if !theta.is_finite() {
                return Err(HeeError::ShapeMismatch(format!("theta[{l}] contains non-finite entries")));
            }
        }
        if self.eta_top.len() != spec.sizes[depth] {
            return Err(HeeError::ShapeMismatch(format!(
                "eta_top has length {}, expected {}",
                self.eta_top.len(),
                spec.sizes[depth]
            )));
        }
        if self.eta_top.iter().any(|v| !v.is_finite()) {
            return Err(HeeError::ShapeMismatch("eta_top contains non-finite entries".into()));
        }
        Ok(())
    }

    /// params += scale · delta, elementwise over θ and η_top.
    pub fn add_scaled(&mut self, scale: f64, delta: &Params) {
        for (t, d) in self.theta.iter_mut().zip(&delta.theta) {
            t.add_scaled(scale, d);
        }
        for (e, d) in self.eta_top.iter_mut().zip(&delta.eta_top) {
            *e += scale * d;
        }
    }
}

/// All neuron values of one chain: slow units x, fast interneuron samplers u,
/// error units ε, adaptation currents v.
///
/// ε_l = φ(x_l) − φ(u_l) is derived state; it is stored so the Hebbian rule
/// reads only locally available values.
#[derive(Debug, Clone)]
pub struct NetworkState {
    /// x_0..x_L.
    pub x: Vec<Vec<f64>>,
    /// u_0..u_{L−1}.
    pub u: Vec<Vec<f64>>,
    /// ε_0..ε_{L−1}.
    pub eps: Vec<Vec<f64>>,
    /// v_1..v_L, indexed as v[l−1] for layer l.
    pub v: Vec<Vec<f64>>,
    /// Observation clamped (inference) or free (generation).
    pub clamped_x0: bool,
}

impl NetworkState {
    /// All-zero state; u starts at x (warm start, makes the m = 0 degeneracy
    /// check exact), v at 0.
    pub fn zeros(spec: &ModelSpec) -> Self {
        let x: Vec<Vec<f64>> = spec.sizes.iter().map(|&n| vec![0.0; n]).collect();
        let u = x[..spec.depth()].to_vec();
        let eps: Vec<Vec<f64>> = spec.sizes[..spec.depth()].iter().map(|&n| vec![0.0; n]).collect();
        let v: Vec<Vec<f64>> = spec.sizes[1..].iter().map(|&n| vec![0.0; n]).collect();
        Self { x, u, eps, v, clamped_x0: false }
    }

    /// Inference state: x_0 clamped to an observation.
    pub fn clamped(spec: &ModelSpec, observation: &[f64]) -> Result<Self> {
        if observation.len() != spec.sizes[0] {
            return Err(HeeError::ShapeMismatch(format!(
                "observation has length {}, layer 0 has {} units",
                observation.len(),
                spec.sizes[0]
            )));
        }
        let mut state = Self::zeros(spec);
        state.x[0].copy_from_slice(observation);
        state.u[0].copy_from_slice(observation);
        state.clamped_x0 = true;
        Ok(state)
    }

    pub fn is_finite(&self) -> bool {
        fn all(vs: &[Vec<f64>]) -> bool {
            vs.iter().all(|v| v.iter().all(|x| x.is_finite()))
        }
        all(&self.x) && all(&self.u) && all(&self.eps) && all(&self.v)
    }

    /// Refresh ε_l from x and u (they are always recomputable).
    pub fn recompute_eps(&mut self, spec: &ModelSpec) {
        for l in 0..spec.depth() {
            let fam = spec.families[l];
            for i in 0..spec.sizes[l] {
                self.eps[l][i] = fam.phi(self.x[l][i]) - fam.phi(self.u[l][i]);
            }
        }
    }
}

/// η_l = θ_l f(x_{l+1}); for l = L returns η_top unchanged. Errors if any
/// component leaves the supported range — reported here because this is the
/// first place the violation is attributable to θ.
pub fn natural_params(spec: &ModelSpec, params: &Params, x_next: &[f64], layer: usize) -> Result<Vec<f64>> {
    let depth = spec.depth();
    let eta = if layer == depth {
        params.eta_top.clone()
    } else {
        let fx: Vec<f64> = x_next.iter().map(|&x| spec.activation.f(x)).collect();
        params.theta[layer].matvec(&fx)
    };
    for (i, &e) in eta.iter().enumerate() {
        if !e.is_finite() || e.abs() > ETA_MAX {
            return Err(HeeError::EtaOutOfRange { layer, unit: i, eta: e });
        }
    }
    Ok(eta)
}

/// Exact error term ε̂_l = φ(x_l) − A′(η_l), with A′ from quadrature. The
/// quadrature-free circuit approximates this with interneuron samples; tests
/// and the Hessian use this exact version.
pub fn exact_eps(
    spec: &ModelSpec,
    params: &Params,
    x: &[Vec<f64>],
    layer: usize,
    grid: &QuadratureGrid,
) -> Result<Vec<f64>> {
    let eta = natural_params(spec, params, &x[layer + 1], layer)?;
    let fam = spec.families[layer];
    let mut eps = Vec::with_capacity(spec.sizes[layer]);
    for (i, &e) in eta.iter().enumerate() {
        eps.push(fam.phi(x[layer][i]) - expfam::mean_suff_stat(fam, e, grid)?);
    }
    Ok(eps)
}

/// −ln p_θ(x_{0:L}) up to quadrature accuracy.
pub fn energy(spec: &ModelSpec, params: &Params, x: &[Vec<f64>], grid: &QuadratureGrid) -> Result<f64> {
    if x.len() != spec.sizes.len() {
        return Err(HeeError::ShapeMismatch(format!(
            "state has {} layers, spec has {}",
            x.len(),
            spec.sizes.len()
        )));
    }
    let mut log_p = 0.0;
    for l in 0..=spec.depth() {
        let eta = if l == spec.depth() {
            params.eta_top.clone()
        } else {
            natural_params(spec, params, &x[l + 1], l)?
        };
        let fam = spec.families[l];
        for (i, &e) in eta.iter().enumerate() {
            let xi = x[l][i];
            log_p += e * fam.phi(xi) + expfam::g(xi) - expfam::log_partition(fam, e, grid)?;
        }
    }
    Ok(-log_p)
}

/// Which ε estimate drives the feedback term of a drift.
pub enum EpsSource<'a> {
    /// The interneuron estimates stored in the state (the circuit).
    Stored(&'a NetworkState),
    /// Exact φ(x) − A′(η) via quadrature (tests, diagnostics).
    Exact(&'a QuadratureGrid),
}

/// Deterministic part of the inference/joint-generation dynamic for layer
/// `layer` (feedback + prior + base measure):
///
/// - layer 0 has no feedback term (there is no layer −1);
/// - layer L uses η_top for the prior term.
///
/// The caller is responsible for ε being current (run the interneuron
/// relaxation first) when using the stored source.
pub fn drift_x(
    spec: &ModelSpec,
    params: &Params,
    x: &[Vec<f64>],
    layer: usize,
    eps: &EpsSource,
) -> Result<Vec<f64>> {
    let mut drift = drift_prior(spec, params, x, layer)?;
    if layer > 0 {
        let below = layer - 1;
        let eps_vec_storage;
        let eps_vec: &[f64] = match eps {
            EpsSource::Stored(state) => &state.eps[below],
            EpsSource::Exact(grid) => {
                eps_vec_storage = exact_eps(spec, params, x, below, grid)?;
                &eps_vec_storage
            }
        };
        let feedback = params.theta[below].matvec_t(eps_vec);
        for (i, d) in drift.iter_mut().enumerate() {
            *d += spec.activation.f_prime(x[layer][i]) * feedback[i];
        }
    }
    Ok(drift)
}

/// Prior-only drift φ′(x_l)η_l + g′(x_l) (marginal generation of latents,
/// and the whole of the layer-0 generation dynamic).
pub fn drift_prior(spec: &ModelSpec, params: &Params, x: &[Vec<f64>], layer: usize) -> Result<Vec<f64>> {
    let eta = if layer == spec.depth() {
        params.eta_top.clone()
    } else {
        natural_params(spec, params, &x[layer + 1], layer)?
    };
    let fam = spec.families[layer];
    let mut drift = Vec::with_capacity(spec.sizes[layer]);
    for (i, &e) in eta.iter().enumerate() {
        let xi = x[layer][i];
        drift.push(fam.phi_prime(xi) * e + expfam::g_prime(xi));
    }
    Ok(drift)
}

// ---------------------------------------------------------------------------
// Checkpoint format
// ---------------------------------------------------------------------------

/// Checkpoint wire format: a single JSON document with matrices flattened
/// row-major. Field names and layout are part of the external interface.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointDoc {
    version: u32,
    spec: CheckpointSpec,
    eta_top: Vec<f64>,
    theta: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointSpec {
    #[serde(rename = "L")]
    l: usize,
    sizes: Vec<usize>,
    families: Vec<Family>,
    activation: Activation,
}

pub const CHECKPOINT_VERSION: u32 = 1;

pub fn checkpoint_to_json(spec: &ModelSpec, params: &Params) -> Result<String> {
    params.validate(spec)?;
    let doc = CheckpointDoc {
        version: CHECKPOINT_VERSION,
        spec: CheckpointSpec {
            l: spec.depth(),
            sizes: spec.sizes.clone(),
            families: spec.families.clone(),
            activation: spec.activation,
        },
        eta_top: params.eta_top.clone(),
        theta: params.theta.iter().map(|m| m.data().to_vec()).collect(),
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn checkpoint_from_json(json: &str) -> Result<(ModelSpec, Params)> {
    let doc: CheckpointDoc = serde_json::from_str(json)?;
    if doc.version != CHECKPOINT_VERSION {
        return Err(HeeError::BadCheckpoint(format!(
            "unsupported checkpoint version {}",
            doc.version
        )));
    }
    if doc.spec.l + 1 != doc.spec.sizes.len() {
        return Err(HeeError::BadCheckpoint(format!(
            "L = {} inconsistent with sizes.len() = {}",
            doc.spec.l,
            doc.spec.sizes.len()
        )));
    }
    let spec = ModelSpec::new(doc.spec.sizes, doc.spec.families, doc.spec.activation)?;
    if doc.theta.len() != spec.depth() {
        return Err(HeeError::BadCheckpoint(format!(
            "expected {} weight matrices, got {}",
            spec.depth(),
            doc.theta.len()
        )));
    }
    let mut theta = Vec::with_capacity(doc.theta.len());
    for (l, flat) in doc.theta.into_iter().enumerate() {
        let (r, c) = (spec.sizes[l], spec.sizes[l + 1]);
        if flat.len() != r * c {
            return Err(HeeError::BadCheckpoint(format!(
                "theta[{l}] has {} entries, expected {}x{}",
                flat.len(),
                r,
                c
            )));
        }
        theta.push(Mat::from_row_major(r, c, flat));
    }
    let params = Params { theta, eta_top: doc.eta_top };
    params.validate(&spec)?;
    Ok((spec, params))
}

pub fn save_checkpoint(path: &std::path::Path, spec: &ModelSpec, params: &Params) -> Result<()> {
    std::fs::write(path, checkpoint_to_json(spec, params)?)?;
    Ok(())
}

pub fn load_checkpoint(path: &std::path::Path) -> Result<(ModelSpec, Params)> {
    checkpoint_from_json(&std::fs::read_to_string(path)?)
}
