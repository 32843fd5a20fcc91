//! Hierarchical exponential-family energy-based (HEE) model.
//!
//! A layered generative model whose joint density is a top-down Markov chain
//! of exponential-family conditionals,
//!
//! ```text
//! p_θ(x_{0:L}) = p(x_L) ∏_l p_θ(x_l | x_{l+1}),
//! p_θ(x_l | x_{l+1}) = exp[ η_l·φ(x_l) + g(x_l) − A(η_l) ],   η_l = θ_l f(x_{l+1}).
//! ```
//!
//! Because φ and g act elementwise, every log-partition term A(η) is a 1-D
//! integral; [`expfam`] evaluates it (and its derivatives) by quadrature,
//! which makes the energy of any configuration exactly computable at desk
//! scale. On top of that sit:
//!
//! - [`model`] — layer stacking, natural-parameter propagation, the exact
//!   energy, and the analytic drift terms the samplers discretize.
//! - [`sampler`] — Euler–Maruyama chains: fast "interneuron" relaxation that
//!   estimates A′(η) locally, first-order Langevin inference/generation, and
//!   second-order Langevin with a noisy adaptation current.
//! - [`learn`] — the local Hebbian rule θ_l += lr·ε_l f(x_{l+1})ᵀ and the
//!   streaming training loop built from it.
//! - [`generate`] — joint generation, marginal generation (simultaneous or
//!   staged), and an exact ancestral oracle for validating both.
//! - [`data`] — synthetic 2-D targets (Gaussian mixture, bananas, pinwheel),
//!   IDX image ingestion, CSV persistence.
//! - [`analyze`] — Hessian spectra and the H_J quantities, depth/width
//!   sweeps, autocorrelation, mode coverage, histogram KL, oscillation
//!   spectra and transient step sizes.
//!
//! All randomness flows through seeded ChaCha8 streams ([`rng`]); every chain
//! owns its RNG, so batch runs parallelize without losing reproducibility.

pub mod analyze;
pub mod data;
pub mod error;
pub mod expfam;
pub mod generate;
pub mod learn;
pub mod mat;
pub mod model;
pub mod rng;
pub mod sampler;

#[cfg(any(test, feature = "test-util"))]
pub mod testutil;

pub use error::{HeeError, Result};
