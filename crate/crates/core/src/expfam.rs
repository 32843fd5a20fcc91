//! Scalar exponential-family primitives.
//!
//! Each unit of a layer carries a 1-D density `exp[η·φ(x) + g(x) − A(η)]`
//! with a fixed Gaussian base measure `g(x) = −x²/2`. The base measure keeps
//! every tilt normalizable for both sufficient statistics and makes the
//! Linear family exactly Gaussian, which is where all the closed-form checks
//! come from:
//!
//! ```text
//! Linear:  A(η) = η²/2 + ln√(2π),  A′(η) = η,  A″(η) = 1.
//! ```
//!
//! The log-partition A(η) and its derivatives are evaluated by a fixed
//! trapezoid grid. The grid window is re-centered on the mode of the
//! integrand (Linear: η, Sigmoid: 0) so the truncation error stays below
//! ~1e−30 over the whole supported range |η| ≤ 50; on a smooth, Gaussian-
//! decaying integrand the uniform trapezoid rule converges spectrally, so
//! 401 nodes already sit at machine precision.

use crate::error::{HeeError, Result};
use crate::rng::Rng;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

/// Supported natural-parameter range. Outside it we error rather than return
/// silently inaccurate integrals.
pub const ETA_MAX: f64 = 50.0;

/// Sufficient statistic φ. The base measure is fixed to g(x) = −x²/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// φ(x) = x: the conditional is N(η, 1).
    Linear,
    /// φ(x) = 1/(1+e^(−x)): bounded statistic, multimodal-capable stacks.
    Sigmoid,
}

impl Family {
    #[inline]
    pub fn phi(self, x: f64) -> f64 {
        match self {
            Family::Linear => x,
            Family::Sigmoid => sigmoid(x),
        }
    }

    #[inline]
    pub fn phi_prime(self, x: f64) -> f64 {
        match self {
            Family::Linear => 1.0,
            Family::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
        }
    }

    #[inline]
    pub fn phi_double_prime(self, x: f64) -> f64 {
        match self {
            Family::Linear => 0.0,
            Family::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s) * (1.0 - 2.0 * s)
            }
        }
    }

    /// Center of the integrand exp(η·φ(x) + g(x)); the quadrature window is
    /// placed around it. For Linear the mode is exactly η; for Sigmoid the
    /// tilt saturates, the mode stays within ±4 for |η| ≤ 50, and the fixed
    /// window around 0 already contains all mass.
    #[inline]
    pub fn integrand_center(self, eta: f64) -> f64 {
        match self {
            Family::Linear => eta,
            Family::Sigmoid => 0.0,
        }
    }
}

/// Activation f in η_l = θ_l f(x_{l+1}).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Tanh,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn f(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => sigmoid(x),
        }
    }

    #[inline]
    pub fn f_prime(self, x: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            Activation::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
        }
    }

    #[inline]
    pub fn f_double_prime(self, x: f64) -> f64 {
        match self {
            Activation::Identity => 0.0,
            Activation::Tanh => {
                let t = x.tanh();
                -2.0 * t * (1.0 - t * t)
            }
            Activation::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s) * (1.0 - 2.0 * s)
            }
        }
    }
}

/// Gaussian base measure g(x) = −x²/2.
#[inline]
pub fn g(x: f64) -> f64 {
    -0.5 * x * x
}

#[inline]
pub fn g_prime(x: f64) -> f64 {
    -x
}

#[inline]
pub fn g_double_prime(_x: f64) -> f64 {
    -1.0
}

/// Overflow-safe sigmoid: single exp(−|x|), exact saturation at the tails.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    let r = 1.0 / (1.0 + e);
    if x >= 0.0 {
        r
    } else {
        e * r
    }
}

/// Fixed trapezoid grid over [−half_width, half_width], re-centered per call
/// on the integrand mode.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    half_width: f64,
}

impl QuadratureGrid {
    pub const DEFAULT_COUNT: usize = 401;
    pub const DEFAULT_HALF_WIDTH: f64 = 12.0;
    const MIN_COUNT: usize = 201;

    pub fn new(count: usize, half_width: f64) -> Result<Self> {
        if count < Self::MIN_COUNT {
            return Err(HeeError::InvalidConfig(format!(
                "quadrature grid needs at least {} nodes, got {count}",
                Self::MIN_COUNT
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(HeeError::InvalidConfig(format!("bad half_width {half_width}")));
        }
        let h = 2.0 * half_width / (count - 1) as f64;
        let nodes: Vec<f64> = (0..count).map(|j| -half_width + h * j as f64).collect();
        let mut weights = vec![h; count];
        weights[0] = 0.5 * h;
        weights[count - 1] = 0.5 * h;
        let grid = Self { nodes, weights, half_width };

        // Sanity anchor: ∫ exp(g) dx over the window must be √(2π).
        let z: f64 = grid
            .nodes
            .iter()
            .zip(&grid.weights)
            .map(|(&x, &w)| w * g(x).exp())
            .sum();
        let target = (2.0 * std::f64::consts::PI).sqrt();
        if ((z - target) / target).abs() > 1e-6 {
            return Err(HeeError::InvalidConfig(format!(
                "grid fails the Gaussian normalizer check: got {z}, want {target}"
            )));
        }
        Ok(grid)
    }

    pub fn count(&self) -> usize {
        self.nodes.len()
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self::new(Self::DEFAULT_COUNT, Self::DEFAULT_HALF_WIDTH).expect("default grid is valid")
    }
}

fn check_eta(eta: f64, what: &str) -> Result<()> {
    if !eta.is_finite() || eta.abs() > ETA_MAX {
        return Err(HeeError::NonFinite(format!(
            "{what}: eta = {eta} outside supported range [-{ETA_MAX}, {ETA_MAX}]"
        )));
    }
    Ok(())
}

/// Log-partition A(η) = ln ∫ exp(η·φ(x) + g(x)) dx.
pub fn log_partition(family: Family, eta: f64, grid: &QuadratureGrid) -> Result<f64> {
    check_eta(eta, "log_partition")?;
    let c = family.integrand_center(eta);
    // Factor out the max exponent: immune to overflow for any supported η.
    let mut emax = f64::NEG_INFINITY;
    for &t in &grid.nodes {
        let x = c + t;
        let e = eta * family.phi(x) + g(x);
        if e > emax {
            emax = e;
        }
    }
    let mut z = 0.0;
    for (&t, &w) in grid.nodes.iter().zip(&grid.weights) {
        let x = c + t;
        z += w * (eta * family.phi(x) + g(x) - emax).exp();
    }
    let a = emax + z.ln();
    if a.is_finite() {
        Ok(a)
    } else {
        Err(HeeError::NonFinite(format!("log_partition(eta = {eta})")))
    }
}

/// A(η), A′(η) = E[φ], A″(η) = Var[φ] in one pass over the grid.
pub fn suff_stat_moments(family: Family, eta: f64, grid: &QuadratureGrid) -> Result<(f64, f64, f64)> {
    let a = log_partition(family, eta, grid)?;
    let c = family.integrand_center(eta);
    let mut mean = 0.0;
    let mut second = 0.0;
    for (&t, &w) in grid.nodes.iter().zip(&grid.weights) {
        let x = c + t;
        let p = w * (eta * family.phi(x) + g(x) - a).exp();
        let phi = family.phi(x);
        mean += p * phi;
        second += p * phi * phi;
    }
    let var = (second - mean * mean).max(0.0);
    if mean.is_finite() && var.is_finite() {
        Ok((a, mean, var))
    } else {
        Err(HeeError::NonFinite(format!("suff_stat_moments(eta = {eta})")))
    }
}

/// A′(η) = E[φ(x)] under the tilted density.
pub fn mean_suff_stat(family: Family, eta: f64, grid: &QuadratureGrid) -> Result<f64> {
    suff_stat_moments(family, eta, grid).map(|(_, m, _)| m)
}

/// A″(η) = Var[φ(x)] ≥ 0.
pub fn var_suff_stat(family: Family, eta: f64, grid: &QuadratureGrid) -> Result<f64> {
    suff_stat_moments(family, eta, grid).map(|(_, _, v)| v)
}

/// Number of inverse-CDF cells for the exact scalar sampler.
const SAMPLER_CELLS: usize = 4096;

/// Exact draw from exp[η·φ(x) + g(x) − A(η)] by inverse-CDF on a dense grid
/// with linear interpolation inside cells. This is the ancestral oracle's
/// primitive; ~1e−3 CDF accuracy, far below Monte-Carlo error at the sample
/// sizes it is compared at.
pub fn sample_conditional_scalar(family: Family, eta: f64, rng: &mut Rng) -> Result<f64> {
    check_eta(eta, "sample_conditional_scalar")?;
    let c = family.integrand_center(eta);
    let half = QuadratureGrid::DEFAULT_HALF_WIDTH;
    let n = SAMPLER_CELLS;
    let h = 2.0 * half / n as f64;

    // Unnormalized density at cell edges, max-exponent factored out.
    let mut logd = Vec::with_capacity(n + 1);
    let mut emax = f64::NEG_INFINITY;
    for j in 0..=n {
        let x = c - half + h * j as f64;
        let e = eta * family.phi(x) + g(x);
        logd.push(e);
        if e > emax {
            emax = e;
        }
    }
    let dens: Vec<f64> = logd.iter().map(|e| (e - emax).exp()).collect();

    // Trapezoid CDF over cells.
    let mut cdf = Vec::with_capacity(n + 1);
    cdf.push(0.0);
    let mut acc = 0.0;
    for j in 0..n {
        acc += 0.5 * (dens[j] + dens[j + 1]) * h;
        cdf.push(acc);
    }
    let total = acc;
    if !(total.is_finite() && total > 0.0) {
        return Err(HeeError::NonFinite(format!("sample_conditional_scalar(eta = {eta})")));
    }

    let u: f64 = rng.gen::<f64>() * total;
    // Binary search for the cell, then linear interpolation.
    let mut lo = 0usize;
    let mut hi = n;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if cdf[mid] <= u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let cell_mass = cdf[lo + 1] - cdf[lo];
    let frac = if cell_mass > 0.0 { (u - cdf[lo]) / cell_mass } else { 0.5 };
    Ok(c - half + h * (lo as f64 + frac))
}
