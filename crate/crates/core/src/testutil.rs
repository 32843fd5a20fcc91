//! Independent numeric oracles for tests.
//!
//! Everything here deliberately avoids the production code paths it is used
//! to check: the dense quadrature below runs 10,001 trapezoid points (25×
//! the production grid) with direct normalized sums; the Gaussian references
//! are closed forms; the H_J references go through nalgebra's general
//! eigensolver and LU determinant instead of the block formulas.

use crate::expfam::{self, Activation, Family, QuadratureGrid};
use crate::mat::Mat;
use crate::model::{self, ModelSpec, Params};
use crate::rng::Rng;
use rand::Rng as _;

pub mod oracle {
    use super::*;

    const DENSE_POINTS: usize = 10_001;
    const HALF_WIDTH: f64 = 12.0;

    /// Dense trapezoid evaluation of (A, A′, A″), window centered on the
    /// integrand mode like the production grid (a fixed [−12, 12] window
    /// would truncate the Linear family's mass beyond |η| ≈ 9).
    pub fn dense_moments(family: Family, eta: f64) -> (f64, f64, f64) {
        let c = family.integrand_center(eta);
        let h = 2.0 * HALF_WIDTH / (DENSE_POINTS - 1) as f64;
        let mut emax = f64::NEG_INFINITY;
        let mut es = Vec::with_capacity(DENSE_POINTS);
        for j in 0..DENSE_POINTS {
            let x = c - HALF_WIDTH + h * j as f64;
            let e = eta * family.phi(x) + expfam::g(x);
            es.push(e);
            if e > emax {
                emax = e;
            }
        }
        let w = |j: usize| if j == 0 || j == DENSE_POINTS - 1 { 0.5 * h } else { h };
        let mut z = 0.0;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (j, &e) in es.iter().enumerate() {
            let x = c - HALF_WIDTH + h * j as f64;
            let p = w(j) * (e - emax).exp();
            let phi = family.phi(x);
            z += p;
            m1 += p * phi;
            m2 += p * phi * phi;
        }
        let a = emax + z.ln();
        let mean = m1 / z;
        let var = (m2 / z - mean * mean).max(0.0);
        (a, mean, var)
    }

    pub fn dense_log_partition(family: Family, eta: f64) -> f64 {
        dense_moments(family, eta).0
    }

    pub fn dense_mean_suff_stat(family: Family, eta: f64) -> f64 {
        dense_moments(family, eta).1
    }

    pub fn dense_var_suff_stat(family: Family, eta: f64) -> f64 {
        dense_moments(family, eta).2
    }

    /// Energy by direct composition of per-layer conditional negative log
    /// densities, each normalized with the dense A.
    pub fn dense_energy(spec: &ModelSpec, params: &Params, x: &[Vec<f64>]) -> f64 {
        let mut log_p = 0.0;
        for l in 0..=spec.depth() {
            let eta: Vec<f64> = if l == spec.depth() {
                params.eta_top.clone()
            } else {
                let fx: Vec<f64> = x[l + 1].iter().map(|&v| spec.activation.f(v)).collect();
                params.theta[l].matvec(&fx)
            };
            let fam = spec.families[l];
            for (i, &e) in eta.iter().enumerate() {
                let xi = x[l][i];
                log_p += e * fam.phi(xi) + expfam::g(xi) - dense_log_partition(fam, e);
            }
        }
        -log_p
    }
}

/// Central finite difference of the energy w.r.t. x[layer][unit].
pub fn fd_energy_grad(
    spec: &ModelSpec,
    params: &Params,
    x: &[Vec<f64>],
    layer: usize,
    unit: usize,
    grid: &QuadratureGrid,
    h: f64,
) -> f64 {
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[layer][unit] += h;
    xm[layer][unit] -= h;
    let ep = model::energy(spec, params, &xp, grid).unwrap();
    let em = model::energy(spec, params, &xm, grid).unwrap();
    (ep - em) / (2.0 * h)
}

/// Central finite difference of the energy w.r.t. θ_l[i, j].
pub fn fd_energy_grad_theta(
    spec: &ModelSpec,
    params: &Params,
    x: &[Vec<f64>],
    l: usize,
    i: usize,
    j: usize,
    grid: &QuadratureGrid,
    h: f64,
) -> f64 {
    let mut pp = params.clone();
    let mut pm = params.clone();
    pp.theta[l][(i, j)] += h;
    pm.theta[l][(i, j)] -= h;
    let ep = model::energy(spec, &pp, x, grid).unwrap();
    let em = model::energy(spec, &pm, x, grid).unwrap();
    (ep - em) / (2.0 * h)
}

/// Central finite difference of the energy w.r.t. η_top[i].
pub fn fd_energy_grad_eta_top(
    spec: &ModelSpec,
    params: &Params,
    x: &[Vec<f64>],
    i: usize,
    grid: &QuadratureGrid,
    h: f64,
) -> f64 {
    let mut pp = params.clone();
    let mut pm = params.clone();
    pp.eta_top[i] += h;
    pm.eta_top[i] -= h;
    let ep = model::energy(spec, &pp, x, grid).unwrap();
    let em = model::energy(spec, &pm, x, grid).unwrap();
    (ep - em) / (2.0 * h)
}

/// Model with given layout and θ entries uniform in [−scale/√n_{l+1}, +],
/// η_top uniform in [−1, 1].
pub fn random_small_model(
    sizes: &[usize],
    families: &[Family],
    activation: Activation,
    scale: f64,
    rng: &mut Rng,
) -> (ModelSpec, Params) {
    let spec = ModelSpec::new(sizes.to_vec(), families.to_vec(), activation).unwrap();
    let mut params = Params::zeros(&spec);
    for (l, theta) in params.theta.iter_mut().enumerate() {
        let a = scale / (sizes[l + 1] as f64).sqrt();
        for v in theta.data_mut() {
            *v = rng.gen_range(-a..a);
        }
    }
    for v in params.eta_top.iter_mut() {
        *v = rng.gen_range(-1.0..1.0);
    }
    (spec, params)
}

/// Random model with L ≤ max_depth, n_l ≤ max_width, mixed families.
pub fn random_model_up_to(max_depth: usize, max_width: usize, rng: &mut Rng) -> (ModelSpec, Params) {
    let depth = rng.gen_range(1..=max_depth);
    let sizes: Vec<usize> = (0..=depth).map(|_| rng.gen_range(1..=max_width)).collect();
    let families: Vec<Family> = (0..=depth)
        .map(|_| if rng.gen::<bool>() { Family::Sigmoid } else { Family::Linear })
        .collect();
    let activation = match rng.gen_range(0..3) {
        0 => Activation::Identity,
        1 => Activation::Tanh,
        _ => Activation::Sigmoid,
    };
    random_small_model(&sizes, &families, activation, 0.9, rng)
}

/// Random all-layer state with entries uniform in [−scale, scale].
pub fn random_state(spec: &ModelSpec, scale: f64, rng: &mut Rng) -> Vec<Vec<f64>> {
    spec.sizes
        .iter()
        .map(|&n| (0..n).map(|_| rng.gen_range(-scale..scale)).collect())
        .collect()
}

// ---------------------------------------------------------------------------
// Closed-form Gaussian references (Linear family + Identity activation)
// ---------------------------------------------------------------------------

/// Posterior of x_1 | x_0 for an L = 1 Linear/Identity model:
/// precision Λ = I + θ₀ᵀθ₀, mean μ = Λ⁻¹(θ₀ᵀ x₀ + η_top).
/// Returns (mean, covariance).
pub fn linear_posterior(theta0: &Mat, eta_top: &[f64], x0: &[f64]) -> (Vec<f64>, Mat) {
    let n1 = theta0.cols();
    let mut lambda = nalgebra::DMatrix::<f64>::identity(n1, n1);
    for a in 0..n1 {
        for b in 0..n1 {
            let mut s = 0.0;
            for i in 0..theta0.rows() {
                s += theta0[(i, a)] * theta0[(i, b)];
            }
            lambda[(a, b)] += s;
        }
    }
    let cov = lambda.clone().try_inverse().expect("posterior precision is PD");
    let rhs: Vec<f64> = {
        let t = theta0.matvec_t(x0);
        t.iter().zip(eta_top).map(|(a, b)| a + b).collect()
    };
    let mean_v = &cov * nalgebra::DVector::from_vec(rhs);
    let mean = mean_v.iter().copied().collect();
    let mut cov_mat = Mat::zeros(n1, n1);
    for a in 0..n1 {
        for b in 0..n1 {
            cov_mat[(a, b)] = cov[(a, b)];
        }
    }
    (mean, cov_mat)
}

/// Marginal of x_0 for the same model: N(θ₀ η_top, I + θ₀θ₀ᵀ).
pub fn linear_marginal(theta0: &Mat, eta_top: &[f64]) -> (Vec<f64>, Mat) {
    let n0 = theta0.rows();
    let mean = theta0.matvec(eta_top);
    let mut cov = Mat::identity(n0);
    for a in 0..n0 {
        for b in 0..n0 {
            let mut s = 0.0;
            for j in 0..theta0.cols() {
                s += theta0[(a, j)] * theta0[(b, j)];
            }
            cov[(a, b)] += s;
        }
    }
    (mean, cov)
}

// ---------------------------------------------------------------------------
// H_J direct references
// ---------------------------------------------------------------------------

/// Assemble the full 2n×2n H_J = [[H/τ_z, I/τ_z], [0, mI/(2τ_v)]].
pub fn assemble_hj(h: &Mat, tau_z: f64, m: f64, tau_v: f64) -> nalgebra::DMatrix<f64> {
    let n = h.rows();
    let mut hj = nalgebra::DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            hj[(i, j)] = h[(i, j)] / tau_z;
        }
        hj[(i, n + i)] = 1.0 / tau_z;
        hj[(n + i, n + i)] = m / (2.0 * tau_v);
    }
    hj
}

/// Determinant of the assembled H_J via LU (nalgebra), no block shortcuts.
pub fn direct_det(hj: &nalgebra::DMatrix<f64>) -> f64 {
    hj.clone().lu().determinant()
}

/// Smallest real part among the eigenvalues of the assembled H_J, via the
/// general (non-symmetric) eigensolver.
pub fn direct_min_eigenvalue(hj: &nalgebra::DMatrix<f64>) -> f64 {
    let eigs = hj.clone().complex_eigenvalues();
    eigs.iter().map(|c| c.re).fold(f64::INFINITY, f64::min)
}

// ---------------------------------------------------------------------------
// Chain statistics helpers
// ---------------------------------------------------------------------------

/// Sample mean and its standard error, inflating for autocorrelation via the
/// crate's IACT estimate.
pub fn mean_and_se(series: &[f64]) -> (f64, f64) {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let tau = crate::analyze::iact(series);
    let se = (var * tau / n).sqrt();
    (mean, se)
}

/// Sample variance and a standard error for it (Gaussian-based, inflated by
/// the IACT of the squared deviations).
pub fn var_and_se(series: &[f64]) -> (f64, f64) {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let devsq: Vec<f64> = series.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = devsq.iter().sum::<f64>() / n;
    let tau = crate::analyze::iact(&devsq);
    let var_of_devsq = devsq.iter().map(|v| (v - var) * (v - var)).sum::<f64>() / n;
    let se = (var_of_devsq * tau / n).sqrt();
    (var, se)
}
