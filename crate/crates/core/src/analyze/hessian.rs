//! Analytic Hessian of the clamped energy and the H_J quantities.
//!
//! H is the Hessian of −ln p_θ(x_{1:L} | x_0) w.r.t. the concatenated latent
//! coordinates, assembled analytically with A″ from quadrature (no
//! Monte-Carlo noise). Block structure, for latent layers l, l′:
//!
//! - diagonal block (l, l):
//!   f′(x_l) θ_{l−1}ᵀ diag(A″(η_{l−1})) θ_{l−1} f′(x_l)
//!   + diag( −f″(x_l) ⊙ θ_{l−1}ᵀ ε̂_{l−1} − φ″(x_l) ⊙ η_l − g″(x_l) )
//! - super-diagonal block (l, l+1): −diag(φ′(x_l)) θ_l diag(f′(x_{l+1}))
//! - everything else zero (the Markov chain).
//!
//! ε̂ is the exact φ(x) − A′(η). For layer L the prior term uses η_top.
//!
//! The auxiliary matrix of the adaptation analysis is block upper
//! triangular,
//!
//! ```text
//! H_J = [ H/τ_z   I/τ_z      ]
//!       [ 0       mI/(2τ_v) ]
//! ```
//!
//! so its spectrum is the union of the block spectra, giving
//! λ₁(H_J) = min{λ₁(H)/τ_z, m/(2τ_v)} and
//! det(H_J) = det(H/τ_z)·det(mI/(2τ_v)).

use crate::error::{HeeError, Result};
use crate::expfam::{self, QuadratureGrid};
use crate::mat::Mat;
use crate::model::{self, ModelSpec, Params};

/// Spectral summary of H and the derived H_J quantities.
#[derive(Debug, Clone)]
pub struct HessianReport {
    pub lambda_min: f64,
    /// ln |det H| (only meaningful when `singular` is false).
    pub log_det: f64,
    pub lambda_min_hj: f64,
    pub log_det_hj: f64,
    /// Hessian dimension Σ_{l≥1} n_l.
    pub n_total: usize,
    /// Set when H is numerically singular; log-determinants are then
    /// unreliable.
    pub singular: bool,
}

/// Exact Hessian of the energy w.r.t. (x_1, …, x_L) at the given state, with
/// x_0 clamped.
pub fn hessian(spec: &ModelSpec, params: &Params, x: &[Vec<f64>], grid: &QuadratureGrid) -> Result<Mat> {
    let depth = spec.depth();
    let n_total = spec.latent_units();
    let mut offsets = vec![0usize; depth + 1];
    for l in 1..=depth {
        offsets[l] = offsets[l - 1] + if l >= 2 { spec.sizes[l - 1] } else { 0 };
    }
    let offset = |l: usize| offsets[l];

    let mut h = Mat::zeros(n_total, n_total);
    let f = spec.activation;

    for l in 1..=depth {
        let nl = spec.sizes[l];
        let below = l - 1;
        let fam_below = spec.families[below];
        let eta_below = model::natural_params(spec, params, &x[l], below)?;
        let mut a2 = Vec::with_capacity(eta_below.len());
        let mut eps_hat = Vec::with_capacity(eta_below.len());
        for (i, &e) in eta_below.iter().enumerate() {
            let (_, mean, var) = expfam::suff_stat_moments(fam_below, e, grid)?;
            a2.push(var);
            eps_hat.push(fam_below.phi(x[below][i]) - mean);
        }
        let feedback = params.theta[below].matvec_t(&eps_hat);

        let eta_l = if l == depth {
            params.eta_top.clone()
        } else {
            model::natural_params(spec, params, &x[l + 1], l)?
        };
        let fam_l = spec.families[l];

        // diagonal block
        for j in 0..nl {
            let fpj = f.f_prime(x[l][j]);
            for jp in j..nl {
                let fpjp = f.f_prime(x[l][jp]);
                let mut s = 0.0;
                for i in 0..spec.sizes[below] {
                    s += params.theta[below][(i, j)] * params.theta[below][(i, jp)] * a2[i];
                }
                let mut v = fpj * fpjp * s;
                if j == jp {
                    v += -f.f_double_prime(x[l][j]) * feedback[j]
                        - fam_l.phi_double_prime(x[l][j]) * eta_l[j]
                        - expfam::g_double_prime(x[l][j]);
                }
                h[(offset(l) + j, offset(l) + jp)] = v;
                h[(offset(l) + jp, offset(l) + j)] = v;
            }
        }

        // coupling to the layer above
        if l < depth {
            let nlp = spec.sizes[l + 1];
            for j in 0..nl {
                let pj = fam_l.phi_prime(x[l][j]);
                for k in 0..nlp {
                    let v = -pj * params.theta[l][(j, k)] * f.f_prime(x[l + 1][k]);
                    h[(offset(l) + j, offset(l + 1) + k)] = v;
                    h[(offset(l + 1) + k, offset(l) + j)] = v;
                }
            }
        }
    }
    Ok(h)
}

/// λ₁ and log-determinants of H and H_J. `tau_z`, `m`, `tau_v` parameterize
/// the H_J blocks.
pub fn hj_quantities(h: &Mat, tau_z: f64, m: f64, tau_v: f64) -> Result<HessianReport> {
    let n = h.rows();
    if n != h.cols() {
        return Err(HeeError::ShapeMismatch("Hessian must be square".into()));
    }
    let mut asym: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            asym = asym.max((h[(i, j)] - h[(j, i)]).abs());
        }
    }
    if asym > 1e-8 {
        return Err(HeeError::ShapeMismatch(format!("Hessian asymmetry {asym} exceeds 1e-8")));
    }

    let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| h[(i, j)]);
    let eigs = dm.symmetric_eigen().eigenvalues;
    let lambda_min = eigs.iter().copied().fold(f64::INFINITY, f64::min);
    let max_abs = eigs.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let singular = eigs.iter().any(|&v| v.abs() <= 1e-12 * max_abs.max(1.0));
    let log_det: f64 = if singular {
        f64::NEG_INFINITY
    } else {
        eigs.iter().map(|&v| v.abs().ln()).sum()
    };

    let lambda_min_hj = (lambda_min / tau_z).min(m / (2.0 * tau_v));
    let nf = n as f64;
    let log_det_hj = log_det - nf * tau_z.ln() + nf * (m / (2.0 * tau_v)).ln();
    Ok(HessianReport { lambda_min, log_det, lambda_min_hj, log_det_hj, n_total: n, singular })
}
