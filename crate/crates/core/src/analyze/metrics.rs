//! Chain and sample-population metrics: integrated autocorrelation time,
//! mode coverage, histogram KL, energy-distance two-sample test, sliced
//! 2-Wasserstein.

use super::fft;
use crate::rng::{self, Domain};
use rand::seq::SliceRandom;
use rayon::prelude::*;

/// Integrated autocorrelation time via Geyer's initial-positive-sequence
/// truncation: τ = 2 Σ_k Γ_k − 1 over the pair sums Γ_k = ρ_{2k} + ρ_{2k+1},
/// stopping at the first non-positive pair.
///
/// A constant series has no autocorrelation structure to estimate; by
/// contract it returns the series length (degenerate: one effective sample).
pub fn iact(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return 1.0;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if var <= 0.0 || !var.is_finite() {
        return n as f64;
    }
    let max_lag = n - 1;
    let acov = fft::autocovariance(series, max_lag);
    let c0 = acov[0];
    let mut tau = 0.0;
    let mut k = 0usize;
    loop {
        let l1 = 2 * k;
        let l2 = 2 * k + 1;
        if l1 >= acov.len() {
            break;
        }
        let rho1 = acov[l1] / c0;
        let rho2 = if l2 < acov.len() { acov[l2] / c0 } else { 0.0 };
        let gamma = rho1 + rho2;
        if gamma <= 0.0 {
            break;
        }
        tau += 2.0 * gamma;
        k += 1;
    }
    (tau - 1.0).max(1e-9)
}

/// Assignment of samples to mode centers.
#[derive(Debug, Clone)]
pub struct ModeCoverage {
    /// Number of modes holding at least 5% of the assigned mass.
    pub covered: usize,
    /// Fraction of assigned samples per mode.
    pub mass: Vec<f64>,
    /// How many samples fell within `radius` of some center.
    pub assigned: usize,
}

/// Assign each sample to its nearest mode center if within `radius`; a mode
/// counts as covered when it holds at least 5% of the assigned mass.
pub fn mode_coverage(samples: &[[f64; 2]], modes: &[[f64; 2]], radius: f64) -> ModeCoverage {
    let mut counts = vec![0usize; modes.len()];
    let mut assigned = 0usize;
    for s in samples {
        let mut best = f64::INFINITY;
        let mut best_k = 0usize;
        for (k, m) in modes.iter().enumerate() {
            let d2 = (s[0] - m[0]) * (s[0] - m[0]) + (s[1] - m[1]) * (s[1] - m[1]);
            if d2 < best {
                best = d2;
                best_k = k;
            }
        }
        if best.sqrt() <= radius {
            counts[best_k] += 1;
            assigned += 1;
        }
    }
    let mass: Vec<f64> = counts
        .iter()
        .map(|&c| if assigned > 0 { c as f64 / assigned as f64 } else { 0.0 })
        .collect();
    let covered = mass.iter().filter(|&&m| m >= 0.05).count();
    ModeCoverage { covered, mass, assigned }
}

/// Number of distinct mode discs (radius around each center) a trajectory
/// entered at least once — the bench's exploration count.
pub fn modes_visited(trajectory: &[[f64; 2]], modes: &[[f64; 2]], radius: f64) -> usize {
    let r2 = radius * radius;
    modes
        .iter()
        .filter(|m| {
            trajectory
                .iter()
                .any(|p| (p[0] - m[0]) * (p[0] - m[0]) + (p[1] - m[1]) * (p[1] - m[1]) <= r2)
        })
        .count()
}

/// 2-D histogram for the KL metric. Samples outside the range clamp into the
/// boundary bins.
#[derive(Debug, Clone)]
pub struct HistGrid {
    pub nx: usize,
    pub ny: usize,
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Default for HistGrid {
    fn default() -> Self {
        Self { nx: 64, ny: 64, xmin: -4.0, xmax: 4.0, ymin: -4.0, ymax: 4.0 }
    }
}

impl HistGrid {
    fn bin(&self, p: &[f64; 2]) -> usize {
        let fx = (p[0] - self.xmin) / (self.xmax - self.xmin);
        let fy = (p[1] - self.ymin) / (self.ymax - self.ymin);
        let ix = ((fx * self.nx as f64).floor() as i64).clamp(0, self.nx as i64 - 1) as usize;
        let iy = ((fy * self.ny as f64).floor() as i64).clamp(0, self.ny as i64 - 1) as usize;
        iy * self.nx + ix
    }

    fn counts(&self, samples: &[[f64; 2]]) -> Vec<usize> {
        let mut c = vec![0usize; self.nx * self.ny];
        for p in samples {
            c[self.bin(p)] += 1;
        }
        c
    }
}

/// KL(P ‖ Q) between the add-one-smoothed histograms of two sample sets.
/// Smoothing keeps the value finite even for disjoint point masses.
pub fn hist_kl(samples_p: &[[f64; 2]], samples_q: &[[f64; 2]], grid: &HistGrid) -> f64 {
    let cp = grid.counts(samples_p);
    let cq = grid.counts(samples_q);
    let b = (grid.nx * grid.ny) as f64;
    let np = samples_p.len() as f64 + b;
    let nq = samples_q.len() as f64 + b;
    let mut kl = 0.0;
    for (p, q) in cp.iter().zip(&cq) {
        let pp = (*p as f64 + 1.0) / np;
        let qq = (*q as f64 + 1.0) / nq;
        kl += pp * (pp / qq).ln();
    }
    kl
}

/// Energy-distance E-statistic between two point clouds:
/// 2·E‖A−B‖ − E‖A−A′‖ − E‖B−B′‖ (nonnegative, 0 iff equal distributions).
pub fn energy_distance(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let s = block_sums(a, b);
    e_stat(&s, a.len(), b.len())
}

struct PairSums {
    /// Packed upper-triangle distances of the pooled set (row-major by i<j),
    /// f32 to keep 2·10⁴ points within memory.
    tri: Vec<f32>,
    n_pool: usize,
}

fn block_sums(a: &[[f64; 2]], b: &[[f64; 2]]) -> PairSums {
    let pool: Vec<[f64; 2]> = a.iter().chain(b.iter()).copied().collect();
    let n = pool.len();
    let mut tri = vec![0f32; n * (n - 1) / 2];
    // each row i owns the contiguous slice of its j > i distances
    let mut rows: Vec<&mut [f32]> = Vec::with_capacity(n);
    let mut rest: &mut [f32] = &mut tri;
    for i in 0..n {
        let (head, tail) = rest.split_at_mut(n - 1 - i);
        rows.push(head);
        rest = tail;
    }
    rows.par_iter_mut().enumerate().for_each(|(i, row)| {
        let pi = pool[i];
        for (k, slot) in row.iter_mut().enumerate() {
            let pj = pool[i + 1 + k];
            let dx = pi[0] - pj[0];
            let dy = pi[1] - pj[1];
            *slot = ((dx * dx + dy * dy) as f32).sqrt();
        }
    });
    PairSums { tri, n_pool: n }
}

/// E-statistic given pooled pair distances and a labeling where the first
/// `n_a` pooled indices (after permutation `labels`) belong to A.
fn e_stat_for_labels(s: &PairSums, labels: &[bool], n_a: usize, n_b: usize) -> f64 {
    let n = s.n_pool;
    let mut s_aa = 0f64;
    let mut s_bb = 0f64;
    let mut s_ab = 0f64;
    let mut idx = 0usize;
    for i in 0..n {
        let li = labels[i];
        for j in i + 1..n {
            let d = s.tri[idx] as f64;
            idx += 1;
            match (li, labels[j]) {
                (true, true) => s_aa += d,
                (false, false) => s_bb += d,
                _ => s_ab += d,
            }
        }
    }
    let (na, nb) = (n_a as f64, n_b as f64);
    2.0 * s_ab / (na * nb) - 2.0 * s_aa / (na * na) - 2.0 * s_bb / (nb * nb)
}

fn e_stat(s: &PairSums, n_a: usize, n_b: usize) -> f64 {
    let labels: Vec<bool> = (0..s.n_pool).map(|i| i < n_a).collect();
    e_stat_for_labels(s, &labels, n_a, n_b)
}

#[derive(Debug, Clone)]
pub struct EnergyDistanceTest {
    pub statistic: f64,
    /// Lower bound on the permutation p-value (exact when `perms_run` hit
    /// the full count).
    pub p_value: f64,
    pub perms_run: usize,
    pub exceedances: usize,
    /// Rejected at α = 0.01?
    pub reject_at_001: bool,
}

/// Permutation two-sample test on the energy-distance statistic.
///
/// Runs up to `n_perms` label permutations of the pooled cloud. Stops early
/// once enough permutations exceed the observed statistic that the p-value
/// is guaranteed above 0.01 — early stopping can only be triggered by
/// evidence *for* the null, so the α = 0.01 verdict is unaffected.
pub fn energy_distance_test(
    a: &[[f64; 2]],
    b: &[[f64; 2]],
    n_perms: usize,
    seed: u64,
) -> EnergyDistanceTest {
    let sums = block_sums(a, b);
    let (na, nb) = (a.len(), b.len());
    let observed = e_stat(&sums, na, nb);

    // reject iff (1 + k) / (1 + B) ≤ 0.01, i.e. k ≤ 0.01(1 + B) − 1;
    // once k exceeds that, the verdict is fixed and we can stop.
    let reject_max = (0.01 * (n_perms as f64 + 1.0) - 1.0).floor();
    let mut exceed = 0usize;
    let mut run = 0usize;
    let batch = rayon::current_num_threads().max(1) * 2;
    while run < n_perms {
        let take = batch.min(n_perms - run);
        let hits: usize = (run..run + take)
            .into_par_iter()
            .map(|p| {
                let mut rng = rng::stream(seed, Domain::Trial, p as u64);
                let mut idx: Vec<usize> = (0..na + nb).collect();
                idx.shuffle(&mut rng);
                let mut labels = vec![false; na + nb];
                for &i in idx.iter().take(na) {
                    labels[i] = true;
                }
                let stat = e_stat_for_labels(&sums, &labels, na, nb);
                usize::from(stat >= observed)
            })
            .sum();
        exceed += hits;
        run += take;
        if exceed as f64 > reject_max {
            break;
        }
    }
    // p-value of the permutations actually run (conservative under the
    // early stop, which only fires on evidence for the null)
    let p = (1.0 + exceed as f64) / (1.0 + run as f64);
    EnergyDistanceTest {
        statistic: observed,
        p_value: p,
        perms_run: run,
        exceedances: exceed,
        reject_at_001: run == n_perms && exceed as f64 <= reject_max,
    }
}

/// Sliced 2-Wasserstein distance: average over `n_angles` equally spaced
/// projections of the 1-D W2 between the projected samples (equal sizes).
pub fn sliced_w2(a: &[[f64; 2]], b: &[[f64; 2]], n_angles: usize) -> f64 {
    assert_eq!(a.len(), b.len(), "sliced_w2 needs equal sample counts");
    let mut total = 0.0;
    for k in 0..n_angles {
        let theta = std::f64::consts::PI * k as f64 / n_angles as f64;
        let (c, s) = (theta.cos(), theta.sin());
        let mut pa: Vec<f64> = a.iter().map(|p| c * p[0] + s * p[1]).collect();
        let mut pb: Vec<f64> = b.iter().map(|p| c * p[0] + s * p[1]).collect();
        pa.sort_by(|x, y| x.partial_cmp(y).unwrap());
        pb.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let w2sq: f64 =
            pa.iter().zip(&pb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / pa.len() as f64;
        total += w2sq;
    }
    (total / n_angles as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng as _;
    use rand_distr::StandardNormal;

    #[test]
    fn iact_white_noise_is_one() {
        let mut r = rng::seeded(1);
        let xs: Vec<f64> = (0..100_000).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        let tau = iact(&xs);
        assert!((tau - 1.0).abs() < 0.1, "IACT {tau}");
    }

    #[test]
    fn iact_ar1_closed_form() {
        // AR(1) with coefficient 0.9: τ = (1+0.9)/(1−0.9) = 19.
        let mut r = rng::seeded(2);
        let mut x = 0.0;
        let xs: Vec<f64> = (0..200_000)
            .map(|_| {
                x = 0.9 * x + r.sample::<f64, _>(StandardNormal);
                x
            })
            .collect();
        let tau = iact(&xs);
        assert!((tau - 19.0).abs() < 0.15 * 19.0, "IACT {tau} vs 19");
    }

    #[test]
    fn iact_constant_series_is_degenerate() {
        let xs = vec![3.5; 1000];
        assert_eq!(iact(&xs), 1000.0);
    }

    #[test]
    fn mode_coverage_exact_hits() {
        let modes = [[2.0, 2.0], [-2.0, 2.0], [-2.0, -2.0], [2.0, -2.0]];
        let samples: Vec<[f64; 2]> = modes.iter().cycle().take(400).copied().collect();
        let cov = mode_coverage(&samples, &modes, 0.9);
        assert_eq!(cov.covered, 4);
        assert_eq!(cov.assigned, 400);
        for m in &cov.mass {
            assert!((m - 0.25).abs() < 1e-12);
        }

        let one = vec![[2.0, 2.0]; 100];
        let cov = mode_coverage(&one, &modes, 0.9);
        assert_eq!(cov.covered, 1);

        let none: Vec<[f64; 2]> = vec![[100.0, 100.0]; 10];
        let cov = mode_coverage(&none, &modes, 0.9);
        assert_eq!(cov.covered, 0);
        assert_eq!(cov.assigned, 0);
    }

    #[test]
    fn hist_kl_contracts() {
        let grid = HistGrid::default();
        let mut r = rng::seeded(3);
        let a: Vec<[f64; 2]> = (0..20_000)
            .map(|_| [r.sample::<f64, _>(StandardNormal), r.sample::<f64, _>(StandardNormal)])
            .collect();
        assert_eq!(hist_kl(&a, &a, &grid), 0.0);

        // disjoint point masses: large but finite under smoothing
        let p = vec![[-3.0, -3.0]; 1000];
        let q = vec![[3.0, 3.0]; 1000];
        let kl = hist_kl(&p, &q, &grid);
        assert!(kl.is_finite() && kl > 1.0, "kl = {kl}");
    }

    #[test]
    fn hist_kl_noise_floor_of_independent_mog4_draws() {
        // the metric's noise floor: two independent 10⁵-point draws of the
        // same mixture measure ≈ 0.009 on this grid (frozen with headroom);
        // model comparisons are read against this floor
        let grid = HistGrid::default();
        let mut r1 = rng::stream(3, crate::rng::Domain::Data, 0);
        let mut r2 = rng::stream(3, crate::rng::Domain::Data, 1);
        let a = crate::data::gen_mog4(100_000, &mut r1);
        let b = crate::data::gen_mog4(100_000, &mut r2);
        let kl = hist_kl(&a, &b, &grid);
        assert!(kl < 0.012, "noise floor drifted: {kl}");
        assert!(kl > 0.0);
    }

    #[test]
    fn energy_distance_zero_for_identical_and_positive_for_shifted() {
        let mut r = rng::seeded(4);
        let a: Vec<[f64; 2]> = (0..500)
            .map(|_| [r.sample::<f64, _>(StandardNormal), r.sample::<f64, _>(StandardNormal)])
            .collect();
        let same = energy_distance(&a, &a);
        assert!(same.abs() < 1e-9, "E(a,a) = {same}");
        let b: Vec<[f64; 2]> = a.iter().map(|p| [p[0] + 3.0, p[1]]).collect();
        assert!(energy_distance(&a, &b) > 1.0);
    }

    #[test]
    fn energy_distance_test_calibration() {
        let mut r = rng::seeded(5);
        let mut draw = |n: usize| -> Vec<[f64; 2]> {
            (0..n)
                .map(|_| [r.sample::<f64, _>(StandardNormal), r.sample::<f64, _>(StandardNormal)])
                .collect()
        };
        // same law: must not reject (and should stop early)
        let a = draw(800);
        let b = draw(800);
        let t = energy_distance_test(&a, &b, 199, 0);
        assert!(!t.reject_at_001, "false rejection: {t:?}");
        assert!(t.p_value > 0.01);

        // clearly different law: must reject
        let c: Vec<[f64; 2]> = draw(800).iter().map(|p| [p[0] + 1.0, p[1]]).collect();
        let t = energy_distance_test(&a, &c, 199, 0);
        assert!(t.reject_at_001, "missed a unit shift: {t:?}");
    }

    #[test]
    fn sliced_w2_basics() {
        let mut r = rng::seeded(6);
        let a: Vec<[f64; 2]> = (0..2000)
            .map(|_| [r.sample::<f64, _>(StandardNormal), r.sample::<f64, _>(StandardNormal)])
            .collect();
        assert!(sliced_w2(&a, &a, 16) < 1e-12);
        let b: Vec<[f64; 2]> = a.iter().map(|p| [p[0] + 2.0, p[1] + 2.0]).collect();
        let d = sliced_w2(&a, &b, 16);
        // mean slice displacement of a diagonal shift of length 2√2 is
        // 2√2·E|cos| = 2√2·(2/π) ≈ 1.80 in W2 terms
        assert!(d > 1.0 && d < 3.0, "sliced W2 {d}");
    }
}
