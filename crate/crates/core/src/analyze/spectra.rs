//! Oscillation spectra and transient step sizes of recorded chains.

use super::fft;
use crate::sampler::ChainRecord;

/// Dominant-frequency report for one latent unit.
#[derive(Debug, Clone)]
pub struct SpectrumPeak {
    pub layer: usize,
    pub unit: usize,
    /// Dominant nonzero frequency in Hz, or None when no bin is prominent
    /// (peak power < 3× the median nonzero-bin power).
    pub freq_hz: Option<f64>,
}

/// Welch segments for the averaged periodogram. Averaging tames the χ²
/// scatter of single-shot periodograms: a raw periodogram of white noise
/// essentially always has some bin several times the median, which would
/// make the 3×-median prominence rule meaningless.
const WELCH_SEGMENTS: usize = 8;
const MIN_SEGMENT: usize = 32;

fn welch_power(series: &[f64]) -> (Vec<f64>, usize) {
    let n = series.len();
    let n_seg = WELCH_SEGMENTS.min(n / MIN_SEGMENT).max(1);
    let seg_len = n / n_seg;
    let padded = fft::padded_len(seg_len);
    let mut acc = vec![0.0; padded / 2 + 1];
    for s in 0..n_seg {
        let seg = &series[s * seg_len..(s + 1) * seg_len];
        let p = fft::periodogram(seg);
        for (a, v) in acc.iter_mut().zip(&p) {
            *a += v;
        }
    }
    for a in acc.iter_mut() {
        *a /= n_seg as f64;
    }
    (acc, padded)
}

/// Per-unit dominant frequency of the latent trajectories, converted to Hz
/// via the physical interpretation of τ_z (`tau_z_ms` milliseconds).
///
/// The power spectrum is a Welch average over 8 segments; the record's
/// sampling interval (in τ_z units) fixes the frequency axis: bin k of a
/// segment of padded length n is k/(n·Δt) cycles per τ_z, i.e.
/// k/(n·Δt)·1000/tau_z_ms in Hz. A unit reports no peak when its best
/// nonzero bin has less than 3× the median nonzero-bin power.
pub fn spectrum_peak(record: &ChainRecord, tau_z_ms: f64) -> Vec<SpectrumPeak> {
    let mut out = Vec::new();
    if record.len() < 2 * MIN_SEGMENT {
        return out;
    }
    let n_layers = record.x_traj[0].len();
    let dt_tau = record.sample_interval_tau;
    for layer in 1..n_layers {
        let n_units = record.x_traj[0][layer].len();
        for unit in 0..n_units {
            let series = record.unit_series(layer, unit);
            let (power, padded) = welch_power(&series);
            let body = &power[1..];
            let mut best_k = 1usize;
            let mut best_p = f64::NEG_INFINITY;
            for (i, &p) in body.iter().enumerate() {
                if p > best_p {
                    best_p = p;
                    best_k = i + 1;
                }
            }
            let mut sorted: Vec<f64> = body.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = sorted[sorted.len() / 2];
            let freq_hz = if best_p >= 3.0 * median && median.is_finite() && best_p > 0.0 {
                let cycles_per_tau = best_k as f64 / (padded as f64 * dt_tau);
                Some(cycles_per_tau * 1000.0 / tau_z_ms)
            } else {
                None
            };
            out.push(SpectrumPeak { layer, unit, freq_hz });
        }
    }
    out
}

/// Mean over latent units of the maximum |Δx| between consecutive records
/// (the "average step size" transient measure).
pub fn transient_step(record: &ChainRecord) -> f64 {
    if record.len() < 2 {
        return 0.0;
    }
    let n_layers = record.x_traj[0].len();
    let mut total = 0.0;
    let mut units = 0usize;
    for layer in 1..n_layers {
        for unit in 0..record.x_traj[0][layer].len() {
            let mut max_step = 0.0f64;
            for t in 1..record.len() {
                let d = (record.x_traj[t][layer][unit] - record.x_traj[t - 1][layer][unit]).abs();
                max_step = max_step.max(d);
            }
            total += max_step;
            units += 1;
        }
    }
    if units == 0 {
        0.0
    } else {
        total / units as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_record(series: Vec<Vec<f64>>, dt_tau: f64) -> ChainRecord {
        // series: per unit; packed as layer 1 of a [0-unit obs, k-unit latent] stack
        let len = series[0].len();
        let x_traj: Vec<Vec<Vec<f64>>> = (0..len)
            .map(|t| vec![vec![], series.iter().map(|s| s[t]).collect()])
            .collect();
        ChainRecord {
            times: (0..len as u64).collect(),
            x_traj,
            v_traj: None,
            energy_traj: None,
            sample_interval_tau: dt_tau,
        }
    }

    #[test]
    fn sinusoid_lands_in_its_bin() {
        // 4 cycles per τ_z, sampled at Δt = 0.01 τ_z, 4096 samples
        let dt = 0.01;
        let f_true = 4.0; // cycles per tau_z
        let n = 4096;
        let series: Vec<f64> = (0..n)
            .map(|t| (2.0 * std::f64::consts::PI * f_true * dt * t as f64).sin())
            .collect();
        let rec = synthetic_record(vec![series], dt);
        let peaks = spectrum_peak(&rec, 10.0);
        assert_eq!(peaks.len(), 1);
        let hz = peaks[0].freq_hz.expect("strong sinusoid must be prominent");
        // 4 cycles per τ_z at τ_z = 10 ms → 400 Hz, within one Welch bin
        // (segments of 512 samples)
        let bin_hz = 1.0 / (512.0 * dt) * 100.0;
        assert!((hz - 400.0).abs() <= bin_hz + 1e-9, "{hz} Hz, bin {bin_hz}");
    }

    #[test]
    fn white_noise_has_no_prominent_peak() {
        use rand::Rng as _;
        for seed in [12u64, 13, 14, 15] {
            let mut r = crate::rng::seeded(seed);
            let series: Vec<f64> =
                (0..2048).map(|_| r.sample::<f64, _>(rand_distr::StandardNormal)).collect();
            let rec = synthetic_record(vec![series], 0.01);
            let peaks = spectrum_peak(&rec, 10.0);
            assert!(
                peaks[0].freq_hz.is_none(),
                "white noise flagged a peak at {:?} (seed {seed})",
                peaks[0].freq_hz
            );
        }
    }

    #[test]
    fn transient_of_constant_and_ramp() {
        let rec = synthetic_record(vec![vec![2.0; 100]], 0.01);
        assert_eq!(transient_step(&rec), 0.0);

        // ramp of slope s per unit time sampled at Δt: per-record change s·Δt
        let s = 3.0;
        let dt = 0.01;
        let ramp: Vec<f64> = (0..100).map(|t| s * dt * t as f64).collect();
        let rec = synthetic_record(vec![ramp], dt);
        assert!((transient_step(&rec) - s * dt).abs() < 1e-12);
    }
}
