//! Diagnostics: Hessian spectra and H_J quantities, depth/width sweeps,
//! chain autocorrelation, mode coverage, histogram KL, two-sample tests,
//! oscillation spectra, and transient step sizes.
//!
//! Everything here is a pure function of its inputs; trials and permutation
//! batches parallelize with rayon without affecting results.

mod depth_width;
mod fft;
mod hessian;
mod metrics;
mod spectra;
mod svg;

pub use depth_width::{depth_width_experiment, DepthWidthRow};
pub use hessian::{hessian, hj_quantities, HessianReport};
pub use metrics::{
    energy_distance, energy_distance_test, hist_kl, iact, mode_coverage, modes_visited,
    sliced_w2, EnergyDistanceTest, HistGrid, ModeCoverage,
};
pub use spectra::{spectrum_peak, transient_step, SpectrumPeak};
pub use svg::write_line_chart;
