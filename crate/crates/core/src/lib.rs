//! Optimal Gaussian smoothing of band-limited signals in additive white
//! Gaussian noise.
//!
//! The crate synthesizes band-limited test signals, contaminates them with
//! seeded noise, sweeps the width of a truncated Gaussian smoothing kernel,
//! fits a reciprocal quadratic surface to the resulting output SNR and
//! predicts the optimal kernel width in closed form.

pub mod error;
pub mod fitting;
pub mod gfilter;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod pipeline;
pub mod sweep;
pub mod synthesis;

pub use error::{Error, Result};
pub use fitting::{
    fit_bw_polynomials, fit_surface, predict_sigma_opt, predict_so_max, published_coefficients,
    BwModel, FitSample, ModelFile, SurfaceCoeffs, SurfaceFit,
};
pub use gfilter::{build_kernel, frequency_response, smooth, Kernel};
pub use metrics::{mse, power, snr_in, snr_out, SnrReport};
pub use noise::{contaminate, generate_awgn, NoiseSpec, NoisySignal};
pub use pipeline::{run_holdout, run_training, ExperimentConfig, ReportRow, SeedSet};
pub use sweep::{empirical_optimum, run_sweep, SweepCurve, SweepGrid};
pub use synthesis::{synthesize, TestSignal};
