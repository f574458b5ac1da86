//! Band-limited test signal construction.
//!
//! A test signal is built in three steps from a seeded white Gaussian
//! sequence:
//!
//! 1. circular convolution with a length-`m` boxcar of unit taps,
//! 2. removal of every DFT bin `k` with `ceil(L/m) <= k <= L - ceil(L/m)`,
//! 3. multiplication by an amplitude scale.
//!
//! # DFT convention
//!
//! The forward transform is unnormalized, `X[k] = sum_n x[n] e^{-2 pi i k n / L}`,
//! and the inverse carries the `1/L` factor. Under this convention the mean
//! power of a length-`L` sequence satisfies
//! `(1/L) sum |x[n]|^2 = (1/L^2) sum |X[k]|^2`.
//!
//! # Random numbers
//!
//! Sequences come from a ChaCha8 stream seeded with the 64-bit seed through
//! `SeedableRng::seed_from_u64`, transformed to standard normal deviates by
//! the ziggurat sampler of `rand_distr::StandardNormal`. Both are
//! value-stable, so a seed reproduces the same samples on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Provenance of a synthesized signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalProvenance {
    pub seed: u64,
    #[serde(rename = "L")]
    pub length: usize,
    pub m: usize,
    pub scale: f64,
}

impl SignalProvenance {
    /// Highest retained frequency as a fraction of the sampling rate.
    pub fn f_max_norm(&self) -> f64 {
        1.0 / self.m as f64
    }
}

/// Clean band-limited samples together with the parameters that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSignal {
    pub samples: Vec<f64>,
    pub provenance: SignalProvenance,
}

impl TestSignal {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.provenance.seed
    }

    pub fn smoothing_length(&self) -> usize {
        self.provenance.m
    }

    pub fn amplitude_scale(&self) -> f64 {
        self.provenance.scale
    }

    pub fn f_max_norm(&self) -> f64 {
        self.provenance.f_max_norm()
    }
}

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seeded i.i.d. standard normal samples.
pub fn generate_white_sequence(seed: u64, length: usize) -> Result<Vec<f64>> {
    if length == 0 {
        return Err(Error::invalid("white sequence length must be at least 1"));
    }
    let mut rng = seeded_rng(seed);
    Ok((0..length).map(|_| rng.sample(StandardNormal)).collect())
}

/// Circular convolution with the unit-tap boxcar `h[t] = 1, 0 <= t < m`.
///
/// `out[k] = sum_{j=0}^{m-1} x[(k - j) mod L]`.
pub fn boxcar_smooth(x: &[f64], m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::invalid("boxcar length must be positive"));
    }
    if m > x.len() {
        return Err(Error::invalid(format!(
            "boxcar length {m} exceeds signal length {}",
            x.len()
        )));
    }
    let len = x.len();
    let out = (0..len)
        .map(|k| (0..m).map(|j| x[(k + len - j) % len]).sum())
        .collect();
    Ok(out)
}

/// First zeroed bin for a length-`len` transform and smoothing length `m`.
pub fn cutoff_bin(len: usize, m: usize) -> usize {
    len.div_ceil(m)
}

/// Forward DFT of a real sequence under the module's convention.
pub fn dft(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    buf
}

/// Zero the DFT bins `ceil(L/m) ..= L - ceil(L/m)` and transform back.
pub fn lowpass_truncate(x: &[f64], m: usize) -> Result<Vec<f64>> {
    if x.len() < 4 {
        return Err(Error::invalid(
            "low-pass truncation needs at least 4 samples",
        ));
    }
    if m < 2 {
        return Err(Error::invalid("smoothing length m must be at least 2"));
    }
    let len = x.len();
    let mut spectrum = dft(x);
    let cut = cutoff_bin(len, m);
    if cut <= len - cut {
        spectrum[cut..=len - cut].fill(Complex64::new(0.0, 0.0));
    }
    FftPlanner::new()
        .plan_fft_inverse(len)
        .process(&mut spectrum);
    let norm = 1.0 / len as f64;
    Ok(spectrum.iter().map(|c| c.re * norm).collect())
}

/// Build a band-limited test signal: white sequence, boxcar, truncation, scaling.
pub fn synthesize(seed: u64, length: usize, m: usize, amplitude_scale: f64) -> Result<TestSignal> {
    if !length.is_power_of_two() {
        return Err(Error::invalid(format!(
            "signal length must be a power of two, got {length}"
        )));
    }
    if m < 2 {
        return Err(Error::invalid("smoothing length m must be at least 2"));
    }
    if !(amplitude_scale.is_finite() && amplitude_scale > 0.0) {
        return Err(Error::invalid(
            "amplitude scale must be positive and finite",
        ));
    }
    let white = generate_white_sequence(seed, length)?;
    let smoothed = boxcar_smooth(&white, m)?;
    let mut samples = lowpass_truncate(&smoothed, m)?;
    for v in &mut samples {
        *v *= amplitude_scale;
    }
    Ok(TestSignal {
        samples,
        provenance: SignalProvenance {
            seed,
            length,
            m,
            scale: amplitude_scale,
        },
    })
}
