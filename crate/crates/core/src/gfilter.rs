//! Truncated discrete Gaussian kernel and circular smoothing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Centered Gaussian taps on `[-ceil(3 sigma), ceil(3 sigma)]`, renormalized
/// to unit sum after truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    sigma: f64,
    radius: usize,
    taps: Vec<f64>,
}

/// Height of the continuous unit-area Gaussian at `t`.
pub fn gaussian_density(sigma: f64, t: f64) -> f64 {
    (-(t * t) / (2.0 * sigma * sigma)).exp() / (2.0 * std::f64::consts::PI * sigma * sigma).sqrt()
}

/// Radius of the kernel for a given width, `ceil(3 sigma)`.
pub fn kernel_radius(sigma: f64) -> usize {
    (3.0 * sigma).ceil() as usize
}

impl Kernel {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Always true: construction renormalizes the truncated taps.
    pub fn normalized(&self) -> bool {
        true
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("kernel serializes")
    }
}

pub fn build_kernel(sigma: f64) -> Result<Kernel> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid(format!(
            "kernel sigma must be positive, got {sigma}"
        )));
    }
    let radius = kernel_radius(sigma);
    // Taps are mirrored from one evaluated half so symmetry is exact.
    let half: Vec<f64> = (0..=radius)
        .map(|j| gaussian_density(sigma, j as f64))
        .collect();
    let mut taps: Vec<f64> = half.iter().rev().chain(&half[1..]).copied().collect();
    let total: f64 = half[0] + 2.0 * half[1..].iter().rev().sum::<f64>();
    for t in &mut taps {
        *t /= total;
    }
    Ok(Kernel {
        sigma,
        radius,
        taps,
    })
}

/// Circular convolution `out[k] = sum_{j=-r}^{r} x[(k + j) mod L] taps[r + j]`.
pub fn smooth(x: &[f64], kernel: &Kernel) -> Result<Vec<f64>> {
    let len = x.len();
    if kernel.len() > len {
        return Err(Error::invalid(format!(
            "kernel of {} taps is longer than the signal ({len} samples)",
            kernel.len()
        )));
    }
    let r = kernel.radius;
    let mut out = vec![0.0; len];
    for (i, &tap) in kernel.taps.iter().enumerate() {
        // offset j = i - r, source index (k + j) mod L
        let shift = (i + len - r) % len;
        let (head, tail) = x.split_at(shift);
        for (o, &v) in out.iter_mut().zip(tail.iter().chain(head)) {
            *o += tap * v;
        }
    }
    Ok(out)
}

/// Real frequency response `sum_j taps[j] cos(omega (j - r))` of the symmetric kernel.
pub fn frequency_response(kernel: &Kernel, omega: f64) -> f64 {
    let r = kernel.radius as f64;
    kernel
        .taps
        .iter()
        .enumerate()
        .map(|(j, t)| t * (omega * (j as f64 - r)).cos())
        .sum()
}

/// Continuous-domain response `exp(-omega^2 sigma^2 / 2)`.
pub fn ideal_response(sigma: f64, omega: f64) -> f64 {
    (-omega * omega * sigma * sigma / 2.0).exp()
}
