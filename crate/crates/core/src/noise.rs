//! Seeded additive white Gaussian noise.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synthesis::{seeded_rng, TestSignal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub seed: u64,
    pub mean: f64,
    /// Noise variance (not standard deviation).
    pub variance: f64,
    pub length: usize,
}

impl NoiseSpec {
    /// Zero-mean spec.
    pub fn new(seed: u64, variance: f64, length: usize) -> Self {
        Self {
            seed,
            mean: 0.0,
            variance,
            length,
        }
    }

    pub fn with_mean(mut self, mean: f64) -> Self {
        self.mean = mean;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.variance.is_finite() && self.variance > 0.0) {
            return Err(Error::invalid(format!(
                "noise variance must be positive, got {}",
                self.variance
            )));
        }
        if !self.mean.is_finite() {
            return Err(Error::invalid("noise mean must be finite"));
        }
        if self.length == 0 {
            return Err(Error::invalid("noise length must be at least 1"));
        }
        Ok(())
    }
}

/// A clean signal, the noise realization added to it, and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisySignal {
    pub clean: TestSignal,
    pub noise: Vec<f64>,
    pub noisy: Vec<f64>,
    pub spec: NoiseSpec,
}

impl NoisySignal {
    pub fn len(&self) -> usize {
        self.noisy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.noisy.is_empty()
    }
}

pub fn generate_awgn(spec: &NoiseSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let std_dev = spec.variance.sqrt();
    let mut rng = seeded_rng(spec.seed);
    Ok((0..spec.length)
        .map(|_| spec.mean + std_dev * rng.sample::<f64, _>(StandardNormal))
        .collect())
}

/// `noisy[i] = clean[i] + noise[i]`.
pub fn contaminate(clean: &TestSignal, spec: &NoiseSpec) -> Result<NoisySignal> {
    if spec.length != clean.len() {
        return Err(Error::invalid(format!(
            "noise length {} does not match signal length {}",
            spec.length,
            clean.len()
        )));
    }
    let noise = generate_awgn(spec)?;
    let noisy = clean
        .samples
        .iter()
        .zip(&noise)
        .map(|(x, n)| x + n)
        .collect();
    Ok(NoisySignal {
        clean: clean.clone(),
        noise,
        noisy,
        spec: *spec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::{synthesize, SignalProvenance};

    fn moments(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        (mean, x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n)
    }

    #[test]
    fn variance_band() {
        // 4 * 30 * sqrt(2/1024) = 5.30, rounded outward.
        let n = generate_awgn(&NoiseSpec::new(1, 30.0, 1024)).unwrap();
        let (_, var) = moments(&n);
        assert!((25.4..=34.6).contains(&var), "{var}");
        assert_eq!(n, generate_awgn(&NoiseSpec::new(1, 30.0, 1024)).unwrap());
    }

    #[test]
    fn mean_band() {
        let n = generate_awgn(&NoiseSpec::new(1, 1.0, 4096).with_mean(5.0)).unwrap();
        let (mean, _) = moments(&n);
        assert!((4.9..=5.1).contains(&mean), "{mean}");
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate_awgn(&NoiseSpec::new(1, 0.0, 8)).is_err());
        assert!(generate_awgn(&NoiseSpec::new(1, -1.0, 8)).is_err());
        assert!(generate_awgn(&NoiseSpec::new(1, 1.0, 0)).is_err());
    }

    #[test]
    fn zero_signal_gives_noise_back() {
        let clean = TestSignal {
            samples: vec![0.0; 64],
            provenance: SignalProvenance {
                seed: 0,
                length: 64,
                m: 4,
                scale: 1.0,
            },
        };
        let noisy = contaminate(&clean, &NoiseSpec::new(9, 3.0, 64)).unwrap();
        assert_eq!(noisy.noisy, noisy.noise);
    }

    #[test]
    fn tiny_noise_leaves_signal() {
        let clean = synthesize(3, 256, 4, 1.0).unwrap();
        let noisy = contaminate(&clean, &NoiseSpec::new(9, 1e-12, 256)).unwrap();
        let err = noisy
            .noisy
            .iter()
            .zip(&clean.samples)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4);
    }

    #[test]
    fn reconstruction_and_lengths() {
        let clean = synthesize(3, 256, 4, 2.0).unwrap();
        let noisy = contaminate(&clean, &NoiseSpec::new(9, 35.0, 256)).unwrap();
        assert_eq!(noisy.len(), 256);
        assert_eq!(noisy.noise.len(), 256);
        assert_eq!(noisy.clean, clean);
        for i in 0..256 {
            assert_eq!(noisy.noisy[i], clean.samples[i] + noisy.noise[i]);
            assert!((noisy.noisy[i] - noisy.noise[i] - clean.samples[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn length_mismatch() {
        let clean = synthesize(3, 256, 4, 1.0).unwrap();
        assert!(matches!(
            contaminate(&clean, &NoiseSpec::new(9, 1.0, 128)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn whiteness_smoke() {
        let n = generate_awgn(&NoiseSpec::new(11, 40.0, 4096)).unwrap();
        let (mean, var) = moments(&n);
        let len = n.len();
        let bound = 5.0 / (len as f64).sqrt();
        for lag in 1..=20 {
            let r = (0..len - lag)
                .map(|i| (n[i] - mean) * (n[i + lag] - mean))
                .sum::<f64>()
                / (len as f64 * var);
            assert!(r.abs() <= bound, "lag {lag}: {r}");
        }
    }
}
