//! Kernel-width sweep and its empirical optimum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfilter::{build_kernel, smooth};
use crate::metrics::{snr_in, snr_out};
use crate::noise::{NoiseSpec, NoisySignal};
use crate::synthesis::SignalProvenance;

/// Grid points are rounded to this many decimals so that `0.3 + 7 * 0.01`
/// prints as `0.37`.
const GRID_DECIMALS: i32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub step: f64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            sigma_min: 0.3,
            sigma_max: 3.5,
            step: 0.01,
        }
    }
}

impl SweepGrid {
    pub fn new(sigma_min: f64, sigma_max: f64, step: f64) -> Result<Self> {
        let grid = Self {
            sigma_min,
            sigma_max,
            step,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        let finite =
            self.sigma_min.is_finite() && self.sigma_max.is_finite() && self.step.is_finite();
        if !finite || self.sigma_min <= 0.0 {
            return Err(Error::invalid("sigma_min must be positive and finite"));
        }
        if self.sigma_min >= self.sigma_max {
            return Err(Error::invalid(format!(
                "sigma_min ({}) must be below sigma_max ({})",
                self.sigma_min, self.sigma_max
            )));
        }
        if self.step <= 0.0 {
            return Err(Error::invalid("sweep step must be positive"));
        }
        Ok(())
    }

    /// `floor((max - min) / step) + 1`, both endpoints included when the
    /// range is a whole number of steps.
    pub fn len(&self) -> usize {
        ((self.sigma_max - self.sigma_min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sigmas(&self) -> Vec<f64> {
        let scale = 10f64.powi(GRID_DECIMALS);
        (0..self.len())
            .map(|i| ((self.sigma_min + i as f64 * self.step) * scale).round() / scale)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub sigma_g: f64,
    pub s_o_linear: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepProvenance {
    pub signal: SignalProvenance,
    pub noise: NoiseSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub points: Vec<SweepPoint>,
    pub s_i_linear: f64,
    pub provenance: Option<SweepProvenance>,
}

impl SweepCurve {
    pub fn sigmas(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.sigma_g)
    }

    pub fn s_o_at(&self, sigma: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|p| (p.sigma_g - sigma).abs() < 1e-9)
            .map(|p| p.s_o_linear)
    }
}

/// Output SNR of the noisy signal smoothed with a kernel of width `sigma`.
pub fn output_snr(noisy: &NoisySignal, sigma: f64) -> Result<f64> {
    let kernel = build_kernel(sigma)?;
    let estimate = smooth(&noisy.noisy, &kernel)?;
    snr_out(&noisy.clean.samples, &estimate)
}

/// Evaluate `S_o` at every grid width. Points are computed in parallel and
/// collected in grid order.
pub fn run_sweep(noisy: &NoisySignal, grid: &SweepGrid) -> Result<SweepCurve> {
    grid.validate()?;
    let s_i_linear = snr_in(&noisy.clean.samples, &noisy.noise)?;
    let points = grid
        .sigmas()
        .into_par_iter()
        .map(|sigma_g| {
            output_snr(noisy, sigma_g).map(|s_o_linear| SweepPoint {
                sigma_g,
                s_o_linear,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepCurve {
        points,
        s_i_linear,
        provenance: Some(SweepProvenance {
            signal: noisy.clean.provenance,
            noise: noisy.spec,
        }),
    })
}

/// Grid argmax of `S_o`; ties go to the smallest width.
pub fn empirical_optimum(curve: &SweepCurve) -> Result<(f64, f64)> {
    let mut best: Option<&SweepPoint> = None;
    for p in &curve.points {
        if best.is_none_or(|b| p.s_o_linear > b.s_o_linear) {
            best = Some(p);
        }
    }
    best.map(|p| (p.sigma_g, p.s_o_linear))
        .ok_or_else(|| Error::invalid("empty sweep curve"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::contaminate;
    use crate::synthesis::synthesize;

    fn curve(points: &[(f64, f64)]) -> SweepCurve {
        SweepCurve {
            points: points
                .iter()
                .map(|&(sigma_g, s_o_linear)| SweepPoint {
                    sigma_g,
                    s_o_linear,
                })
                .collect(),
            s_i_linear: 1.0,
            provenance: None,
        }
    }

    #[test]
    fn default_grid_has_321_points() {
        let sigmas = SweepGrid::default().sigmas();
        assert_eq!(sigmas.len(), 321);
        assert_eq!(sigmas[0], 0.3);
        assert_eq!(sigmas[1], 0.31);
        assert_eq!(sigmas[7], 0.37);
        assert_eq!(sigmas[320], 3.5);
        assert!(sigmas.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn grid_validation() {
        assert!(SweepGrid::new(1.0, 0.5, 0.01).is_err());
        assert!(SweepGrid::new(0.0, 0.5, 0.01).is_err());
        assert!(SweepGrid::new(0.1, 0.5, 0.0).is_err());
        assert_eq!(SweepGrid::new(0.5, 1.0, 0.25).unwrap().len(), 3);
    }

    #[test]
    fn optimum_unique_tie_and_boundary() {
        let c = curve(&[(1.16, 90.0), (1.17, 95.0), (1.18, 95.5), (1.19, 95.1)]);
        assert_eq!(empirical_optimum(&c).unwrap(), (1.18, 95.5));
        let c = curve(&[(1.0, 3.0), (1.1, 2.0), (1.2, 3.0)]);
        assert_eq!(empirical_optimum(&c).unwrap(), (1.0, 3.0));
        let c = curve(&[(0.3, 9.0), (0.4, 8.0), (0.5, 7.0)]);
        assert_eq!(empirical_optimum(&c).unwrap(), (0.3, 9.0));
        assert!(empirical_optimum(&curve(&[])).is_err());
    }

    #[test]
    fn bell_shape_and_determinism() {
        let clean = synthesize(17, 1024, 5, 10.0).unwrap();
        let noisy = contaminate(&clean, &NoiseSpec::new(18, 35.0, 1024)).unwrap();
        let grid = SweepGrid::default();
        let c = run_sweep(&noisy, &grid).unwrap();
        assert_eq!(c.points.len(), 321);
        let (_, best) = empirical_optimum(&c).unwrap();
        assert!(best > c.s_i_linear);
        assert!(c.s_o_at(3.5).unwrap() < c.s_i_linear);
        assert_eq!(c, run_sweep(&noisy, &grid).unwrap());
    }

    #[test]
    fn order_independent() {
        let clean = synthesize(2, 256, 4, 10.0).unwrap();
        let noisy = contaminate(&clean, &NoiseSpec::new(3, 30.0, 256)).unwrap();
        let grid = SweepGrid::new(0.5, 2.0, 0.05).unwrap();
        let c = run_sweep(&noisy, &grid).unwrap();
        for p in c.points.iter().rev() {
            assert_eq!(output_snr(&noisy, p.sigma_g).unwrap(), p.s_o_linear);
        }
    }
}
