//! Training bed, surface fitting and held-out validation.
//!
//! Training synthesizes one signal per boxcar length `m`, adds one noise
//! realization per variance, sweeps the kernel width for every pair, fits a
//! surface per `m` and interpolates the coefficients across `m`. Each
//! configuration then yields a [`ReportRow`] comparing the closed-form
//! optimum with the sweep's grid optimum. Holdout rows apply the trained
//! model to signals and noise it never saw.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{
    fit_bw_polynomials, fit_surface, predict_sigma_opt, predict_so_max, BwModel, FitSample,
    SolverSummary, SurfaceFit,
};
use crate::noise::{contaminate, NoiseSpec, NoisySignal};
use crate::sweep::{empirical_optimum, run_sweep, SweepCurve, SweepGrid};
use crate::synthesis::{synthesize, TestSignal};

/// Default amplitude of the synthesized signals. With unit-tap boxcars and
/// noise variances 30 to 40 it puts `S_i` between roughly 10 and 30.
pub const DEFAULT_AMPLITUDE_SCALE: f64 = 10.0;
pub const DEFAULT_MASTER_SEED: u64 = 1;

const SIGNAL_TAG: u64 = 0x5349_474e;
const TRAIN_TAG: u64 = 0x5452_4149;
const HOLDOUT_TAG: u64 = 0x484f_4c44;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Training,
    Holdout,
}

impl Phase {
    fn key(self) -> &'static str {
        match self {
            Phase::Training => "train",
            Phase::Holdout => "holdout",
        }
    }

    fn tag(self) -> u64 {
        match self {
            Phase::Training => TRAIN_TAG,
            Phase::Holdout => HOLDOUT_TAG,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ p))
}

/// Seeds for every signal and noise realization of an experiment.
///
/// Seeds are derived from `master`; explicit entries override them. Signal
/// overrides are keyed by `m` (`"5"`), noise overrides by phase, `m` and
/// variance (`"train/5/30"`, `"holdout/8/35"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedSet {
    pub master: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub signal: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub noise: BTreeMap<String, u64>,
}

impl Default for SeedSet {
    fn default() -> Self {
        Self::from_master(DEFAULT_MASTER_SEED)
    }
}

impl SeedSet {
    pub fn from_master(master: u64) -> Self {
        Self {
            master,
            signal: BTreeMap::new(),
            noise: BTreeMap::new(),
        }
    }

    pub fn signal_seed(&self, m: usize) -> u64 {
        self.signal
            .get(&m.to_string())
            .copied()
            .unwrap_or_else(|| derive_seed(self.master, &[SIGNAL_TAG, m as u64]))
    }

    pub fn noise_seed(&self, phase: Phase, m: usize, variance: f64) -> u64 {
        let key = format!("{}/{m}/{variance}", phase.key());
        self.noise.get(&key).copied().unwrap_or_else(|| {
            derive_seed(self.master, &[phase.tag(), m as u64, variance.to_bits()])
        })
    }
}

/// Fields missing from a config file take their default values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "L")]
    pub length: usize,
    pub amplitude_scale: f64,
    pub training_m: Vec<usize>,
    pub training_variances: Vec<f64>,
    pub holdout_m: Vec<usize>,
    pub holdout_variances: Vec<f64>,
    pub grid: SweepGrid,
    pub seeds: SeedSet,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            length: 1024,
            amplitude_scale: DEFAULT_AMPLITUDE_SCALE,
            training_m: vec![5, 7, 10],
            training_variances: vec![30.0, 35.0, 40.0],
            holdout_m: vec![8, 4, 12],
            holdout_variances: vec![30.0, 35.0, 40.0],
            grid: SweepGrid::default(),
            seeds: SeedSet::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self =
            toml::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::format("experiment config", path, msg),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !self.length.is_power_of_two() {
            return Err(Error::invalid(format!(
                "L must be a power of two, got {}",
                self.length
            )));
        }
        if !(self.amplitude_scale.is_finite() && self.amplitude_scale > 0.0) {
            return Err(Error::invalid("amplitude_scale must be positive"));
        }
        let mut distinct = self.training_m.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() < 3 {
            return Err(Error::invalid(format!(
                "training_m needs at least 3 distinct BW values, got {:?}",
                self.training_m
            )));
        }
        if self.training_variances.is_empty() {
            return Err(Error::invalid("training_variances is empty"));
        }
        let all_m = self.training_m.iter().chain(&self.holdout_m);
        if let Some(m) = all_m.clone().find(|&&m| m < 2 || m > self.length) {
            return Err(Error::invalid(format!(
                "smoothing length {m} is out of range"
            )));
        }
        let all_var = self
            .training_variances
            .iter()
            .chain(&self.holdout_variances);
        if let Some(v) = all_var.clone().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::invalid(format!(
                "noise variance {v} must be positive"
            )));
        }
        self.grid.validate()
    }

    fn cells(ms: &[usize], variances: &[f64]) -> Vec<(usize, f64)> {
        ms.iter()
            .flat_map(|&m| variances.iter().map(move |&v| (m, v)))
            .collect()
    }

    pub fn training_cells(&self) -> Vec<(usize, f64)> {
        Self::cells(&self.training_m, &self.training_variances)
    }

    pub fn holdout_cells(&self) -> Vec<(usize, f64)> {
        Self::cells(&self.holdout_m, &self.holdout_variances)
    }

    pub fn signal(&self, m: usize) -> Result<TestSignal> {
        synthesize(
            self.seeds.signal_seed(m),
            self.length,
            m,
            self.amplitude_scale,
        )
    }

    pub fn noisy_signal(&self, phase: Phase, m: usize, variance: f64) -> Result<NoisySignal> {
        let clean = self.signal(m)?;
        let spec = NoiseSpec::new(
            self.seeds.noise_seed(phase, m, variance),
            variance,
            self.length,
        );
        contaminate(&clean, &spec)
    }
}

/// One configuration's closed-form prediction next to its sweep optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub bw: f64,
    pub sigma_n_sq: f64,
    pub s_i: f64,
    /// `None` when the model has no valid optimum at this configuration.
    pub sigma_opt_pred: Option<f64>,
    pub sigma_opt_emp: f64,
    pub s_o_max_pred: Option<f64>,
    pub s_o_max_emp: f64,
}

impl ReportRow {
    pub fn sigma_deviation(&self) -> Option<f64> {
        self.sigma_opt_pred.map(|p| (p - self.sigma_opt_emp).abs())
    }

    pub fn so_max_relative_deviation(&self) -> Option<f64> {
        self.s_o_max_pred
            .map(|p| (p - self.s_o_max_emp).abs() / self.s_o_max_emp)
    }
}

/// A sweep together with the configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigCurve {
    pub m: usize,
    pub variance: f64,
    pub curve: SweepCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingOutcome {
    pub model: BwModel,
    pub rows: Vec<ReportRow>,
    pub fits: Vec<SurfaceFit>,
    pub curves: Vec<ConfigCurve>,
}

impl TrainingOutcome {
    pub fn solver_summary(&self) -> SolverSummary {
        SolverSummary {
            iterations: self.fits.iter().map(|f| f.iterations).max().unwrap_or(0),
            converged: self.fits.iter().all(|f| f.converged),
        }
    }

    /// Human-readable notes for fits that stopped at the iteration cap.
    pub fn warnings(&self) -> Vec<String> {
        self.fits
            .iter()
            .filter(|f| !f.converged)
            .map(|f| {
                format!(
                    "surface fit for bw {} stopped after {} iterations without converging",
                    f.coeffs.bw, f.iterations
                )
            })
            .collect()
    }
}

fn sweep_cells(
    config: &ExperimentConfig,
    phase: Phase,
    cells: &[(usize, f64)],
) -> Result<Vec<ConfigCurve>> {
    cells
        .par_iter()
        .map(|&(m, variance)| {
            let noisy = config.noisy_signal(phase, m, variance)?;
            let curve = run_sweep(&noisy, &config.grid)?;
            Ok(ConfigCurve { m, variance, curve })
        })
        .collect()
}

fn report_row(model: &BwModel, c: &ConfigCurve) -> Result<ReportRow> {
    let bw = c.m as f64;
    let s_i = c.curve.s_i_linear;
    let (sigma_opt_emp, s_o_max_emp) = empirical_optimum(&c.curve)?;
    Ok(ReportRow {
        bw,
        sigma_n_sq: c.variance,
        s_i,
        sigma_opt_pred: predict_sigma_opt(model, bw, s_i).ok(),
        sigma_opt_emp,
        s_o_max_pred: predict_so_max(model, bw, s_i).ok(),
        s_o_max_emp,
    })
}

/// Fit samples of every sweep point of the given curves.
pub fn fit_samples(curves: &[ConfigCurve], m: usize) -> Vec<FitSample> {
    curves
        .iter()
        .filter(|c| c.m == m)
        .flat_map(|c| {
            c.curve.points.iter().map(move |p| FitSample {
                sigma_g: p.sigma_g,
                s_i: c.curve.s_i_linear,
                s_o: p.s_o_linear,
                bw: m as f64,
            })
        })
        .collect()
}

pub fn run_training(config: &ExperimentConfig) -> Result<TrainingOutcome> {
    config.validate()?;
    let curves = sweep_cells(config, Phase::Training, &config.training_cells())?;

    let mut ms = config.training_m.clone();
    ms.sort_unstable();
    ms.dedup();
    let fits = ms
        .iter()
        .map(|&m| fit_surface(&fit_samples(&curves, m), m as f64))
        .collect::<Result<Vec<_>>>()?;
    let surfaces: Vec<_> = fits.iter().map(|f| f.coeffs).collect();
    let model = fit_bw_polynomials(&surfaces)?;

    let rows = curves
        .iter()
        .map(|c| report_row(&model, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrainingOutcome {
        model,
        rows,
        fits,
        curves,
    })
}

/// Apply a trained model to held-out configurations. Configurations where
/// the model has no valid optimum keep `None` predictions.
pub fn run_holdout(model: &BwModel, config: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    config.validate()?;
    let curves = sweep_cells(config, Phase::Holdout, &config.holdout_cells())?;
    curves.iter().map(|c| report_row(model, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let seeds = SeedSet::default();
        assert_eq!(seeds.signal_seed(5), SeedSet::default().signal_seed(5));
        assert_ne!(seeds.signal_seed(5), seeds.signal_seed(7));
        let a = seeds.noise_seed(Phase::Training, 5, 30.0);
        assert_ne!(a, seeds.noise_seed(Phase::Holdout, 5, 30.0));
        assert_ne!(a, seeds.noise_seed(Phase::Training, 5, 35.0));
        assert_ne!(a, seeds.noise_seed(Phase::Training, 7, 30.0));
    }

    #[test]
    fn seed_overrides() {
        let mut seeds = SeedSet::from_master(3);
        seeds.signal.insert("5".into(), 77);
        seeds.noise.insert("holdout/8/35".into(), 78);
        assert_eq!(seeds.signal_seed(5), 77);
        assert_eq!(seeds.noise_seed(Phase::Holdout, 8, 35.0), 78);
        assert_ne!(seeds.noise_seed(Phase::Training, 8, 35.0), 78);
    }

    #[test]
    fn config_toml_round_trip() {
        let config = ExperimentConfig::default();
        let text = config.to_toml_string();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), config);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let c =
            ExperimentConfig::from_toml_str("L = 512\n[grid]\nstep = 0.05\n[seeds]\nmaster = 9\n")
                .unwrap();
        assert_eq!(c.length, 512);
        assert_eq!(c.grid.step, 0.05);
        assert_eq!(c.grid.sigma_min, 0.3);
        assert_eq!(c.seeds.master, 9);
        assert_eq!(c.training_m, vec![5, 7, 10]);
        assert!(ExperimentConfig::from_toml_str("[grid]\nstpe = 0.1\n").is_err());
    }

    #[test]
    fn config_validation() {
        let c = ExperimentConfig {
            training_m: vec![5, 7, 7],
            ..ExperimentConfig::default()
        };
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("3 distinct BW"), "{err}");

        let c = ExperimentConfig {
            length: 1000,
            ..ExperimentConfig::default()
        };
        assert!(c.validate().is_err());

        let c = ExperimentConfig {
            holdout_variances: vec![-1.0],
            ..ExperimentConfig::default()
        };
        assert!(c.validate().is_err());

        let mut c = ExperimentConfig::default();
        c.holdout_m.clear();
        c.holdout_variances.clear();
        assert!(c.validate().is_ok());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = ExperimentConfig::default().to_toml_string() + "\nbogus = 1\n";
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            length: 256,
            training_m: vec![4, 5, 6],
            training_variances: vec![30.0, 35.0, 40.0],
            holdout_m: vec![],
            holdout_variances: vec![],
            grid: SweepGrid::new(0.3, 2.5, 0.05).unwrap(),
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn training_cardinality_and_order() {
        let config = small_config();
        let out = run_training(&config).unwrap();
        assert_eq!(out.rows.len(), 9);
        assert_eq!(out.fits.len(), 3);
        assert_eq!(out.model.surfaces.len(), 3);
        let cells: Vec<(f64, f64)> = out.rows.iter().map(|r| (r.bw, r.sigma_n_sq)).collect();
        assert_eq!(cells[0], (4.0, 30.0));
        assert_eq!(cells[8], (6.0, 40.0));
        assert!(out.rows.iter().all(|r| r.s_o_max_emp > r.s_i));
    }

    #[test]
    fn empty_holdout_gives_empty_report() {
        let config = small_config();
        let out = run_training(&config).unwrap();
        assert!(run_holdout(&out.model, &config).unwrap().is_empty());
    }
}
