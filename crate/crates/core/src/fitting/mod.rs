//! Reciprocal quadratic surface fits and the closed-form optimum.
//!
//! For a fixed bandwidth the output SNR is modelled as
//!
//! ```text
//! S_o = 1 / (a + b sigma + c S_i + d sigma^2 + f S_i^2 + g sigma S_i)
//! ```
//!
//! Each of the six coefficients is then expressed as a quadratic in the
//! bandwidth, which yields `sigma_opt = -(g S_i + b) / (2 d)` and the
//! matching peak `S_o^max` at any bandwidth. Bandwidth here is the boxcar
//! length `m` of the synthesized signal, and `S_i` is a linear power ratio.

mod fixture;
mod solver;

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fixture::{printed_constants, published_coefficients, PrintedQuadratic};
pub use solver::{MAX_ITERATIONS, RELATIVE_TOLERANCE};

/// Units in which `S_i` enters every fitted model.
pub const S_I_UNITS: &str = "linear";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSample {
    pub sigma_g: f64,
    pub s_i: f64,
    pub s_o: f64,
    pub bw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCoeffs {
    pub bw: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub f: f64,
    pub g: f64,
}

impl SurfaceCoeffs {
    pub fn from_array(bw: f64, p: [f64; 6]) -> Self {
        let [a, b, c, d, f, g] = p;
        Self {
            bw,
            a,
            b,
            c,
            d,
            f,
            g,
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.a, self.b, self.c, self.d, self.f, self.g]
    }

    pub fn denominator(&self, sigma: f64, s_i: f64) -> f64 {
        self.to_array()
            .iter()
            .zip(solver::regressors(sigma, s_i))
            .map(|(p, x)| p * x)
            .sum()
    }

    /// Modelled `S_o`.
    pub fn evaluate(&self, sigma: f64, s_i: f64) -> f64 {
        1.0 / self.denominator(sigma, s_i)
    }

    /// Stationary point of the surface in `sigma`: `-(g S_i + b) / (2 d)`.
    pub fn sigma_opt(&self, s_i: f64) -> Result<f64> {
        if self.d.is_nan() || self.d <= 0.0 {
            return Err(Error::OutOfDomain(format!(
                "d = {} at bw {} has no interior maximum",
                self.d, self.bw
            )));
        }
        let sigma = -(self.g * s_i + self.b) / (2.0 * self.d);
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(Error::OutOfDomain(format!(
                "optimal sigma {sigma} at bw {} and S_i {s_i} is not positive",
                self.bw
            )));
        }
        Ok(sigma)
    }

    /// Surface value at [`Self::sigma_opt`].
    pub fn so_max(&self, s_i: f64) -> Result<f64> {
        let sigma = self.sigma_opt(s_i)?;
        let den = self.denominator(sigma, s_i);
        if den.is_nan() || den <= 0.0 {
            return Err(Error::OutOfDomain(format!(
                "surface denominator {den} at the optimum is not positive"
            )));
        }
        Ok(1.0 / den)
    }
}

/// A surface fit with solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceFit {
    pub coeffs: SurfaceCoeffs,
    pub iterations: usize,
    /// False when the iteration cap was hit; `coeffs` is then the best point found.
    pub converged: bool,
}

fn distinct(values: impl Iterator<Item = f64>) -> usize {
    values.map(f64::to_bits).collect::<BTreeSet<_>>().len()
}

/// Least-squares fit of the reciprocal quadratic surface for one bandwidth.
pub fn fit_surface(samples: &[FitSample], bw: f64) -> Result<SurfaceFit> {
    if samples.len() < 12 {
        return Err(Error::invalid(format!(
            "surface fit needs at least 12 samples, got {}",
            samples.len()
        )));
    }
    if let Some(s) = samples.iter().find(|s| s.bw != bw) {
        return Err(Error::invalid(format!(
            "sample with bw {} passed to the fit for bw {bw}",
            s.bw
        )));
    }
    if samples
        .iter()
        .any(|s| !(s.sigma_g > 0.0 && s.s_i > 0.0 && s.s_o > 0.0 && s.s_o.is_finite()))
    {
        return Err(Error::invalid("fit samples must be positive and finite"));
    }
    let n_si = distinct(samples.iter().map(|s| s.s_i));
    if n_si < 2 {
        return Err(Error::DegenerateData(format!(
            "{n_si} distinct S_i value(s); the S_i terms are unidentifiable"
        )));
    }
    let n_sigma = distinct(samples.iter().map(|s| s.sigma_g));
    if n_sigma < 6 {
        return Err(Error::DegenerateData(format!(
            "{n_sigma} distinct sigma values; at least 6 are needed"
        )));
    }

    let rows: Vec<[f64; 6]> = samples
        .iter()
        .map(|s| solver::regressors(s.sigma_g, s.s_i))
        .collect();
    let s_o: Vec<f64> = samples.iter().map(|s| s.s_o).collect();
    let out = solver::fit(&rows, &s_o)?;
    Ok(SurfaceFit {
        coeffs: SurfaceCoeffs::from_array(bw, out.params),
        iterations: out.iterations,
        converged: out.converged,
    })
}

/// `alpha1 + alpha2 bw + alpha3 bw^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Quadratic(pub [f64; 3]);

impl Quadratic {
    pub fn eval(&self, bw: f64) -> f64 {
        let [a1, a2, a3] = self.0;
        a1 + bw * (a2 + bw * a3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadratics {
    pub a: Quadratic,
    pub b: Quadratic,
    pub c: Quadratic,
    pub d: Quadratic,
    pub f: Quadratic,
    pub g: Quadratic,
}

impl Quadratics {
    fn from_columns(cols: [[f64; 3]; 6]) -> Self {
        let [a, b, c, d, f, g] = cols.map(Quadratic);
        Self { a, b, c, d, f, g }
    }

    fn as_array(&self) -> [&Quadratic; 6] {
        [&self.a, &self.b, &self.c, &self.d, &self.f, &self.g]
    }
}

/// Surface coefficients as quadratics in bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct BwModel {
    pub quadratics: Quadratics,
    /// Per-bandwidth fits the quadratics were derived from.
    pub surfaces: Vec<SurfaceCoeffs>,
}

impl BwModel {
    pub fn coeffs_at(&self, bw: f64) -> SurfaceCoeffs {
        SurfaceCoeffs::from_array(bw, self.quadratics.as_array().map(|q| q.eval(bw)))
    }

    pub fn bw_values(&self) -> Vec<f64> {
        self.surfaces.iter().map(|s| s.bw).collect()
    }
}

/// Fit one quadratic in bandwidth per coefficient. Three distinct bandwidths
/// are interpolated exactly; more are fitted in the least-squares sense.
pub fn fit_bw_polynomials(per_bw: &[SurfaceCoeffs]) -> Result<BwModel> {
    let n_bw = distinct(per_bw.iter().map(|s| s.bw));
    if n_bw < 3 {
        return Err(Error::invalid(format!(
            "bandwidth quadratics need at least 3 distinct BW values, got {n_bw}"
        )));
    }
    let targets: Vec<[f64; 6]> = per_bw.iter().map(SurfaceCoeffs::to_array).collect();
    let mut cols = [[0.0; 3]; 6];

    if per_bw.len() == 3 {
        let v = Matrix3::from_fn(|i, j| per_bw[i].bw.powi(j as i32));
        let lu = v.lu();
        for (k, col) in cols.iter_mut().enumerate() {
            let rhs = Vector3::from_fn(|i, _| targets[i][k]);
            let sol = lu
                .solve(&rhs)
                .ok_or_else(|| Error::DegenerateData("singular Vandermonde system".into()))?;
            *col = [sol[0], sol[1], sol[2]];
        }
    } else {
        let v = DMatrix::from_fn(per_bw.len(), 3, |i, j| per_bw[i].bw.powi(j as i32));
        let svd = v.svd(true, true);
        for (k, col) in cols.iter_mut().enumerate() {
            let rhs = DVector::from_fn(per_bw.len(), |i, _| targets[i][k]);
            let sol = svd
                .solve(&rhs, 0.0)
                .map_err(|e| Error::DegenerateData(e.to_string()))?;
            *col = [sol[0], sol[1], sol[2]];
        }
    }

    Ok(BwModel {
        quadratics: Quadratics::from_columns(cols),
        surfaces: per_bw.to_vec(),
    })
}

/// Closed-form optimal kernel width at bandwidth `bw` and input SNR `s_i`.
pub fn predict_sigma_opt(model: &BwModel, bw: f64, s_i: f64) -> Result<f64> {
    model.coeffs_at(bw).sigma_opt(s_i)
}

/// Modelled peak output SNR at the closed-form optimum.
pub fn predict_so_max(model: &BwModel, bw: f64, s_i: f64) -> Result<f64> {
    model.coeffs_at(bw).so_max(s_i)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub iterations: usize,
    pub converged: bool,
}

/// On-disk form of a [`BwModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub bw_values: Vec<f64>,
    pub surface: Vec<SurfaceCoeffs>,
    pub quadratics: Quadratics,
    pub solver: SolverSummary,
    #[serde(default = "default_units")]
    pub s_i_units: String,
}

fn default_units() -> String {
    S_I_UNITS.to_string()
}

impl ModelFile {
    pub fn new(model: &BwModel, solver: SolverSummary) -> Self {
        Self {
            bw_values: model.bw_values(),
            surface: model.surfaces.clone(),
            quadratics: model.quadratics,
            solver,
            s_i_units: default_units(),
        }
    }

    pub fn model(&self) -> BwModel {
        BwModel {
            quadratics: self.quadratics,
            surfaces: self.surface.clone(),
        }
    }
}
