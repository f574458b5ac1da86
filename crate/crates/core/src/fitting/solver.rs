//! Least-squares solver for the reciprocal quadratic surface.
//!
//! The model `S_o = 1 / (p . phi(sigma, S_i))` has a denominator that is
//! linear in the parameters, so a linear fit of `1 / S_o` gives a starting
//! point. Damped Gauss-Newton (Levenberg-Marquardt with Marquardt scaling)
//! then minimizes the squared residuals of `S_o` itself.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;
pub const RELATIVE_TOLERANCE: f64 = 1e-10;

/// Smallest accepted ratio of extreme singular values of the scaled design.
const RANK_TOLERANCE: f64 = 1e-10;
const LAMBDA_INIT: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e16;

#[derive(Debug, Clone)]
pub(crate) struct SolverOutput {
    pub params: [f64; 6],
    pub iterations: usize,
    pub converged: bool,
}

/// Regressors `[1, sigma, s_i, sigma^2, s_i^2, sigma s_i]` for one sample.
pub(crate) fn regressors(sigma: f64, s_i: f64) -> [f64; 6] {
    [1.0, sigma, s_i, sigma * sigma, s_i * s_i, sigma * s_i]
}

struct Problem {
    /// Design matrix with unit max-abs columns.
    design: DMatrix<f64>,
    scales: [f64; 6],
    target: DVector<f64>,
}

impl Problem {
    fn denominators(&self, q: &DVector<f64>) -> DVector<f64> {
        &self.design * q
    }

    fn feasible(den: &DVector<f64>) -> bool {
        den.iter().all(|&d| d > 0.0 && d.is_finite())
    }

    fn residuals(&self, den: &DVector<f64>) -> DVector<f64> {
        self.target.zip_map(den, |y, d| y - 1.0 / d)
    }

    fn unscale(&self, q: &DVector<f64>) -> [f64; 6] {
        std::array::from_fn(|j| q[j] / self.scales[j])
    }
}

fn solve_least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    if max.is_nan() || max <= 0.0 || min / max < RANK_TOLERANCE {
        return Err(Error::DegenerateData(format!(
            "design matrix is rank deficient (singular value ratio {:.3e})",
            if max > 0.0 { min / max } else { 0.0 }
        )));
    }
    svd.solve(b, 0.0)
        .map_err(|e| Error::DegenerateData(e.to_string()))
}

pub(crate) fn fit(rows: &[[f64; 6]], s_o: &[f64]) -> Result<SolverOutput> {
    let n = rows.len();
    let mut scales = [0.0f64; 6];
    for row in rows {
        for (s, v) in scales.iter_mut().zip(row) {
            *s = s.max(v.abs());
        }
    }
    if scales.contains(&0.0) {
        return Err(Error::DegenerateData(
            "a regressor column is identically zero".into(),
        ));
    }
    let design = DMatrix::from_fn(n, 6, |i, j| rows[i][j] / scales[j]);
    let problem = Problem {
        design,
        scales,
        target: DVector::from_column_slice(s_o),
    };

    let reciprocal = problem.target.map(|y| 1.0 / y);
    let mut q = solve_least_squares(&problem.design, &reciprocal)?;
    let mut den = problem.denominators(&q);
    if !Problem::feasible(&den) {
        // Weighting by S_o^2 linearizes the direct residual around the data.
        let weights = problem.target.map(|y| y * y);
        let weighted = DMatrix::from_fn(n, 6, |i, j| problem.design[(i, j)] * weights[i]);
        let rhs = reciprocal.component_mul(&weights);
        q = solve_least_squares(&weighted, &rhs)?;
        den = problem.denominators(&q);
        if !Problem::feasible(&den) {
            return Err(Error::DegenerateData(
                "no starting point keeps the surface denominator positive".into(),
            ));
        }
    }

    let mut residual = problem.residuals(&den);
    let mut objective = residual.norm_squared();
    let mut lambda = LAMBDA_INIT;
    let mut converged = objective == 0.0;
    let mut iterations = 0;

    while !converged && iterations < MAX_ITERATIONS {
        iterations += 1;
        let jacobian = DMatrix::from_fn(n, 6, |i, j| problem.design[(i, j)] / (den[i] * den[i]));
        let normal = jacobian.transpose() * &jacobian;
        let gradient = jacobian.transpose() * &residual;

        let mut accepted = None;
        while lambda <= LAMBDA_MAX {
            let mut damped = normal.clone();
            for j in 0..6 {
                damped[(j, j)] += lambda * normal[(j, j)].max(f64::MIN_POSITIVE);
            }
            let step = damped.cholesky().map(|c| c.solve(&(-&gradient)));
            if let Some(step) = step {
                let trial = &q + step;
                let trial_den = problem.denominators(&trial);
                if Problem::feasible(&trial_den) {
                    let trial_res = problem.residuals(&trial_den);
                    let trial_obj = trial_res.norm_squared();
                    if trial_obj < objective {
                        accepted = Some((trial, trial_den, trial_res, trial_obj));
                        break;
                    }
                }
            }
            lambda *= 10.0;
        }

        match accepted {
            Some((trial, trial_den, trial_res, trial_obj)) => {
                let change = (objective - trial_obj) / objective;
                q = trial;
                den = trial_den;
                residual = trial_res;
                objective = trial_obj;
                lambda = (lambda / 10.0).max(1e-12);
                if change < RELATIVE_TOLERANCE || objective == 0.0 {
                    converged = true;
                }
            }
            // No damping level reduces the objective: a local minimum.
            None => converged = true,
        }
    }

    Ok(SolverOutput {
        params: problem.unscale(&q),
        iterations,
        converged,
    })
}
