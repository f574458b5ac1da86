//! Power, mean squared error and signal-to-noise ratios.
//!
//! Ratios are kept linear; `to_db` is for reporting only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrReport {
    pub s_i_linear: f64,
    pub s_o_linear: f64,
    pub s_i_db: f64,
    pub s_o_db: f64,
    pub mse: f64,
    pub p_signal: f64,
    pub p_noise: f64,
    pub p_error: f64,
}

impl SnrReport {
    /// Input and output SNR of `estimate` given the exact clean signal and
    /// the noise realization that was added to it.
    pub fn evaluate(clean: &[f64], noise: &[f64], estimate: &[f64]) -> Result<Self> {
        let p_signal = power(clean)?;
        let p_noise = power(noise)?;
        let p_error = mse(clean, estimate)?;
        let s_i_linear = snr_in(clean, noise)?;
        let s_o_linear = snr_out(clean, estimate)?;
        Ok(Self {
            s_i_linear,
            s_o_linear,
            s_i_db: to_db(s_i_linear),
            s_o_db: to_db(s_o_linear),
            mse: p_error,
            p_signal,
            p_noise,
            p_error,
        })
    }
}

pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Mean power `(1/N) sum x^2`.
pub fn power(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::invalid("power of an empty sequence"));
    }
    Ok(x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64)
}

pub fn mse(clean: &[f64], estimate: &[f64]) -> Result<f64> {
    if clean.len() != estimate.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            clean.len(),
            estimate.len()
        )));
    }
    if clean.is_empty() {
        return Err(Error::invalid("mean squared error of empty sequences"));
    }
    Ok(clean
        .iter()
        .zip(estimate)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / clean.len() as f64)
}

/// `P_signal / P_noise`.
pub fn snr_in(clean: &[f64], noise: &[f64]) -> Result<f64> {
    if clean.len() != noise.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            clean.len(),
            noise.len()
        )));
    }
    let p_noise = power(noise)?;
    if p_noise == 0.0 {
        return Err(Error::DivideByZero("noise power is zero"));
    }
    Ok(power(clean)? / p_noise)
}

/// `P_signal / P_error` with `P_error` the mean squared error of the estimate.
pub fn snr_out(clean: &[f64], estimate: &[f64]) -> Result<f64> {
    let p_error = mse(clean, estimate)?;
    if p_error == 0.0 {
        return Err(Error::DivideByZero(
            "estimate reproduces the signal exactly",
        ));
    }
    Ok(power(clean)? / p_error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::generate_white_sequence;

    #[test]
    fn power_examples() {
        assert_eq!(power(&[2.0; 10]).unwrap(), 4.0);
        assert_eq!(power(&[0.0; 10]).unwrap(), 0.0);
        let c: Vec<f64> = (0..64)
            .map(|k| (2.0 * std::f64::consts::PI * k as f64 * 8.0 / 64.0).cos())
            .collect();
        assert!((power(&c).unwrap() - 0.5).abs() < 1e-12);
        assert!(power(&[]).is_err());
    }

    #[test]
    fn mse_examples() {
        let x = generate_white_sequence(1, 100).unwrap();
        let y = generate_white_sequence(2, 100).unwrap();
        assert_eq!(mse(&x, &x).unwrap(), 0.0);
        assert_eq!(mse(&[0.0; 7], &[1.0; 7]).unwrap(), 1.0);
        let mut acc = 0.0;
        for i in 0..100 {
            let d = x[i] - y[i];
            acc += d * d;
        }
        assert!((mse(&x, &y).unwrap() - acc / 100.0).abs() < 1e-15);
        assert_eq!(mse(&x, &y).unwrap(), mse(&y, &x).unwrap());
        assert!(mse(&x, &y[..50]).is_err());
    }

    #[test]
    fn snr_in_examples() {
        assert!((snr_in(&[2.0; 8], &[2f64.sqrt(); 8]).unwrap() - 2.0).abs() < 1e-12);
        let x = generate_white_sequence(3, 64).unwrap();
        let n = generate_white_sequence(4, 64).unwrap();
        let x3: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        let ratio = snr_in(&x3, &n).unwrap() / snr_in(&x, &n).unwrap();
        assert!((ratio - 9.0).abs() < 1e-12);
        assert!(matches!(
            snr_in(&x, &[0.0; 64]),
            Err(Error::DivideByZero(_))
        ));
    }

    #[test]
    fn snr_out_examples() {
        let x = generate_white_sequence(3, 64).unwrap();
        assert!(matches!(snr_out(&x, &x), Err(Error::DivideByZero(_))));
        let shifted: Vec<f64> = x.iter().map(|v| v + 0.5).collect();
        let expected = power(&x).unwrap() / 0.25;
        assert!((snr_out(&x, &shifted).unwrap() - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn all_pass_identity() {
        for seed in 0..20 {
            let x = generate_white_sequence(seed, 512).unwrap();
            let n: Vec<f64> = generate_white_sequence(seed + 100, 512)
                .unwrap()
                .iter()
                .map(|v| 5.0 * v)
                .collect();
            let noisy: Vec<f64> = x.iter().zip(&n).map(|(a, b)| a + b).collect();
            let si = snr_in(&x, &n).unwrap();
            let so = snr_out(&x, &noisy).unwrap();
            assert!((si - so).abs() / si < 1e-10);
        }
    }

    #[test]
    fn report_fields_consistent() {
        let x = generate_white_sequence(3, 64).unwrap();
        let n = generate_white_sequence(4, 64).unwrap();
        let est: Vec<f64> = x.iter().zip(&n).map(|(a, b)| a + 0.5 * b).collect();
        let r = SnrReport::evaluate(&x, &n, &est).unwrap();
        assert_eq!(r.mse, r.p_error);
        assert!((r.s_i_db - 10.0 * r.s_i_linear.log10()).abs() < 1e-12);
        assert!((r.s_o_db - 10.0 * r.s_o_linear.log10()).abs() < 1e-12);
        assert!((from_db(r.s_o_db) - r.s_o_linear).abs() / r.s_o_linear < 1e-12);
        let v: serde_json::Value = serde_json::to_value(r).unwrap();
        assert_eq!(v.as_object().unwrap().len(), 8);
    }
}
