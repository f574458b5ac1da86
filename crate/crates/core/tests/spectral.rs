use std::f64::consts::PI;

use gaussopt_core::pipeline::Phase;
use gaussopt_core::synthesis::cutoff_bin;
use gaussopt_core::{
    build_kernel, empirical_optimum, frequency_response, run_training, smooth, snr_out, synthesize,
    ExperimentConfig,
};

/// O(L^2) reference transform, independent of the FFT used in the crate.
fn naive_dft(x: &[f64]) -> Vec<(f64, f64)> {
    let len = x.len();
    (0..len)
        .map(|k| {
            x.iter().enumerate().fold((0.0, 0.0), |(re, im), (n, v)| {
                let phase = -2.0 * PI * ((k * n) % len) as f64 / len as f64;
                (re + v * phase.cos(), im + v * phase.sin())
            })
        })
        .collect()
}

fn magnitude((re, im): (f64, f64)) -> f64 {
    re.hypot(im)
}

#[test]
fn synthesized_signals_are_band_limited() {
    for (seed, m) in [(1, 4), (2, 5), (3, 8), (4, 10)] {
        let len = 512;
        let signal = synthesize(seed, len, m, 1.0).unwrap();
        let spectrum = naive_dft(&signal.samples);
        let peak = spectrum.iter().copied().map(magnitude).fold(0.0, f64::max);
        let cut = cutoff_bin(len, m);
        for (k, &bin) in spectrum.iter().enumerate().take(len - cut + 1).skip(cut) {
            assert!(
                magnitude(bin) <= 1e-9 * peak,
                "m {m} bin {k}: {}",
                magnitude(bin)
            );
        }
        assert!(spectrum[1..cut].iter().any(|&b| magnitude(b) > 1e-3 * peak));
    }
}

#[test]
fn parseval_holds() {
    let signal = synthesize(11, 1024, 7, 10.0).unwrap();
    let time: f64 = signal.samples.iter().map(|v| v * v).sum();
    let freq: f64 = naive_dft(&signal.samples)
        .into_iter()
        .map(|b| magnitude(b).powi(2))
        .sum::<f64>()
        / 1024.0;
    assert!((time - freq).abs() <= 1e-9 * time, "{time} vs {freq}");
}

#[test]
fn smoothing_multiplies_spectrum_by_response() {
    let len = 256;
    let x = synthesize(5, len, 3, 1.0).unwrap().samples;
    for sigma in [0.4, 1.0, 2.5] {
        let k = build_kernel(sigma).unwrap();
        let before = naive_dft(&x);
        let after = naive_dft(&smooth(&x, &k).unwrap());
        let peak = before.iter().copied().map(magnitude).fold(0.0, f64::max);
        for (bin, ((re0, im0), (re1, im1))) in before.into_iter().zip(after).enumerate() {
            let h = frequency_response(&k, 2.0 * PI * bin as f64 / len as f64);
            let err = (re1 - h * re0).hypot(im1 - h * im0);
            assert!(err <= 1e-9 * peak, "sigma {sigma} bin {bin}: {err}");
        }
    }
}

#[test]
fn training_optimum_recomputes_from_scratch() {
    let config = ExperimentConfig::default();
    let outcome = run_training(&config).unwrap();
    assert_eq!(outcome.rows.len(), 9);
    for (row, curve) in outcome.rows.iter().zip(&outcome.curves) {
        let noisy = config
            .noisy_signal(Phase::Training, curve.m, curve.variance)
            .unwrap();
        let (sigma, s_o) = empirical_optimum(&curve.curve).unwrap();
        assert_eq!(row.sigma_opt_emp, sigma);
        let estimate = smooth(&noisy.noisy, &build_kernel(sigma).unwrap()).unwrap();
        let again = snr_out(&noisy.clean.samples, &estimate).unwrap();
        assert!((again - s_o).abs() <= 1e-12 * s_o);
        assert!((row.s_i - curve.curve.s_i_linear).abs() == 0.0);
    }
}

#[test]
fn holdout_noise_is_fresh() {
    let config = ExperimentConfig::default();
    for &variance in &config.holdout_variances {
        let train = config.noisy_signal(Phase::Training, 5, variance).unwrap();
        let hold = config.noisy_signal(Phase::Holdout, 5, variance).unwrap();
        assert_eq!(train.clean.samples, hold.clean.samples);
        assert_ne!(train.noise, hold.noise);
    }
}
