use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gaussopt_core::fitting::{ModelFile, SurfaceCoeffs};
use gaussopt_core::io;
use gaussopt_core::metrics::{to_db, SnrReport};
use gaussopt_core::noise::{contaminate, NoiseSpec};
use gaussopt_core::pipeline::{run_holdout, run_training, ExperimentConfig, Phase, SeedSet};
use gaussopt_core::synthesis::{synthesize, SignalProvenance, TestSignal};
use gaussopt_core::{build_kernel, empirical_optimum, run_sweep, smooth};
use serde::Serialize;

mod error;

use error::{CliError, CliResult};

/// Bundled experiment configuration, used when `--config` is absent.
const DEFAULT_CONFIG: &str = include_str!("../../../configs/default.toml");

#[derive(Debug, Parser)]
#[command(
    name = "gaussopt",
    version,
    about = "Find the Gaussian smoothing width that maximizes output SNR"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a band-limited test signal.
    Synth(SynthArgs),
    /// Add seeded white Gaussian noise to a signal.
    Noise(NoiseArgs),
    /// Smooth a signal with a truncated Gaussian kernel.
    Filter(FilterArgs),
    /// Sweep the kernel width for one (m, variance) configuration.
    Sweep(SweepArgs),
    /// Run the training bed and write the fitted model.
    Fit(FitArgs),
    /// Evaluate the closed-form optimum of a fitted model.
    Predict(PredictArgs),
    /// Run training and holdout and write both reports and the model.
    Reproduce(FitArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    seed: u64,
    /// Signal length, a power of two.
    #[arg(long)]
    length: usize,
    /// Boxcar length; the signal keeps frequencies below fs/m.
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Output CSV; provenance goes to the `.json` file beside it.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct NoiseArgs {
    /// Clean signal CSV.
    #[arg(long)]
    signal: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Noise variance.
    #[arg(long)]
    variance: f64,
    #[arg(long, default_value_t = 0.0)]
    mean: f64,
    /// Noisy signal CSV; metadata goes to the `.json` file beside it.
    #[arg(short, long)]
    output: PathBuf,
    /// Also write the noise realization to this CSV.
    #[arg(long)]
    noise_output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FilterArgs {
    /// Signal CSV to smooth.
    #[arg(long)]
    input: PathBuf,
    /// Kernel width in samples.
    #[arg(long)]
    sigma: f64,
    #[arg(short, long)]
    output: PathBuf,
    /// Write the kernel taps as JSON.
    #[arg(long)]
    kernel_output: Option<PathBuf>,
    /// Clean reference; when given, the SNR report is printed as JSON.
    #[arg(long)]
    clean: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Experiment config (TOML). Defaults to the bundled configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the signal length.
    #[arg(long)]
    length: Option<usize>,
    /// Override the signal amplitude scale.
    #[arg(long)]
    scale: Option<f64>,
    /// Override the master seed.
    #[arg(long)]
    master_seed: Option<u64>,
    #[arg(long)]
    sigma_min: Option<f64>,
    #[arg(long)]
    sigma_max: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
}

impl ConfigArgs {
    fn load(&self) -> CliResult<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::from_toml_str(DEFAULT_CONFIG)?,
        };
        if let Some(length) = self.length {
            config.length = length;
        }
        if let Some(scale) = self.scale {
            config.amplitude_scale = scale;
        }
        if let Some(master) = self.master_seed {
            config.seeds = SeedSet {
                master,
                ..config.seeds
            };
        }
        if let Some(v) = self.sigma_min {
            config.grid.sigma_min = v;
        }
        if let Some(v) = self.sigma_max {
            config.grid.sigma_max = v;
        }
        if let Some(v) = self.step {
            config.grid.step = v;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value_t = 5)]
    m: usize,
    /// Noise variance.
    #[arg(long, default_value_t = 35.0)]
    variance: f64,
    /// Override the signal seed derived from the config.
    #[arg(long)]
    signal_seed: Option<u64>,
    /// Override the noise seed derived from the config.
    #[arg(long)]
    noise_seed: Option<u64>,
    /// Curve CSV.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Training m values, overriding the config (comma separated).
    #[arg(long, value_delimiter = ',')]
    training_m: Option<Vec<usize>>,
    /// Directory for the model and report files.
    #[arg(short, long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Model JSON written by `fit` or `reproduce`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    bw: f64,
    /// Input SNR as a linear power ratio.
    #[arg(long)]
    si: f64,
}

#[derive(Serialize)]
struct NoisyMetadata<'a> {
    signal: Option<&'a SignalProvenance>,
    noise: &'a NoiseSpec,
    s_i_linear: f64,
    s_i_db: f64,
}

fn load_test_signal(path: &Path) -> CliResult<TestSignal> {
    let samples = io::read_signal_csv(path)?;
    let sidecar = io::sidecar_path(path);
    let provenance = if sidecar.exists() {
        io::read_json::<SignalProvenance>(&sidecar, "signal provenance")?
    } else {
        SignalProvenance {
            seed: 0,
            length: samples.len(),
            m: 0,
            scale: 1.0,
        }
    };
    if provenance.length != samples.len() {
        return Err(CliError::Validation(format!(
            "{} holds {} samples but its provenance says L = {}",
            path.display(),
            samples.len(),
            provenance.length
        )));
    }
    Ok(TestSignal {
        samples,
        provenance,
    })
}

fn cmd_synth(args: &SynthArgs) -> CliResult<()> {
    let signal = synthesize(args.seed, args.length, args.m, args.scale)?;
    io::write_signal_csv(&args.output, &signal.samples)?;
    io::write_json(io::sidecar_path(&args.output), &signal.provenance)?;
    eprintln!(
        "wrote {} samples to {}",
        signal.len(),
        args.output.display()
    );
    Ok(())
}

fn cmd_noise(args: &NoiseArgs) -> CliResult<()> {
    let clean = load_test_signal(&args.signal)?;
    let spec = NoiseSpec::new(args.seed, args.variance, clean.len()).with_mean(args.mean);
    let noisy = contaminate(&clean, &spec)?;
    let s_i = gaussopt_core::snr_in(&noisy.clean.samples, &noisy.noise)?;
    io::write_signal_csv(&args.output, &noisy.noisy)?;
    let has_provenance = io::sidecar_path(&args.signal).exists();
    io::write_json(
        io::sidecar_path(&args.output),
        &NoisyMetadata {
            signal: has_provenance.then_some(&clean.provenance),
            noise: &spec,
            s_i_linear: s_i,
            s_i_db: to_db(s_i),
        },
    )?;
    if let Some(path) = &args.noise_output {
        io::write_signal_csv(path, &noisy.noise)?;
    }
    println!("s_i_linear={s_i}");
    Ok(())
}

fn cmd_filter(args: &FilterArgs) -> CliResult<()> {
    let input = io::read_signal_csv(&args.input)?;
    let kernel = build_kernel(args.sigma)?;
    let output = smooth(&input, &kernel)?;
    io::write_signal_csv(&args.output, &output)?;
    if let Some(path) = &args.kernel_output {
        io::write_json(path, &kernel)?;
    }
    if let Some(clean_path) = &args.clean {
        let clean = io::read_signal_csv(clean_path)?;
        if clean.len() != input.len() {
            return Err(CliError::Validation(
                "clean reference and input differ in length".into(),
            ));
        }
        let noise: Vec<f64> = input.iter().zip(&clean).map(|(y, x)| y - x).collect();
        let report = SnrReport::evaluate(&clean, &noise, &output)?;
        print!("{}", io::to_json_string(&report));
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let config = args.config.load()?;
    let signal_seed = args
        .signal_seed
        .unwrap_or_else(|| config.seeds.signal_seed(args.m));
    let noise_seed = args.noise_seed.unwrap_or_else(|| {
        config
            .seeds
            .noise_seed(Phase::Training, args.m, args.variance)
    });
    let clean = synthesize(signal_seed, config.length, args.m, config.amplitude_scale)?;
    let noisy = contaminate(
        &clean,
        &NoiseSpec::new(noise_seed, args.variance, config.length),
    )?;
    let curve = run_sweep(&noisy, &config.grid)?;
    io::write_curve_csv(&args.output, &curve)?;
    let (sigma, s_o) = empirical_optimum(&curve)?;
    println!(
        "s_i_linear={} sigma_opt={sigma} s_o_max={s_o} points={}",
        curve.s_i_linear,
        curve.points.len()
    );
    Ok(())
}

fn fit_config(args: &FitArgs) -> CliResult<ExperimentConfig> {
    let mut config = args.config.load()?;
    if let Some(ms) = &args.training_m {
        config.training_m = ms.clone();
    }
    config.validate()?;
    Ok(config)
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", dir.display())))
}

fn train_and_write(config: &ExperimentConfig, out_dir: &Path) -> CliResult<ModelFile> {
    create_dir(out_dir)?;
    let outcome = run_training(config)?;
    for warning in outcome.warnings() {
        eprintln!("warning: {warning}");
    }
    let model = ModelFile::new(&outcome.model, outcome.solver_summary());
    io::write_model(out_dir.join("model.json"), &model)?;
    io::write_report_csv(out_dir.join("training_report.csv"), &outcome.rows)?;
    Ok(model)
}

fn cmd_fit(args: &FitArgs) -> CliResult<()> {
    let config = fit_config(args)?;
    train_and_write(&config, &args.out_dir)?;
    eprintln!(
        "wrote model.json and training_report.csv to {}",
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_reproduce(args: &FitArgs) -> CliResult<()> {
    let config = fit_config(args)?;
    let model = train_and_write(&config, &args.out_dir)?;
    let rows = run_holdout(&model.model(), &config)?;
    io::write_report_csv(args.out_dir.join("holdout_report.csv"), &rows)?;
    eprintln!(
        "wrote model.json, training_report.csv and holdout_report.csv to {}",
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_predict(args: &PredictArgs) -> CliResult<()> {
    let model = io::read_model(&args.model).map_err(CliError::Model)?;
    let coeffs: SurfaceCoeffs = model.model().coeffs_at(args.bw);
    let sigma = coeffs.sigma_opt(args.si)?;
    let s_o = coeffs.so_max(args.si)?;
    println!("sigma_opt={sigma}");
    println!("so_max={s_o}");
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Noise(a) => cmd_noise(a),
        Command::Filter(a) => cmd_filter(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Reproduce(a) => cmd_reproduce(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_config_is_the_default() {
        assert_eq!(
            ExperimentConfig::from_toml_str(DEFAULT_CONFIG).unwrap(),
            ExperimentConfig::default()
        );
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
