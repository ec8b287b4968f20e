use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lodetect::harness::blocks::{tag, trial_rng};
use lodetect::harness::{self, ExperimentKind, ExperimentSpec};
use lodetect::model::NetworkConfig;
use lodetect::randmat::{
    calibrate_eig_cdf_params, gram, scaled_max_eig_cdf, scaled_max_eig_ratio, standard_complex_gaussian,
};
use lodetect::{Error, Result};

mod selftest;

#[derive(Parser)]
#[command(name = "lodetect", version, about = "Passive eavesdropper detection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// ROC curves of every detector at Bob.
    Roc(RunArgs),
    /// Block-average secrecy rate against Alice's transmit power.
    PowerSweep(RunArgs),
    /// Rates and fused detection as Eve walks past the legitimate link.
    DistanceSweep(RunArgs),
    /// Rates and fused detection against Eve's antenna count.
    AntennaSweep(RunArgs),
    /// Fit the eigen-ratio law for the configured M and N_b.
    CalibrateEig(RunArgs),
    /// Quick internal consistency checks.
    Selftest,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Network configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Full experiment specification (JSON); --config then replaces its network part.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Divide M and the trial count by this factor.
    #[arg(long, default_value_t = 1)]
    scale: usize,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn build_spec(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentSpec> {
    let mut spec = match &args.spec {
        Some(p) => {
            let s = ExperimentSpec::load(p)?;
            if s.name != kind {
                return Err(Error::Config(format!(
                    "{} holds a {} spec, not {}",
                    p.display(),
                    s.name.name(),
                    kind.name()
                )));
            }
            s
        }
        None => ExperimentSpec::default_for(kind),
    };
    if let Some(p) = &args.config {
        spec.config = NetworkConfig::load(p)?;
    }
    if let Some(seed) = args.seed {
        spec.master_seed = seed;
    }
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    let spec = spec.scaled(args.scale);
    spec.validate()?;
    Ok(spec)
}

fn run_experiment(kind: ExperimentKind, args: &RunArgs) -> Result<()> {
    let spec = build_spec(kind, args)?;
    info!("{}: M={}, trials={}, seed={}", kind.name(), spec.config.m, spec.trials, spec.master_seed);
    let result = harness::run(&spec)?;
    let (csv, manifest) = harness::write_outputs(&result, &args.out)?;
    eprintln!(
        "{} rows in {:.1}s -> {} ({})",
        result.rows.len(),
        result.wall_time,
        csv.display(),
        manifest.display()
    );
    Ok(())
}

fn calibrate_eig(args: &RunArgs) -> Result<()> {
    let mut spec = build_spec(ExperimentKind::Roc, args)?;
    spec.trials = args.trials.unwrap_or(spec.eig_fit_trials).max(1000);
    let cfg = &spec.config;
    let params = calibrate_eig_cdf_params(
        cfg.m,
        cfg.n_b,
        spec.trials,
        &mut trial_rng(spec.master_seed, tag::EIG_FIT, 0),
    )?;
    // goodness of fit on fresh draws
    let mut rng = ChaCha8Rng::seed_from_u64(spec.master_seed ^ 0x5eed);
    let mut draws: Vec<f64> = (0..spec.trials)
        .map(|_| scaled_max_eig_ratio(&gram(&standard_complex_gaussian(cfg.n_b, cfg.m, &mut rng))))
        .collect();
    draws.sort_by(f64::total_cmp);
    let n = draws.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, &t) in draws.iter().enumerate() {
        let f = scaled_max_eig_cdf(&params, t)?.get();
        ks = ks.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    std::fs::create_dir_all(&args.out)?;
    let path = args.out.join("eig_params.json");
    let body = serde_json::json!({ "params": params, "ks_distance": ks, "trials": spec.trials });
    std::fs::write(&path, serde_json::to_string_pretty(&body)?)?;
    println!("{}", serde_json::to_string_pretty(&body)?);
    eprintln!("-> {}", path.display());
    Ok(())
}

fn install_threads(args: Option<&RunArgs>) -> Result<()> {
    if let Some(n) = args.and_then(|a| a.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start {n} threads: {e}")))?;
    }
    Ok(())
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_config() { 2 } else { 3 })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let args = match &cli.command {
        Command::Roc(a)
        | Command::PowerSweep(a)
        | Command::DistanceSweep(a)
        | Command::AntennaSweep(a)
        | Command::CalibrateEig(a) => Some(a),
        Command::Selftest => None,
    };
    if let Err(e) = install_threads(args) {
        return exit_for(&e);
    }
    let outcome = match &cli.command {
        Command::Roc(a) => run_experiment(ExperimentKind::Roc, a),
        Command::PowerSweep(a) => run_experiment(ExperimentKind::PowerSweep, a),
        Command::DistanceSweep(a) => run_experiment(ExperimentKind::DistanceSweep, a),
        Command::AntennaSweep(a) => run_experiment(ExperimentKind::AntennaSweep, a),
        Command::CalibrateEig(a) => calibrate_eig(a),
        Command::Selftest => {
            return if selftest::run() { ExitCode::SUCCESS } else { ExitCode::from(3) };
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(&e),
    }
}
