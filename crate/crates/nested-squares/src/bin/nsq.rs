use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nsq::runner::{exit_code, run_experiment, Experiment, ExperimentConfig, Overrides};
use nsq::NsqError;

/// Run one named experiment and write its reports.
#[derive(Parser, Debug)]
#[command(name = "nsq", version)]
struct Cli {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the experiment named in the config.
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    /// Worker threads for parallel trials.
    #[arg(long)]
    workers: Option<usize>,
    /// Also write the final simulated state, where the experiment keeps one.
    #[arg(long)]
    dump_state: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if n == 0 {
            log::error!("--workers must be at least 1");
            return ExitCode::from(2);
        }
        nsq::par::init_workers(n);
    }
    let text = match &cli.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => Some(t),
            Err(e) => {
                log::error!("cannot read {}: {e}", p.display());
                return ExitCode::from(2);
            }
        },
        None => None,
    };
    let ov = Overrides {
        experiment: cli.experiment,
        seed: cli.seed,
        out: cli.out.clone(),
    };
    let cfg = match ExperimentConfig::load(text.as_deref(), &ov) {
        Ok(c) => c,
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(2);
        }
    };
    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e @ NsqError::Config(_)) => {
            log::error!("{e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            log::error!("{} failed: {e}", cfg.experiment);
            return ExitCode::from(1);
        }
    };
    match report.write(&cfg.out_dir(), cli.dump_state) {
        Ok(paths) => {
            for p in paths {
                log::info!("wrote {}", p.display());
            }
        }
        Err(e) => {
            log::error!("writing reports: {e}");
            return ExitCode::from(1);
        }
    }
    if let Some(r) = report.first_failure() {
        log::error!("first failing check: {} (value {:e}, tolerance {:e})", r.check, r.value, r.tolerance);
    }
    ExitCode::from(exit_code(&report))
}
