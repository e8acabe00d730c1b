use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use volterra_lab::{exit, render, run, Experiment, ExperimentConfig, ExperimentReport, Format};

#[derive(Parser, Debug)]
#[command(name = "volterra-lab", version, about = "Spectral experiments on compact operators")]
struct Cli {
    experiment: Experiment,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override a configuration key, e.g. `--set dims=64,256`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads for the sweep.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn execute(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<ExperimentReport, volterra_lab::ConfigError> {
    #[cfg(feature = "parallel")]
    if let Some(n) = jobs {
        match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => return pool.install(|| run(cfg)),
            Err(e) => eprintln!("warning: could not start {n} workers ({e}); using the default pool"),
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
    run(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut cfg = match ExperimentConfig::load(cli.experiment, &cli.config, &cli.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit::CONFIG);
        }
    };
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(out) = cli.out {
        cfg.output_path = Some(out);
    }
    if cli.jobs == Some(0) {
        eprintln!("error: jobs: must be at least 1");
        return ExitCode::from(exit::CONFIG);
    }
    let problems = cfg.validate();
    if !problems.is_empty() {
        for p in problems {
            eprintln!("error: {p}");
        }
        return ExitCode::from(exit::CONFIG);
    }

    let report = match execute(&cfg, cli.jobs) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit::CONFIG);
        }
    };
    let text = match render(&report) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot render report: {e}");
            return ExitCode::from(exit::RUN);
        }
    };
    match &cfg.output_path {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(exit::RUN);
            }
        }
        None => print!("{text}"),
    }
    for r in report.records.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "run failed ({}): {}",
            volterra_lab::report::params_string(&r.params),
            r.error.as_deref().unwrap_or("")
        );
    }
    for v in report.verdicts.iter().filter(|v| v.error.is_some()) {
        eprintln!(
            "verdict failed ({}): {}",
            volterra_lab::report::params_string(&v.params),
            v.error.as_deref().unwrap_or("")
        );
    }
    if report.has_errors() {
        ExitCode::from(exit::RUN)
    } else {
        ExitCode::from(exit::OK)
    }
}
