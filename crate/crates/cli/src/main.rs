use clap::{Parser, Subcommand};
use poslab_cli::{config, experiments, HarnessError};
use std::path::PathBuf;
use std::process::ExitCode;

/// Numerical positivity laboratory for radial Schrodinger operators.
#[derive(Parser)]
#[command(name = "poslab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config.
    ///
    /// Exit codes: 0 = verdict pass, 1 = verdict fail, 2 = invalid config
    /// or a run that could not be set up. The POSLAB_OUT environment
    /// variable overrides the output directory.
    Run {
        /// Experiment name: pw-identity, smoothing-abc, brezis-kato,
        /// caccioppoli, regularity, liouville, subquadratic, pp,
        /// counterexample or resolvent.
        experiment: String,
        /// Path to the TOML configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default from config; POSLAB_OUT wins over both).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed of the randomized suites.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Refinement sweep: rerun at this many grid-doubling levels and
        /// fit the convergence slope.
        #[arg(long)]
        refine: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            experiment,
            config,
            out,
            seed,
            refine,
        } => {
            if !experiments::EXPERIMENTS.contains(&experiment.as_str()) {
                eprintln!(
                    "error: unknown experiment '{experiment}' (expected one of {:?})",
                    experiments::EXPERIMENTS
                );
                return ExitCode::from(2);
            }
            let cfg = match config::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let out_dir = std::env::var_os("POSLAB_OUT")
                .map(PathBuf::from)
                .or(out)
                .unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
            let result = match refine {
                Some(levels) => experiments::sweep(&experiment, &cfg, seed, levels),
                None => experiments::run(&experiment, &cfg, seed),
            };
            match result {
                Ok(report) => match report.write(&out_dir) {
                    Ok(path) => {
                        println!(
                            "{}: {} ({} stages) -> {}",
                            report.experiment,
                            if report.pass() { "pass" } else { "fail" },
                            report.stages.len(),
                            path.display()
                        );
                        for stage in &report.stages {
                            println!(
                                "  [{}] {}",
                                if stage.pass { "ok" } else { "FAIL" },
                                stage.label
                            );
                        }
                        if report.pass() {
                            ExitCode::SUCCESS
                        } else {
                            ExitCode::from(1)
                        }
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        ExitCode::from(2)
                    }
                },
                Err(e @ HarnessError::InvalidConfig(_)) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
