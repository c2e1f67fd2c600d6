use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use attractor_lab::harness::{self, CertifyRequest, RunConfig};
use attractor_lab::Error;

#[derive(Parser)]
#[command(name = "attractor-lab", version, about = "Exponential attraction certificates for the strongly damped wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write report.json, trajectories.jsonl and decay.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-check a report and recompute its decay table from the trajectory file.
    Verify {
        #[arg(long)]
        report: PathBuf,
    },
    /// Print the certificate constants of given decay and growth functions.
    Certify {
        /// Decay function β, e.g. `exp:2,1,0.5`.
        #[arg(long)]
        beta: String,
        /// Growth function J, e.g. `affine:1,1`.
        #[arg(long = "J")]
        j: String,
        /// `auto`, `auto:<margin>` or an explicit step.
        #[arg(long)]
        tstar: String,
        /// Decay function α; needs `--r0`.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        r0: Option<f64>,
        /// Radius whose entering time is reported.
        #[arg(long)]
        radius: Option<f64>,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

/// Outcome of a subcommand that completed without a configuration error.
enum Verdict {
    Pass,
    Fail,
}

fn is_config_error(e: &anyhow::Error) -> bool {
    matches!(
        e.downcast_ref::<Error>(),
        Some(
            Error::Config(_)
                | Error::Json(_)
                | Error::InvalidGrid(_)
                | Error::IndexOutOfRange { .. }
                | Error::Precondition(_)
                | Error::InsufficientData { .. }
        )
    )
}

fn run(config: PathBuf, out: Option<PathBuf>, seed: Option<u64>) -> anyhow::Result<Verdict> {
    let mut cfg = RunConfig::load(&config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let dir = out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let output = harness::run_experiment(&cfg)?;
    let path = output.write(&dir).with_context(|| format!("writing outputs to {}", dir.display()))?;
    for c in &output.report.checks {
        println!(
            "{} {:<36} measured {:>14.6e} {:?} {:.6e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.relation,
            c.threshold
        );
    }
    println!("report written to {}", path.display());
    Ok(if output.report.all_passed { Verdict::Pass } else { Verdict::Fail })
}

fn verify(report: PathBuf) -> anyhow::Result<Verdict> {
    let outcome = harness::verify_report(&report)?;
    for name in &outcome.failed {
        println!("FAIL check {name}");
    }
    for msg in &outcome.inconsistencies {
        println!("INCONSISTENT {msg}");
    }
    println!(
        "{} checks, {} failed, {} inconsistencies, {} decay rows recomputed",
        outcome.checks,
        outcome.failed.len(),
        outcome.inconsistencies.len(),
        outcome.rows_recomputed
    );
    Ok(if outcome.passed() { Verdict::Pass } else { Verdict::Fail })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, seed } => run(config, out, seed),
        Command::Verify { report } => verify(report),
        Command::Certify { beta, j, tstar, alpha, r0, radius, json } => {
            let req = CertifyRequest { beta: &beta, j: &j, t_star: &tstar, alpha: alpha.as_deref(), r0, radius };
            harness::certify(&req).map_err(anyhow::Error::from).and_then(|out| {
                if json {
                    println!("{}", serde_json::to_string_pretty(&out)?);
                } else {
                    print!("{out}");
                }
                Ok(Verdict::Pass)
            })
        }
    };
    match result {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_config_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
