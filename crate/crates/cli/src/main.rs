use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use agd_cli::{cmd_rates, cmd_run, cmd_verify, with_jobs, ExperimentConfig, Overrides, VerifyOptions};
use agd_core::verify::Fault;

#[derive(Parser)]
#[command(name = "agd", version, about = "Run, study and verify the generic AGD template")]
struct Cli {
    /// Worker threads for seed sweeps (default: one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML config, or a manifest.json from an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of seeds (overrides `seeds`).
    #[arg(long)]
    seeds: Option<usize>,
    /// Confidence level δ in (0, 1) (overrides `delta`).
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    /// Build Γ_t from α_{t+1}.
    GammaOffByOne,
}

#[derive(Subcommand)]
enum Command {
    /// One run per seed: trajectory tables plus a manifest.
    Run(Common),
    /// Log-log rate study over the configured horizons.
    Rates(Common),
    /// Lemma checks, certifiers and exact identities.
    Verify {
        /// Directory for verify.json and verify.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Inject a known defect; the suite should then fail.
        #[arg(long, value_enum)]
        fault: Option<FaultArg>,
        /// Smaller sample sizes.
        #[arg(long)]
        quick: bool,
    },
}

fn load(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&c.config)?;
    cfg.apply(&Overrides {
        seeds: c.seeds,
        delta: c.delta,
        out: c.out.clone(),
    })?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(c) => {
            let cfg = load(&c)?;
            let s = with_jobs(cli.jobs, || cmd_run(&cfg))??;
            let out = cfg.out_dir()?.display().to_string();
            println!(
                "eta = {:e}; {} run(s) written to {out}",
                s.manifest.prescriptions[0].eta,
                s.manifest.runs.len()
            );
            for r in &s.manifest.runs {
                if let agd_cli::manifest::RunStatus::Diverged { t, what } = &r.status {
                    eprintln!("seed {} diverged at t = {t} ({what}); {} rows kept", r.seed, r.rows);
                }
            }
            Ok(s.diverged == 0)
        }
        Command::Rates(c) => {
            let cfg = load(&c)?;
            let s = with_jobs(cli.jobs, || cmd_rates(&cfg))??;
            print!("{}", s.summary);
            Ok(s.passed())
        }
        Command::Verify { out, seed, fault, quick } => {
            let opts = VerifyOptions {
                seed,
                fault: fault.map(|FaultArg::GammaOffByOne| Fault::GammaOffByOne),
                quick,
            };
            let s = with_jobs(cli.jobs, || cmd_verify(&opts, out.as_deref()))??;
            print!("{}", s.table());
            let failed: Vec<&str> = s.report.failures().map(|c| c.name.as_str()).collect();
            if failed.is_empty() {
                println!("all {} checks passed", s.report.checks.len());
            } else {
                println!("FAILED: {}", failed.join(", "));
            }
            Ok(s.passed)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
