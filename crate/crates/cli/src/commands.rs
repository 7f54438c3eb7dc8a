use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use agd_core::study::{run_rate_study, RateStudy};
use agd_core::sweep::map_seeds;
use agd_core::verify::{run_suite, Fault, NoiseBudget, SuiteOptions, VerifyReport};
use agd_core::AgdError;

use crate::config::ExperimentConfig;
use crate::manifest::{CommandKind, Manifest, PrescriptionRecord, RateRecord, RateRow, RunRecord, RunStatus};
use crate::tables;

pub const MANIFEST_FILE: &str = "manifest.json";

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("failed to write {}", path.display()))
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    let mut json = serde_json::to_string_pretty(manifest)?;
    json.push('\n');
    write(dir, MANIFEST_FILE, &json)
}

/// What `run` produced.
#[derive(Debug)]
pub struct RunSummary {
    pub manifest: Manifest,
    pub diverged: usize,
}

/// One (problem, policy, noise, T) run per seed: a trajectory table per seed
/// and a manifest with the prescribed step and all theory constants. A
/// diverged seed keeps its partial table and is flagged in the manifest.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let horizon = cfg.horizon()?;
    let out = cfg.out_dir()?;
    fs::create_dir_all(out).with_context(|| format!("failed to create {}", out.display()))?;
    let hash = cfg.hash();
    let e = cfg.experiment();
    let p = e.problem.build()?;
    let pres = e.prescribe(&p, horizon)?;

    let seeds = cfg.seed_list();
    let outcomes = map_seeds(&seeds, |seed| match e.run_seed(&p, &pres.policy, horizon, seed) {
        Ok(traj) => Ok((traj, RunStatus::Completed)),
        Err(AgdError::Diverged { t, what, partial }) => Ok((
            *partial,
            RunStatus::Diverged {
                t,
                what: what.to_owned(),
            },
        )),
        Err(err) => Err(err),
    });

    let mut runs = Vec::with_capacity(seeds.len());
    for (seed, outcome) in seeds.iter().zip(outcomes) {
        let (traj, status) = outcome?;
        let table = format!("trajectory_seed{seed}.csv");
        write(out, &table, &tables::trajectory(&hash, &traj.records))?;
        runs.push(RunRecord {
            seed: *seed,
            horizon,
            table,
            rows: traj.len(),
            status,
        });
    }
    let diverged = runs.iter().filter(|r| r.status != RunStatus::Completed).count();
    let manifest = Manifest {
        version: agd_core::VERSION.to_owned(),
        command: CommandKind::Run,
        config_hash: hash,
        config: cfg.clone(),
        prescriptions: vec![PrescriptionRecord {
            horizon,
            eta: pres.policy.eta,
            constants: pres.constants,
        }],
        runs,
        rates: Vec::new(),
    };
    write_manifest(out, &manifest)?;
    Ok(RunSummary { manifest, diverged })
}

#[derive(Debug)]
pub struct RatesSummary {
    pub manifest: Manifest,
    /// The slope table printed to the terminal and written to `rates_summary.csv`.
    pub summary: String,
}

impl RatesSummary {
    pub fn passed(&self) -> bool {
        self.manifest.rates.iter().all(|r| r.passed)
    }
}

/// For each target metric: re-prescribe η at every horizon, sweep seeds,
/// take the median and `(1 − δ)`-quantile, and fit log-log slopes.
pub fn cmd_rates(cfg: &ExperimentConfig) -> Result<RatesSummary> {
    if cfg.horizons.len() < 3 {
        bail!("invalid config field `horizons`: a rate study needs at least 3 values, got {}", cfg.horizons.len());
    }
    if cfg.rates.is_empty() {
        bail!("invalid config field `rates`: name at least one metric and its slope window");
    }
    let out = cfg.out_dir()?;
    fs::create_dir_all(out).with_context(|| format!("failed to create {}", out.display()))?;
    let hash = cfg.hash();
    let e = cfg.experiment();
    let p = e.problem.build()?;

    let mut prescriptions = Vec::with_capacity(cfg.horizons.len());
    for &horizon in &cfg.horizons {
        let pres = e.prescribe(&p, horizon)?;
        prescriptions.push(PrescriptionRecord {
            horizon,
            eta: pres.policy.eta,
            constants: pres.constants,
        });
    }

    let mut records = Vec::with_capacity(cfg.rates.len());
    for target in &cfg.rates {
        let report = run_rate_study(&RateStudy {
            experiment: e.clone(),
            metric: target.metric,
            horizons: cfg.horizons.clone(),
            seeds: cfg.seeds,
            base_seed: cfg.base_seed,
            window: target.window,
        })?;
        records.push(RateRecord {
            metric: target.metric,
            window: target.window,
            slope_median: report.median_fit.as_ref().map(|f| f.slope),
            slope_quantile: report.quantile_fit.as_ref().map(|f| f.slope),
            passed: report.passed,
            rows: report
                .rows
                .iter()
                .map(|r| RateRow {
                    horizon: r.horizon,
                    eta: r.eta,
                    median: r.median,
                    upper_quantile: r.upper_quantile,
                    diverged: r.diverged,
                })
                .collect(),
        });
    }

    let mut detail = tables::stamp(&hash);
    detail.push_str("metric,T,eta,median,upper_quantile,diverged\n");
    let mut summary = tables::stamp(&hash);
    summary.push_str("metric,slope_median,slope_quantile,window_lo,window_hi,result\n");
    let opt = |v: Option<f64>| v.map_or("n/a".to_owned(), tables::num);
    for r in &records {
        let name = r.metric.name();
        for row in &r.rows {
            let _ = writeln!(
                detail,
                "{name},{},{},{},{},{}",
                row.horizon,
                tables::num(row.eta),
                tables::num(row.median),
                tables::num(row.upper_quantile),
                row.diverged
            );
        }
        let _ = writeln!(
            summary,
            "{name},{},{},{},{},{}",
            opt(r.slope_median),
            opt(r.slope_quantile),
            r.window.0,
            r.window.1,
            if r.passed { "PASS" } else { "FAIL" }
        );
    }
    write(out, "rates.csv", &detail)?;
    write(out, "rates_summary.csv", &summary)?;

    let manifest = Manifest {
        version: agd_core::VERSION.to_owned(),
        command: CommandKind::Rates,
        config_hash: hash,
        config: cfg.clone(),
        prescriptions,
        runs: Vec::new(),
        rates: records,
    };
    write_manifest(out, &manifest)?;
    Ok(RatesSummary { manifest, summary })
}

/// Options for `verify`.
#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    pub fault: Option<Fault>,
    /// Smaller sample sizes for a fast smoke pass.
    pub quick: bool,
}

impl VerifyOptions {
    pub fn suite(&self) -> SuiteOptions {
        let mut s = SuiteOptions {
            seed: self.seed,
            fault: self.fault,
            ..SuiteOptions::default()
        };
        if self.quick {
            s.gap_runs = 10;
            s.gap_horizon = 100;
            s.lemma_instances = 1_000;
            s.noise = NoiseBudget {
                almost_sure_samples: 100_000,
                bias_points: 10,
                ..NoiseBudget::default()
            };
        }
        s
    }
}

#[derive(Debug, Serialize)]
pub struct VerifySummary {
    pub version: String,
    pub options_hash: String,
    pub passed: bool,
    pub report: VerifyReport,
}

impl VerifySummary {
    pub fn table(&self) -> String {
        let mut s = tables::stamp(&self.options_hash);
        s.push_str("check,instances,violations,worst,limit,result\n");
        for c in &self.report.checks {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                c.name,
                c.instances,
                c.violations,
                tables::num(c.worst),
                tables::num(c.limit),
                if c.passed { "PASS" } else { "FAIL" }
            );
        }
        s
    }
}

/// Every lemma check, certifier and exact identity. Writes `verify.json`
/// and `verify.csv` when `out` is given.
pub fn cmd_verify(opts: &VerifyOptions, out: Option<&Path>) -> Result<VerifySummary> {
    let suite = opts.suite();
    let options_hash = hex::encode(Sha256::digest(serde_json::to_string(&suite)?.as_bytes()));
    let report = run_suite(&suite)?;
    let summary = VerifySummary {
        version: agd_core::VERSION.to_owned(),
        options_hash,
        passed: report.passed(),
        report,
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("failed to create {}", dir.display()))?;
        let mut json = serde_json::to_string_pretty(&summary)?;
        json.push('\n');
        write(dir, "verify.json", &json)?;
        write(dir, "verify.csv", &summary.table())?;
    }
    Ok(summary)
}

/// Runs `f` on a dedicated pool of `jobs` threads (the global pool when `None`).
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => bail!("--jobs must be at least 1"),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            Ok(pool.install(f))
        }
    }
}
