//! Acceptance gate: one PASS/FAIL line per criterion, each at its stated
//! tolerance and time budget, followed by a summary line.
//!
//! Under a plain `cargo test` the gate reports and exits zero so the rest of
//! the workspace still runs; pass `--strict` (or set `AGD_ACCEPTANCE_STRICT=1`)
//! to exit nonzero when any criterion fails. Run a subset with
//! `cargo test --test acceptance -- 1 2 3`.

use std::time::{Duration, Instant};

use agd_core::agd::PolicyKind;
use agd_core::constants::Regime;
use agd_core::noise::{NoiseMode, NoiseSpec};
use agd_core::study::{run_bound_study, run_rate_study, BoundStudy, Experiment, Metric, ProblemSpec, RateReport, RateStudy, StepRule};
use agd_core::verify::{
    check_averaging_identity, check_averaging_tail, check_gap_oracle, check_noise, check_problems, check_scalar_lemmas,
    check_step_perturbations, CheckResult, NoiseBudget,
};

const SEED: u64 = 20_240_601;
const NOISY_WINDOW: (f64, f64) = (-0.65, -0.35);
const NOISELESS_WINDOW: (f64, f64) = (-1.2, -0.8);
const HORIZONS: [usize; 4] = [100, 1_000, 10_000, 100_000];

struct Outcome {
    passed: bool,
    detail: String,
    tables: String,
}

fn checks_outcome(checks: &[CheckResult]) -> Outcome {
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| format!("{} (worst {:e})", c.name, c.worst)).collect();
    let tables = checks
        .iter()
        .map(|c| format!("{},{},{},{:e},{}\n", c.name, c.instances, c.violations, c.worst, c.passed))
        .collect();
    Outcome {
        passed: failed.is_empty(),
        detail: if failed.is_empty() {
            format!("{} checks clean", checks.len())
        } else {
            format!("failed: {}", failed.join("; "))
        },
        tables,
    }
}

fn rate_outcome(reports: Vec<RateReport>) -> Outcome {
    let passed = reports.iter().all(|r| r.passed);
    let detail = reports
        .iter()
        .map(|r| {
            let e = &r.study.experiment;
            format!(
                "{}/{}/C={}{} slope {} in [{}, {}]",
                e.kind.name(),
                e.problem.name,
                e.noise.c,
                if e.noise.is_noiseless() { "(noiseless)" } else { "" },
                r.median_slope().map_or("n/a".into(), |s| format!("{s:.3}")),
                r.study.window.0,
                r.study.window.1
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    let tables = reports.iter().map(|r| r.table()).collect();
    Outcome { passed, detail, tables }
}

fn noisy(mode: NoiseMode) -> NoiseSpec {
    NoiseSpec::new(0.0, 0.0, 1.0, mode).unwrap()
}

fn experiment(problem: ProblemSpec, kind: PolicyKind, noise: NoiseSpec, regime: Regime) -> Experiment {
    Experiment {
        problem,
        kind,
        noise,
        step: StepRule::Theorem { regime },
        g0: 1.0,
        start_scale: 1.0,
        delta: 0.1,
    }
}

fn study(e: Experiment, metric: Metric, window: (f64, f64)) -> RateStudy {
    RateStudy {
        experiment: e,
        metric,
        horizons: HORIZONS.to_vec(),
        seeds: 20,
        base_seed: SEED,
        window,
    }
}

fn rates(studies: Vec<RateStudy>) -> Outcome {
    rate_outcome(studies.iter().map(|s| run_rate_study(s).expect("rate study runs")).collect())
}

fn criterion_1() -> Outcome {
    checks_outcome(&[check_averaging_identity(10_000, None), check_averaging_tail(10_000, None)])
}

fn criterion_2() -> Outcome {
    checks_outcome(&check_gap_oracle(SEED, 50, 200).unwrap())
}

fn criterion_3() -> Outcome {
    let mut checks = check_scalar_lemmas(SEED, 10_000).unwrap();
    checks.extend(check_step_perturbations(SEED, 10_000).unwrap());
    checks.extend(check_problems(SEED, 10_000).unwrap());
    checks_outcome(&checks)
}

fn criterion_4() -> Outcome {
    checks_outcome(&check_noise(SEED, NoiseBudget::default()).unwrap())
}

fn nonconvex_constant(noise: NoiseSpec, window: (f64, f64)) -> Vec<RateStudy> {
    [PolicyKind::RsagConst, PolicyKind::Sgd]
        .into_iter()
        .map(|kind| {
            let e = experiment(ProblemSpec::new("exp_symmetric", 10), kind, noise, Regime::NonconvexGs);
            study(e, Metric::AvgSqGrad, window)
        })
        .collect()
}

fn criterion_5() -> Outcome {
    rates(nonconvex_constant(noisy(NoiseMode::AlmostSure), NOISY_WINDOW))
}

fn criterion_6() -> Outcome {
    rates(nonconvex_constant(NoiseSpec::noiseless(), NOISELESS_WINDOW))
}

fn criterion_7() -> Outcome {
    let mut studies = Vec::new();
    for (noise, window) in [(noisy(NoiseMode::AlmostSure), NOISY_WINDOW), (NoiseSpec::noiseless(), NOISELESS_WINDOW)] {
        for kind in [PolicyKind::AdagradNorm, PolicyKind::RsagAdaptive] {
            let e = experiment(ProblemSpec::new("quartic", 5), kind, noise, Regime::AdaptiveGs);
            studies.push(study(e, Metric::AvgSqGrad, window));
        }
    }
    rates(studies)
}

fn criterion_8() -> Outcome {
    let mut studies = Vec::new();
    for (a_s, expected, window) in [
        (noisy(NoiseMode::AlmostSure), noisy(NoiseMode::Expected), NOISY_WINDOW),
        (NoiseSpec::noiseless(), NoiseSpec::noiseless(), NOISELESS_WINDOW),
    ] {
        let exp_sym = ProblemSpec::new("exp_symmetric", 10);
        studies.push(study(experiment(exp_sym.clone(), PolicyKind::RsagConst, a_s, Regime::ConvexGs), Metric::AveragedIterateGap, window));
        studies.push(study(experiment(exp_sym, PolicyKind::AdagradNorm, a_s, Regime::AdaptiveGs), Metric::AveragedIterateGap, window));
        studies.push(study(
            experiment(ProblemSpec::new("quadratic", 10), PolicyKind::RsagConst, expected, Regime::ConvexSmoothExpected),
            Metric::AveragedIterateGap,
            window,
        ));
    }
    rates(studies)
}

fn bound_studies() -> Vec<BoundStudy> {
    [(PolicyKind::RsagConst, Regime::NonconvexGs), (PolicyKind::AdagradNorm, Regime::AdaptiveGs)]
        .into_iter()
        .map(|(kind, regime)| BoundStudy {
            experiment: experiment(ProblemSpec::new("exp_symmetric", 10), kind, noisy(NoiseMode::AlmostSure), regime),
            horizon: 1_000,
            seeds: 200,
            base_seed: SEED,
        })
        .collect()
}

fn criterion_9() -> Outcome {
    let reports: Vec<_> = bound_studies().iter().map(|s| run_bound_study(s).unwrap()).collect();
    let passed = reports.iter().all(|r| r.sweep.passed && r.sweep.runs >= 200);
    let detail = reports
        .iter()
        .map(|r| {
            format!(
                "{}: {}/{} within bound (allowed failures {})",
                r.study.experiment.kind.name(),
                r.sweep.runs - r.sweep.failures,
                r.sweep.runs,
                r.sweep.allowed_failures
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Outcome {
        passed,
        detail,
        tables: reports.iter().map(|r| r.table()).collect(),
    }
}

/// Re-runs every randomized criterion and compares the summary tables byte
/// for byte with the first pass.
fn criterion_10(first: &[(usize, String)]) -> Outcome {
    let mut mismatched = Vec::new();
    for (id, table) in first {
        let again = run_criterion(*id).0.tables;
        if &again != table {
            mismatched.push(id.to_string());
        }
    }
    Outcome {
        passed: mismatched.is_empty() && !first.is_empty(),
        detail: if mismatched.is_empty() {
            format!("{} criteria re-run with identical tables", first.len())
        } else {
            format!("tables differ for criteria {}", mismatched.join(", "))
        },
        tables: String::new(),
    }
}

fn budget(id: usize) -> Duration {
    Duration::from_secs(match id {
        1 => 1,
        2 => 10,
        3 => 30,
        4 => 60,
        6 => 300,
        _ => 600,
    })
}

fn run_criterion(id: usize) -> (Outcome, Duration) {
    let start = Instant::now();
    let out = match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        _ => unreachable!("criterion {id}"),
    };
    (out, start.elapsed())
}

fn main() {
    let strict = std::env::args().any(|a| a == "--strict") || std::env::var_os("AGD_ACCEPTANCE_STRICT").is_some_and(|v| v == "1");
    let requested: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).filter(|n| (1..=10).contains(n)).collect();
    let selected: Vec<usize> = if requested.is_empty() { (1..=10).collect() } else { requested };

    let mut failed = Vec::new();
    let mut tables = Vec::new();
    for &id in &selected {
        let (out, elapsed) = if id == 10 {
            let start = Instant::now();
            let firsts: Vec<(usize, String)> = if tables.is_empty() {
                // Run alone: establish a baseline from the cheap randomized criteria.
                [2usize, 3, 4].iter().map(|&i| (i, run_criterion(i).0.tables)).collect()
            } else {
                tables.clone()
            };
            (criterion_10(&firsts), start.elapsed())
        } else {
            run_criterion(id)
        };
        let in_time = id == 10 || elapsed <= budget(id);
        let passed = out.passed && in_time;
        if !passed {
            failed.push(id.to_string());
        }
        println!(
            "criterion {id:>2}: {} ({:.1}s{}) {}",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { String::new() } else { format!(", over the {}s budget", budget(id).as_secs()) },
            out.detail
        );
        if !out.tables.is_empty() && id >= 5 {
            for line in out.tables.lines() {
                println!("    {line}");
            }
        }
        if id != 1 && id != 10 {
            tables.push((id, out.tables));
        }
    }
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria PASS", selected.len(), selected.len());
    } else {
        println!(
            "acceptance: {} of {} criteria PASS; FAIL: {}{}",
            selected.len() - failed.len(),
            selected.len(),
            failed.join(", "),
            if strict { "" } else { " (report mode; --strict to gate)" }
        );
        if strict {
            std::process::exit(1);
        }
    }
}
