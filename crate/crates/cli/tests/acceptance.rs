//! Acceptance criteria, one test each. Every test writes a single
//! `criterion N: PASS|FAIL ...` line straight to stderr so the verdicts show
//! up even when output capture is on.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use iswo_core::engine::{mutate, IterationTrace, Schedule, SolverRng};
use iswo_core::evaluate::{
    aggregate, membership_fractional, membership_s_curve, objective, Evaluator, Weights,
};
use iswo_core::generate::{generate, GeneratorConfig};
use iswo_core::io::{read_fixtures, read_trace, FixtureRow};
use iswo_core::lp::FractionalCover;
use iswo_core::model::{Block, Instance, InstanceData, ReliefOpportunity, Rules, Shift, Spell};
use iswo_core::oracle::{exact_min_cover, OracleLimits};
use iswo_core::shiftgen::CandidatePool;
use iswo_core::{Algorithm, Params, Problem};

fn report(n: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {n:>2}: {verdict}  {detail}\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {n} failed: {detail}");
}

fn iswo() -> Command {
    Command::new(env!("CARGO_BIN_EXE_iswo"))
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().expect("spawn iswo");
    assert!(
        out.status.success(),
        "iswo failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fixture_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/tiny_optima.csv")
}

/// The tiny suite: the instances named in the fixture file, regenerated
/// from their seeds with the tiny preset.
fn tiny_suite() -> Vec<(FixtureRow, Problem)> {
    let rows = read_fixtures(&fs::read_to_string(fixture_path()).unwrap()).unwrap();
    rows.into_iter()
        .map(|row| {
            let seed: u64 = row.instance.trim_start_matches("tiny-").parse().unwrap();
            let data = generate(&GeneratorConfig::tiny(row.instance.clone()), seed).unwrap();
            let problem = Problem::build(Instance::new(data).unwrap(), 2000, true).unwrap();
            (row, problem)
        })
        .collect()
}

fn trace_is_monotone(initial: u64, best: u64, trace: &[IterationTrace]) -> bool {
    best <= initial
        && trace.first().is_some_and(|t| t.objective == initial)
        && trace
            .windows(2)
            .all(|w| w[1].best_objective <= w[0].best_objective)
        && trace.last().is_some_and(|t| t.best_objective == best)
}

#[test]
fn criterion_01_s_curve_anchors() {
    let start = Instant::now();
    let mut rng = SolverRng::new(1);
    let mut worst = 0.0f64;
    let mut monotone = true;
    for _ in 0..100 {
        let b = rng.unit() * 1000.0 - 500.0;
        let a = b + 1e-3 + rng.unit() * 1000.0;
        worst = worst
            .max(membership_s_curve(b, a, b).abs())
            .max((membership_s_curve((a + b) / 2.0, a, b) - 0.5).abs())
            .max((membership_s_curve(a, a, b) - 1.0).abs());
        let mut xs: Vec<f64> = (0..1000).map(|_| b + (a - b) * rng.unit()).collect();
        xs.sort_by(f64::total_cmp);
        let mus: Vec<f64> = xs.iter().map(|&x| membership_s_curve(x, a, b)).collect();
        monotone &= mus.windows(2).all(|w| w[0] <= w[1]);
    }
    let took = start.elapsed();
    report(
        1,
        worst <= 1e-12 && monotone && took < Duration::from_secs(1),
        &format!("max anchor error {worst:.1e}, monotone {monotone}, {took:?}"),
    );
}

#[test]
fn criterion_02_gaussian_anchors() {
    let start = Instant::now();
    let mut rng = SolverRng::new(2);
    let mut worst = 0.0f64;
    let mut outside_zero = true;
    for _ in 0..1000 {
        let b = rng.unit();
        let a = b + 1e-3 + rng.unit();
        worst = worst
            .max((membership_fractional(a, a, b, true) - 1.0).abs())
            .max((membership_fractional(b, a, b, true) - 0.01).abs());
        outside_zero &= membership_fractional(a, a, b, false) == 0.0;
    }
    let took = start.elapsed();
    report(
        2,
        worst <= 1e-9 && outside_zero && took < Duration::from_secs(1),
        &format!("max anchor error {worst:.1e}, out of cover gives 0: {outside_zero}, {took:?}"),
    );
}

#[test]
fn criterion_03_weighted_aggregation() {
    let w = Weights::new(Weights::STANDARD).unwrap();
    let f1 = aggregate(&w, &[1.0; 5]);
    let rejected = Weights::new([0.2, 0.1, 0.1, 0.2, 0.5]).is_err()
        && Weights::new([0.2, 0.1, 0.1, 0.2, 0.3]).is_err();
    report(
        3,
        f1 == 1.0 && rejected,
        &format!("f1 with unit memberships = {f1}, bad weight sums rejected: {rejected}"),
    );
}

#[test]
fn criterion_04_objective_and_bench_recompute() {
    let ro = |time_min| ReliefOpportunity {
        time_min,
        location: "D".into(),
    };
    let inst = Instance::new(InstanceData {
        name: "spot".into(),
        rules: Rules::default(),
        blocks: [(0, 480), (600, 1110), (0, 450)]
            .iter()
            .enumerate()
            .map(|(i, &(s, e))| Block {
                id: format!("B{i}"),
                relief_opportunities: vec![ro(s), ro(e)],
            })
            .collect(),
    })
    .unwrap();
    let shifts: Vec<Shift> = (0..3)
        .map(|b| Shift::from_spells(&inst, vec![Spell::new(b, 0, 0)]))
        .collect();
    let spot = objective(&shifts, 2000);

    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite");
    fs::create_dir(&suite).unwrap();
    for seed in [0, 1] {
        run_ok(
            iswo()
                .args([
                    "generate",
                    "--preset",
                    "tiny",
                    "--seed",
                    &seed.to_string(),
                    "--out",
                ])
                .arg(suite.join(format!("t{seed}.json"))),
        );
    }
    let out = dir.path().join("bench");
    run_ok(
        iswo()
            .arg("bench")
            .arg(&suite)
            .args([
                "--seeds",
                "0,1,2",
                "--algos",
                "iswo,swo",
                "--stagnation",
                "100",
                "--out",
            ])
            .arg(&out),
    );
    let mut reader = csv::Reader::from_path(out.join("bench.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    let runs: Vec<&csv::StringRecord> = rows.iter().filter(|r| &r[2] != "mean").collect();
    let means = rows.len() - runs.len();
    let agree = runs.iter().all(|r| r[5] == r[6] && r[9].is_empty());
    report(
        4,
        spot == 7440 && runs.len() == 12 && means == 4 && agree,
        &format!(
            "spot objective {spot}, {} runs + {means} mean rows, recomputed = reported on all: {agree}",
            runs.len()
        ),
    );
}

#[test]
fn criterion_05_oracle_equivalence() {
    let start = Instant::now();
    let suite = tiny_suite();
    let fixtures_hold = suite.iter().all(|(row, p)| {
        p.instance.n_pieces() <= 12
            && p.pool.len() <= 18
            && exact_min_cover(&p.pool, 2000, OracleLimits::default())
                .is_ok_and(|r| r.optimal_objective == row.optimal_objective)
    });
    let cells: Vec<(usize, u64)> = (0..suite.len())
        .flat_map(|i| (0..5).map(move |s| (i, s)))
        .collect();
    let outcomes: Vec<(u64, u64)> = cells
        .par_iter()
        .map(|&(i, seed)| {
            let (row, problem) = &suite[i];
            let params = Params {
                seed,
                stagnation_limit: 200,
                ..Params::default()
            };
            let r = Algorithm::Iswo.run(problem, &params).unwrap();
            (r.best.objective(), row.optimal_objective)
        })
        .collect();
    let hits = outcomes.iter().filter(|(got, opt)| got == opt).count();
    let below = outcomes.iter().filter(|(got, opt)| got < opt).count();
    let rate = hits as f64 / outcomes.len() as f64;
    let took = start.elapsed();
    report(
        5,
        suite.len() == 50
            && fixtures_hold
            && rate >= 0.9
            && below == 0
            && took < Duration::from_secs(120),
        &format!(
            "{hits}/{} cells at the optimum ({:.1}%), {below} below it, fixtures reproduced: {fixtures_hold}, {took:?}",
            outcomes.len(),
            100.0 * rate
        ),
    );
}

#[test]
fn criterion_06_lp_bound() {
    let start = Instant::now();
    let suite = tiny_suite();
    let mut worst_gap = f64::NEG_INFINITY;
    for (row, problem) in &suite {
        worst_gap = worst_gap.max(problem.frac.objective - row.optimal_objective as f64);
    }
    let took = start.elapsed();
    report(
        6,
        worst_gap <= 1e-6 && took < Duration::from_secs(30),
        &format!(
            "max (lp - optimum) over {} instances = {worst_gap:.3}, {took:?}",
            suite.len()
        ),
    );
}

#[test]
fn criterion_07_improvement_monotonicity() {
    let suite = tiny_suite();
    let mut runs = 0;
    let mut good = 0;
    for (_, problem) in &suite {
        for algo in [Algorithm::Iswo, Algorithm::Swo, Algorithm::Greedy] {
            for seed in 0..3 {
                let params = Params {
                    seed,
                    stagnation_limit: 100,
                    ..Params::default()
                };
                let r = algo.run(problem, &params).unwrap();
                runs += 1;
                good += usize::from(trace_is_monotone(
                    r.initial_objective,
                    r.best.objective(),
                    &r.trace,
                ));
            }
        }
    }

    // The same property on the trace files a CLI benchmark writes.
    let dir = tempfile::tempdir().unwrap();
    let suite_dir = dir.path().join("suite");
    fs::create_dir(&suite_dir).unwrap();
    for seed in 0..3 {
        run_ok(
            iswo()
                .args([
                    "generate",
                    "--preset",
                    "tiny",
                    "--seed",
                    &seed.to_string(),
                    "--out",
                ])
                .arg(suite_dir.join(format!("t{seed}.json"))),
        );
    }
    let out = dir.path().join("bench");
    run_ok(
        iswo()
            .arg("bench")
            .arg(&suite_dir)
            .args([
                "--seeds",
                "0,1",
                "--algos",
                "iswo,swo,greedy",
                "--stagnation",
                "100",
                "--out",
            ])
            .arg(&out),
    );
    for entry in fs::read_dir(out.join("runs")).unwrap() {
        let path = entry.unwrap().path();
        if path.to_string_lossy().ends_with(".trace.csv") {
            let trace = read_trace(&fs::read_to_string(&path).unwrap()).unwrap();
            let best = trace.last().unwrap().best_objective;
            runs += 1;
            good += usize::from(trace_is_monotone(trace[0].objective, best, &trace));
        }
    }
    report(
        7,
        good == runs && runs > 0,
        &format!("{good}/{runs} runs with best <= initial and a non-increasing best column"),
    );
}

fn median(mut v: Vec<u64>) -> u64 {
    v.sort_unstable();
    v[v.len() / 2]
}

#[test]
fn criterion_08_iswo_beats_swo_on_medium() {
    let start = Instant::now();
    let problems: Vec<Problem> = (0..10u64)
        .into_par_iter()
        .map(|i| {
            let config = GeneratorConfig::medium(format!("medium-{i}"));
            let data = generate(&config, 1000 + i).unwrap();
            Problem::build(Instance::new(data).unwrap(), 2000, true).unwrap()
        })
        .collect();
    let cells: Vec<(usize, Algorithm, u64)> = (0..problems.len())
        .flat_map(|i| {
            [Algorithm::Iswo, Algorithm::Swo]
                .into_iter()
                .flat_map(move |a| (0..5).map(move |s| (i, a, s)))
        })
        .collect();
    let results: Vec<(usize, Algorithm, u64, bool)> = cells
        .par_iter()
        .map(|&(i, algo, seed)| {
            let params = Params {
                seed,
                ..Params::default()
            };
            let r = algo.run(&problems[i], &params).unwrap();
            let ok = r.best.is_complete()
                && trace_is_monotone(r.initial_objective, r.best.objective(), &r.trace);
            (i, algo, r.best.objective(), ok)
        })
        .collect();
    let mut wins = 0;
    let mut summary = Vec::new();
    for i in 0..problems.len() {
        let pick = |a: Algorithm| {
            median(
                results
                    .iter()
                    .filter(|r| r.0 == i && r.1 == a)
                    .map(|r| r.2)
                    .collect(),
            )
        };
        let (m_iswo, m_swo) = (pick(Algorithm::Iswo), pick(Algorithm::Swo));
        wins += usize::from(m_iswo <= m_swo);
        summary.push(format!("{m_iswo}/{m_swo}"));
    }
    let sound = results.iter().all(|r| r.3);
    let took = start.elapsed();
    report(
        8,
        wins >= 8 && sound && took < Duration::from_secs(600),
        &format!(
            "ISWO median <= SWO median on {wins}/10 instances (iswo/swo: {}), {took:?}",
            summary.join(" ")
        ),
    );
}

#[test]
fn criterion_09_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| -> Vec<Vec<u8>> {
        let base = dir.path().join(tag);
        fs::create_dir(&base).unwrap();
        let inst = base.join("instance.json");
        run_ok(
            iswo()
                .args(["generate", "--preset", "tiny", "--seed", "4", "--out"])
                .arg(&inst),
        );
        let mut files = vec![fs::read(&inst).unwrap()];
        for algo in ["iswo", "swo"] {
            let out = base.join(algo);
            run_ok(
                iswo()
                    .arg("solve")
                    .arg(&inst)
                    .args(["--algo", algo, "--seed", "7", "--out"])
                    .arg(&out),
            );
            files.push(fs::read(out.join("solution.json")).unwrap());
            files.push(fs::read(out.join("trace.csv")).unwrap());
        }
        files
    };
    let first = run("a");
    let second = run("b");
    let same = first == second;
    report(
        9,
        same,
        &format!(
            "generate, solve --algo iswo and solve --algo swo repeated: byte-identical {same}"
        ),
    );
}

#[test]
fn criterion_10_coverage_fuzz() {
    let mut rng = SolverRng::new(10);
    let mut instances = Vec::new();
    let mut seed = 0u64;
    while instances.len() < 200 {
        seed += 1;
        let mut config = GeneratorConfig::tiny(format!("fuzz-{seed}"));
        config.n_blocks = 1 + rng.below(5);
        config.ros_per_block = (2 + rng.below(3), 5 + rng.below(3));
        config.span = (300, 900 + 60 * rng.below(6) as u32);
        let Ok(data) = generate(&config, seed) else {
            continue;
        };
        if let Ok(problem) = Problem::build(Instance::new(data).unwrap(), 2000, true) {
            instances.push(problem);
        }
    }
    let failures: usize = instances
        .par_iter()
        .enumerate()
        .map(|(i, problem)| {
            [Algorithm::Iswo, Algorithm::Swo, Algorithm::Greedy]
                .into_iter()
                .filter(|&algo| {
                    let params = Params {
                        seed: i as u64,
                        stagnation_limit: 50,
                        ..Params::default()
                    };
                    let r = algo.run(problem, &params).unwrap();
                    !(r.best.is_complete() && r.best.ctx().counts().iter().all(|&c| c >= 1))
                })
                .count()
        })
        .sum();
    report(
        10,
        failures == 0,
        &format!(
            "{} instances x 3 algorithms, {failures} schedules with an uncovered piece",
            instances.len()
        ),
    );
}

#[test]
fn criterion_11_binomial_mutation() {
    let ro = |time_min| ReliefOpportunity {
        time_min,
        location: "D".into(),
    };
    let inst = Instance::new(InstanceData {
        name: "hundred".into(),
        rules: Rules::default(),
        blocks: vec![Block {
            id: "A".into(),
            relief_opportunities: (0..=100).map(|i| ro(i * 10)).collect(),
        }],
    })
    .unwrap();
    let shifts = (0..100)
        .map(|i| Shift::from_spells(&inst, vec![Spell::new(0, i, i)]))
        .collect();
    let pool = CandidatePool::from_shifts(&inst, shifts).unwrap();
    let frac = FractionalCover::empty(pool.len());
    let eval = Evaluator::new(&inst, &pool, &Weights::default(), &frac);
    let ids: Vec<usize> = (0..100).collect();
    let full = Schedule::from_ids(&pool, &ids, 2000);
    let mut rng = SolverRng::new(11);
    let removed: usize = (0..100)
        .map(|_| mutate(full.clone(), 0.05, &eval, &mut rng).1.len())
        .sum();
    let sigma = (10_000.0f64 * 0.05 * 0.95).sqrt();
    let dev = (removed as f64 - 500.0).abs() / sigma;
    report(
        11,
        dev <= 3.0,
        &format!("{removed} removals in 10000 trials, {dev:.2} sigma from 500"),
    );
}
