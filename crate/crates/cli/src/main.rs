use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use iswo_core::generate::{generate, GeneratorConfig};
use iswo_core::io::{read_fixtures, write_fixtures, write_trace, FixtureRow, SolutionFile};
use iswo_core::oracle::{exact_min_cover, OracleLimits};
use iswo_core::{Algorithm, Instance, Params, Problem, Weights};

#[derive(Parser)]
#[command(
    name = "iswo",
    version,
    about = "Driver scheduling by squeaky wheel optimisation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded random instance.
    Generate(GenerateArgs),
    /// Enumerate the candidate shift pool and dump it.
    Pool(PoolArgs),
    /// Solve the LP relaxation and dump the fractional cover.
    Lp(PoolArgs),
    /// Run one solver and write the solution and its trace.
    Solve(SolveArgs),
    /// Exact optimum for a tiny instance.
    Oracle(OracleArgs),
    /// Run instances x algorithms x seeds and tabulate the results.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Tiny,
    Medium,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "medium")]
    preset: Preset,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instance name; defaults to `<preset>-<seed>`.
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    ros_min: Option<usize>,
    #[arg(long)]
    ros_max: Option<usize>,
    #[arg(long)]
    span_start: Option<u32>,
    #[arg(long)]
    span_end: Option<u32>,
    #[arg(long)]
    min_work: Option<u32>,
    #[arg(long)]
    max_work: Option<u32>,
    #[arg(long)]
    min_ratio: Option<u32>,
    #[arg(long)]
    max_ratio: Option<u32>,
    #[arg(long)]
    max_spells: Option<u32>,
    #[arg(long)]
    max_spread: Option<u32>,
    #[arg(long)]
    min_break: Option<u32>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PoolArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 2000)]
    fixed_charge: u32,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Solver flags shared by `solve` and `bench`.
#[derive(Args, Clone)]
struct SolverFlags {
    #[arg(long, default_value_t = 0.3)]
    p: f64,
    #[arg(long, default_value_t = 0.05)]
    pm: f64,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = Weights::STANDARD[0])]
    w1: f64,
    #[arg(long, default_value_t = Weights::STANDARD[1])]
    w2: f64,
    #[arg(long, default_value_t = Weights::STANDARD[2])]
    w3: f64,
    #[arg(long, default_value_t = Weights::STANDARD[3])]
    w4: f64,
    #[arg(long, default_value_t = Weights::STANDARD[4])]
    w5: f64,
    /// Stop after this many iterations without improvement.
    #[arg(long, default_value_t = 1000)]
    stagnation: u64,
    #[arg(long)]
    max_iter: Option<u64>,
    #[arg(long, default_value_t = 2000)]
    fixed_charge: u32,
    /// Skip the LP relaxation and its criterion.
    #[arg(long)]
    no_lp: bool,
    /// Skip the redundant-shift removal pass.
    #[arg(long)]
    no_redundancy: bool,
}

impl SolverFlags {
    fn params(&self, seed: u64) -> Result<Params> {
        let params = Params {
            weights: Weights::new([self.w1, self.w2, self.w3, self.w4, self.w5])?,
            p: self.p,
            p_m: self.pm,
            k: self.k,
            fixed_charge: self.fixed_charge,
            stagnation_limit: self.stagnation,
            max_iterations: self.max_iter,
            seed,
            use_lp: !self.no_lp,
            redundancy_pass: !self.no_redundancy,
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value = "iswo")]
    algo: Algorithm,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    flags: SolverFlags,
    /// Directory for `solution.json` and `trace.csv`.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 2000)]
    fixed_charge: u32,
    #[arg(long, default_value_t = 24)]
    max_pieces: usize,
    #[arg(long, default_value_t = 24)]
    max_shifts: usize,
    /// Fixture CSV to append the result to.
    #[arg(long)]
    fixtures: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of instance JSON files.
    suite: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
    seeds: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "iswo,swo")]
    algos: Vec<Algorithm>,
    #[command(flatten)]
    flags: SolverFlags,
    /// Directory for `bench.csv` and the per-run solution and trace files.
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Pool(a) => cmd_pool(a),
        Command::Lp(a) => cmd_lp(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Instance::from_json(&text).with_context(|| format!("loading {}", path.display()))
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let (label, mut config) = match a.preset {
        Preset::Tiny => ("tiny", GeneratorConfig::tiny("")),
        Preset::Medium => ("medium", GeneratorConfig::medium("")),
    };
    config.name = a.name.unwrap_or_else(|| format!("{label}-{}", a.seed));
    if let Some(v) = a.blocks {
        config.n_blocks = v;
    }
    if let Some(v) = a.ros_min {
        config.ros_per_block.0 = v;
    }
    if let Some(v) = a.ros_max {
        config.ros_per_block.1 = v;
    }
    if let Some(v) = a.span_start {
        config.span.0 = v;
    }
    if let Some(v) = a.span_end {
        config.span.1 = v;
    }
    let r = &mut config.rules;
    for (flag, field) in [
        (a.min_work, &mut r.min_work_time),
        (a.max_work, &mut r.max_work_time),
        (a.min_ratio, &mut r.min_ratio),
        (a.max_ratio, &mut r.max_ratio),
        (a.max_spells, &mut r.max_spells),
        (a.max_spread, &mut r.max_spreadover),
        (a.min_break, &mut r.min_break_between_spells),
    ] {
        if let Some(v) = flag {
            *field = v;
        }
    }
    let data = generate(&config, a.seed).map_err(anyhow::Error::msg)?;
    write_out(a.out.as_deref(), &data.to_json())
}

fn cmd_pool(a: PoolArgs) -> Result<()> {
    let instance = read_instance(&a.instance)?;
    let problem = Problem::build(instance, a.fixed_charge, false)?;
    eprintln!(
        "{} pieces, {} shifts",
        problem.instance.n_pieces(),
        problem.pool.len()
    );
    write_out(a.out.as_deref(), &problem.pool.dump(&problem.instance))
}

fn cmd_lp(a: PoolArgs) -> Result<()> {
    let instance = read_instance(&a.instance)?;
    let problem = Problem::build(instance, a.fixed_charge, true)?;
    eprintln!(
        "lp objective {:.6}, {} of {} shifts in cover",
        problem.frac.objective,
        problem.frac.cover_size(),
        problem.pool.len()
    );
    write_out(a.out.as_deref(), &problem.frac.dump())
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let params = a.flags.params(a.seed)?;
    let instance = read_instance(&a.instance)?;
    let problem = Problem::build(instance, params.fixed_charge, params.use_lp)?;
    let result = a.algo.run(&problem, &params)?;
    let solution = SolutionFile::new(&problem, &params, &result);
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let sol_path = a.out.join("solution.json");
    let trace_path = a.out.join("trace.csv");
    fs::write(&sol_path, solution.to_json())
        .with_context(|| format!("writing {}", sol_path.display()))?;
    fs::write(&trace_path, write_trace(&result.trace)?)
        .with_context(|| format!("writing {}", trace_path.display()))?;
    println!(
        "objective {} shifts {} cost {} iterations {}",
        solution.objective,
        solution.n_shifts,
        solution.total_cost(),
        solution.iterations_run
    );
    Ok(())
}

fn cmd_oracle(a: OracleArgs) -> Result<()> {
    let instance = read_instance(&a.instance)?;
    let problem = Problem::build(instance, a.fixed_charge, false)?;
    let limits = OracleLimits {
        max_pieces: a.max_pieces,
        max_shifts: a.max_shifts,
    };
    let res = exact_min_cover(&problem.pool, a.fixed_charge, limits)?;
    let row = FixtureRow::new(
        &problem.instance.name,
        res.optimal_objective,
        &res.optimal_shift_ids,
    );
    print!("{}", write_fixtures(std::slice::from_ref(&row), false)?);
    if let Some(path) = a.fixtures {
        let mut rows = match fs::read_to_string(&path) {
            Ok(text) => read_fixtures(&text)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e).with_context(|| format!("reading {}", path.display())),
        };
        rows.push(row);
        fs::write(&path, write_fixtures(&rows, true)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// One benchmark run. `objective` is recomputed from the written solution
/// file; `engine_objective` is what the solver reported.
#[derive(Debug, Clone, PartialEq, Serialize)]
struct BenchRow {
    instance: String,
    algorithm: Algorithm,
    seed: u64,
    best_shifts: usize,
    best_cost: u64,
    objective: u64,
    engine_objective: u64,
    iterations: u64,
    wall_ms: u128,
    error: String,
}

impl BenchRow {
    fn failed(instance: &str, algorithm: Algorithm, seed: u64, error: String) -> Self {
        Self {
            instance: instance.to_string(),
            algorithm,
            seed,
            best_shifts: 0,
            best_cost: 0,
            objective: 0,
            engine_objective: 0,
            iterations: 0,
            wall_ms: 0,
            error,
        }
    }
}

struct Loaded {
    stem: String,
    name: String,
    problem: Result<Problem, String>,
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    if a.seeds.is_empty() || a.algos.is_empty() {
        bail!("need at least one seed and one algorithm");
    }
    let mut files: Vec<PathBuf> = fs::read_dir(&a.suite)
        .with_context(|| format!("reading {}", a.suite.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no instance files in {}", a.suite.display());
    }
    let runs_dir = a.out.join("runs");
    fs::create_dir_all(&runs_dir).with_context(|| format!("creating {}", runs_dir.display()))?;

    let use_lp = !a.flags.no_lp;
    let loaded: Vec<Loaded> = files
        .par_iter()
        .map(|path| {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            match read_instance(path) {
                Ok(instance) => Loaded {
                    stem,
                    name: instance.name.clone(),
                    problem: Problem::build(instance, a.flags.fixed_charge, use_lp)
                        .map_err(|e| e.to_string()),
                },
                Err(e) => Loaded {
                    name: stem.clone(),
                    stem,
                    problem: Err(format!("{e:#}")),
                },
            }
        })
        .collect();

    let mut cells = Vec::new();
    for (i, _) in loaded.iter().enumerate() {
        for &algo in &a.algos {
            for &seed in &a.seeds {
                cells.push((i, algo, seed));
            }
        }
    }
    let mut rows: Vec<BenchRow> = cells
        .par_iter()
        .map(|&(i, algo, seed)| {
            let l = &loaded[i];
            run_cell(l, algo, seed, &a.flags, &runs_dir)
                .unwrap_or_else(|e| BenchRow::failed(&l.name, algo, seed, format!("{e:#}")))
        })
        .collect();
    rows.sort_by(|x, y| {
        (&x.instance, x.algorithm, x.seed).cmp(&(&y.instance, y.algorithm, y.seed))
    });

    let csv_path = a.out.join("bench.csv");
    fs::write(&csv_path, bench_csv(&rows)?)
        .with_context(|| format!("writing {}", csv_path.display()))?;
    let failures = rows.iter().filter(|r| !r.error.is_empty()).count();
    println!(
        "{} runs, {} failed, table at {}",
        rows.len(),
        failures,
        csv_path.display()
    );
    if failures > 0 {
        bail!("{failures} benchmark runs failed");
    }
    Ok(())
}

fn run_cell(
    l: &Loaded,
    algo: Algorithm,
    seed: u64,
    flags: &SolverFlags,
    runs_dir: &Path,
) -> Result<BenchRow> {
    let problem = l.problem.as_ref().map_err(|e| anyhow::anyhow!("{e}"))?;
    let params = flags.params(seed)?;
    let start = Instant::now();
    let result = algo.run(problem, &params)?;
    let wall_ms = start.elapsed().as_millis();
    let base = format!("{}.{}.s{}", l.stem, algo, seed);
    let sol_path = runs_dir.join(format!("{base}.json"));
    let trace_path = runs_dir.join(format!("{base}.trace.csv"));
    fs::write(
        &sol_path,
        SolutionFile::new(problem, &params, &result).to_json(),
    )?;
    fs::write(&trace_path, write_trace(&result.trace)?)?;

    let reread = SolutionFile::from_json(&fs::read_to_string(&sol_path)?)?;
    let objective = reread.recompute_objective(&problem.instance)?;
    let engine_objective = result.best.objective();
    let error = if objective == engine_objective {
        String::new()
    } else {
        format!("recomputed objective {objective} differs from reported {engine_objective}")
    };
    Ok(BenchRow {
        instance: l.name.clone(),
        algorithm: algo,
        seed,
        best_shifts: reread.n_shifts,
        best_cost: reread.total_cost(),
        objective,
        engine_objective,
        iterations: result.iterations_run,
        wall_ms,
        error,
    })
}

/// Run rows followed by one `mean` row per (instance, algorithm) over its
/// successful runs.
fn bench_csv(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let mut start = 0;
    while start < rows.len() {
        let key = (&rows[start].instance, rows[start].algorithm);
        let end = start
            + rows[start..]
                .iter()
                .take_while(|r| (&r.instance, r.algorithm) == key)
                .count();
        let ok: Vec<&BenchRow> = rows[start..end]
            .iter()
            .filter(|r| r.error.is_empty())
            .collect();
        if !ok.is_empty() {
            let n = ok.len() as f64;
            let mean = |f: &dyn Fn(&BenchRow) -> f64| {
                format!("{:.2}", ok.iter().map(|r| f(r)).sum::<f64>() / n)
            };
            w.write_record([
                key.0.clone(),
                key.1.to_string(),
                "mean".to_string(),
                mean(&|r| r.best_shifts as f64),
                mean(&|r| r.best_cost as f64),
                mean(&|r| r.objective as f64),
                mean(&|r| r.engine_objective as f64),
                mean(&|r| r.iterations as f64),
                mean(&|r| r.wall_ms as f64),
                String::new(),
            ])?;
        }
        start = end;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!(e.to_string()))?;
    Ok(String::from_utf8(bytes)?)
}
