//! The `nmopso` command line.
//!
//! Exit codes: 0 success, 2 empty front, 3 infeasible evaluated path,
//! 64 usage error, 65 bad input data, 66 unwritable output.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{run, run_weighted_pso, EngineError, RunResult, SwarmConfig};
use crate::metrics::{export_front, front_csv, front_stats, paths_json, FrontStats};
use crate::navdecode::validate_kinematics;
use crate::objectives::{evaluate_all, CartesianPath, ObjectiveVector, WeightVector};
use crate::scenario::{load_scenario_file, Scenario};
use crate::terrain::generate_terrain;

pub const EXIT_OK: i32 = 0;
pub const EXIT_EMPTY_FRONT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_CANT_CREATE: i32 = 66;

/// Environment variable capping evaluation threads (0 = all cores).
pub const THREADS_ENV: &str = "NMOPSO_THREADS";

#[derive(Debug, Parser)]
#[command(name = "nmopso", version, about = "Multi-objective UAV path planning with navigation-variable PSO")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the planner on a scenario and write the Pareto front.
    Plan(PlanArgs),
    /// Score a waypoint file against a scenario.
    Evaluate(EvaluateArgs),
    /// Run several algorithms over a range of seeds and tabulate front statistics.
    Compare(CompareArgs),
    /// Write a synthetic terrain grid.
    TerrainGen(TerrainGenArgs),
}

#[derive(Debug, Clone, Args)]
struct SwarmArgs {
    #[arg(long, default_value_t = 50)]
    pop: usize,
    #[arg(long, default_value_t = 200)]
    iters: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    archive_cap: usize,
    #[arg(long, default_value_t = 7)]
    grid_divisions: usize,
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
    /// Mutation coefficient (default: occupied cells after initialization).
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    mutation_prob: f64,
}

impl SwarmArgs {
    fn config(&self) -> SwarmConfig {
        SwarmConfig {
            population: self.pop,
            max_iterations: self.iters,
            seed: self.seed,
            archive_capacity: self.archive_cap,
            grid_divisions: self.grid_divisions,
            kappa: self.kappa,
            delta: self.delta,
            mutation_prob: self.mutation_prob,
            threads: threads_from_env(),
            ..SwarmConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct PlanArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[command(flatten)]
    swarm: SwarmArgs,
    #[arg(long, default_value = "front.csv")]
    out: PathBuf,
    #[arg(long, default_value = "paths.json")]
    paths: PathBuf,
    #[arg(long, default_value = "stats.csv")]
    stats: PathBuf,
    /// Also write a JSON run manifest.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Disable the region-based mutation.
    #[arg(long)]
    no_mutation: bool,
    /// Search over waypoint coordinates instead of navigation variables.
    #[arg(long)]
    cartesian: bool,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Waypoint file: one `x y z` per line, start first, goal last.
    #[arg(long)]
    path: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Nmopso,
    NmopsoNomut,
    NmopsoCartesian,
    Wpso,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::Nmopso => "nmopso",
            Algo::NmopsoNomut => "nmopso-nomut",
            Algo::NmopsoCartesian => "nmopso-cartesian",
            Algo::Wpso => "wpso",
        }
    }
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    algos: Vec<Algo>,
    #[arg(long, default_value_t = 10)]
    runs: u64,
    #[command(flatten)]
    swarm: SwarmArgs,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TerrainGenArgs {
    #[arg(long)]
    width: usize,
    #[arg(long)]
    height: usize,
    #[arg(long)]
    cellsize: f64,
    #[arg(long)]
    roughness: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0)
}

/// Parse `args` (including the program name) and run the selected command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match cli.command {
        Command::Plan(a) => cmd_plan(a, &args),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Compare(a) => cmd_compare(a),
        Command::TerrainGen(a) => cmd_terrain_gen(a),
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, i32> {
    load_scenario_file(path).map_err(|e| {
        eprintln!("error: scenario {}: {e}", path.display());
        EXIT_DATA
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), i32> {
    std::fs::write(path, contents).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_CANT_CREATE
    })
}

fn engine_exit(e: EngineError) -> i32 {
    eprintln!("error: {e}");
    match e {
        EngineError::Config(_) => EXIT_USAGE,
        EngineError::Scenario(_) => EXIT_DATA,
        EngineError::ThreadPool(_) => EXIT_USAGE,
    }
}

fn unix_seconds() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

#[derive(Serialize)]
struct ConfigSnapshot {
    population: usize,
    max_iterations: usize,
    inertia: f64,
    inertia_damping: f64,
    c1: f64,
    c2: f64,
    grid_divisions: usize,
    kappa: f64,
    delta: Option<f64>,
    delta_used: f64,
    mutation_prob: f64,
    v_max_fraction: f64,
    archive_capacity: usize,
    disable_mutation: bool,
    cartesian_encoding: bool,
    threads: usize,
}

#[derive(Serialize)]
struct RunManifest {
    command_line: Vec<String>,
    scenario: PathBuf,
    seed: u64,
    config: ConfigSnapshot,
    started_unix: f64,
    finished_unix: f64,
    wall_time: f64,
    iterations_run: usize,
    initial_feasible: usize,
    mutation_count: usize,
    front_size: usize,
    front: PathBuf,
    paths: PathBuf,
    stats: Option<PathBuf>,
}

fn cmd_plan(a: PlanArgs, argv: &[OsString]) -> i32 {
    match plan(a, argv) {
        Ok(code) | Err(code) => code,
    }
}

fn plan(a: PlanArgs, argv: &[OsString]) -> Result<i32, i32> {
    let scenario = load_scenario(&a.scenario)?;
    let mut config = a.swarm.config();
    config.disable_mutation = a.no_mutation;
    config.cartesian_encoding = a.cartesian;
    config.validate().map_err(engine_exit)?;

    let started = unix_seconds();
    let result = run(&scenario, &config).map_err(engine_exit)?;
    let finished = unix_seconds();
    if result.initial_feasible == 0 {
        eprintln!("warning: no particle was feasible after initialization");
    }

    let front = result.objectives();
    let stats = if front.is_empty() {
        write_file(&a.out, &front_csv(&front))?;
        write_file(&a.paths, &paths_json(&result.pareto_front))?;
        None
    } else {
        let stats = front_stats(&front, config.grid_divisions).expect("archive holds finite vectors");
        let files = export_front(&result, &stats);
        write_file(&a.out, &files.front_csv)?;
        write_file(&a.paths, &files.paths_json)?;
        write_file(&a.stats, &files.stats_csv)?;
        Some(stats)
    };

    if let Some(path) = &a.manifest {
        let manifest = RunManifest {
            command_line: argv.iter().map(|s| s.to_string_lossy().into_owned()).collect(),
            scenario: a.scenario.clone(),
            seed: config.seed,
            config: ConfigSnapshot {
                population: config.population,
                max_iterations: config.max_iterations,
                inertia: config.inertia,
                inertia_damping: config.inertia_damping,
                c1: config.c1,
                c2: config.c2,
                grid_divisions: config.grid_divisions,
                kappa: config.kappa,
                delta: config.delta,
                delta_used: result.delta,
                mutation_prob: config.mutation_prob,
                v_max_fraction: config.v_max_fraction,
                archive_capacity: config.archive_capacity,
                disable_mutation: config.disable_mutation,
                cartesian_encoding: config.cartesian_encoding,
                threads: config.threads,
            },
            started_unix: started,
            finished_unix: finished,
            wall_time: result.wall_time,
            iterations_run: result.iterations_run,
            initial_feasible: result.initial_feasible,
            mutation_count: result.mutation_count,
            front_size: front.len(),
            front: a.out.clone(),
            paths: a.paths.clone(),
            stats: stats.as_ref().map(|_| a.stats.clone()),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        write_file(path, &(text + "\n"))?;
    }

    match stats {
        None => {
            eprintln!("no feasible solution found after {} iterations", result.iterations_run);
            Ok(EXIT_EMPTY_FRONT)
        }
        Some(s) => {
            println!(
                "front: {} members, {} occupied cells, s_d {:.4}, {:.2} s",
                s.n_p, s.n_o, s.s_d, result.wall_time
            );
            Ok(EXIT_OK)
        }
    }
}

fn cmd_evaluate(a: EvaluateArgs) -> i32 {
    let scenario = match load_scenario(&a.scenario) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let path = match std::fs::read_to_string(&a.path) {
        Ok(text) => CartesianPath::parse(&text),
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", a.path.display());
            return EXIT_DATA;
        }
    };
    let path = match path {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: path {}: {e}", a.path.display());
            return EXIT_DATA;
        }
    };
    let objectives = evaluate_all(&path, &scenario);
    print!("{}", format_objectives(&objectives));
    match validate_kinematics(&path, &scenario.limits) {
        Ok(report) => {
            for j in report.joints.iter().chain(std::iter::once(&report.final_joint)) {
                println!(
                    "joint {} climb {} turn {} {}",
                    j.waypoint,
                    j.delta_climb,
                    j.delta_turn,
                    if j.within_limits { "ok" } else { "violation" }
                );
            }
            println!("kinematics {}", if report.overall_pass { "pass" } else { "fail" });
        }
        Err(e) => println!("kinematics unavailable: {e}"),
    }
    if objectives.is_feasible() {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE
    }
}

/// One `fK value` line per objective; infinities print as `inf`.
pub fn format_objectives(v: &ObjectiveVector) -> String {
    let mut out = String::new();
    for (k, x) in v.0.iter().enumerate() {
        let _ = writeln!(out, "f{} {}", k + 1, x);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Summary {
    max: f64,
    min: f64,
    mean: f64,
    std: f64,
}

fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = (values.iter().sum::<f64>() / n).clamp(min, max);
    let std = (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    Some(Summary { max, min, mean, std })
}

fn run_cell(algo: Algo, scenario: &Scenario, base: &SwarmConfig, seed: u64) -> Result<Option<FrontStats>, EngineError> {
    let mut config = base.clone();
    config.seed = seed;
    let front: Vec<ObjectiveVector> = match algo {
        Algo::Wpso => {
            let r = run_weighted_pso(scenario, &config, WeightVector::UNIT)?;
            if r.objectives.is_feasible() {
                vec![r.objectives]
            } else {
                Vec::new()
            }
        }
        _ => {
            config.disable_mutation = algo == Algo::NmopsoNomut;
            config.cartesian_encoding = algo == Algo::NmopsoCartesian;
            let r: RunResult = run(scenario, &config)?;
            r.objectives()
        }
    };
    if front.is_empty() {
        return Ok(None);
    }
    Ok(Some(front_stats(&front, config.grid_divisions).expect("finite non-empty front")))
}

/// Aggregate table. For every algorithm, each `fK` row summarizes the
/// per-run means of that objective over feasible runs and the `s_d` row
/// summarizes the per-run solution distribution.
fn compare_table(algos: &[Algo], runs: u64, cells: &[Option<FrontStats>]) -> String {
    let mut out = String::from("algo,runs,feasible_runs,statistic,max,min,mean,std\n");
    for (a, algo) in algos.iter().enumerate() {
        let stats: Vec<&FrontStats> = cells[a * runs as usize..(a + 1) * runs as usize].iter().flatten().collect();
        let mut columns: Vec<(String, Vec<f64>)> =
            (0..4).map(|k| (format!("f{}", k + 1), stats.iter().map(|s| s.objectives[k].mean).collect())).collect();
        columns.push(("s_d".into(), stats.iter().map(|s| s.s_d).collect()));
        for (label, values) in columns {
            let _ = match summarize(&values) {
                Some(s) => writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    algo.name(),
                    runs,
                    stats.len(),
                    label,
                    s.max,
                    s.min,
                    s.mean,
                    s.std
                ),
                None => writeln!(out, "{},{},0,{},,,,", algo.name(), runs, label),
            };
        }
    }
    out
}

fn cmd_compare(a: CompareArgs) -> i32 {
    let scenario = match load_scenario(&a.scenario) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if a.runs == 0 {
        eprintln!("error: --runs must be at least 1");
        return EXIT_USAGE;
    }
    let base = a.swarm.config();
    if let Err(e) = base.validate() {
        return engine_exit(e);
    }
    let jobs: Vec<(Algo, u64)> =
        a.algos.iter().flat_map(|&algo| (0..a.runs).map(move |i| (algo, a.swarm.seed.wrapping_add(i)))).collect();
    let cells: Result<Vec<_>, _> =
        jobs.par_iter().map(|&(algo, seed)| run_cell(algo, &scenario, &base, seed)).collect();
    let cells = match cells {
        Ok(c) => c,
        Err(e) => return engine_exit(e),
    };
    let table = compare_table(&a.algos, a.runs, &cells);
    match &a.out {
        Some(path) => match write_file(path, &table) {
            Ok(()) => EXIT_OK,
            Err(code) => code,
        },
        None => {
            print!("{table}");
            EXIT_OK
        }
    }
}

fn cmd_terrain_gen(a: TerrainGenArgs) -> i32 {
    let grid = match generate_terrain(a.width, a.height, a.cellsize, a.roughness, a.seed) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match write_file(&a.out, &grid.to_text()) {
        Ok(()) => EXIT_OK,
        Err(code) => code,
    }
}
