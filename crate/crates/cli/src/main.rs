//! Command-line driver: dataset generation, single-point attack runs,
//! parameter sweeps, the adaptive-vs-random comparison, defense
//! evaluation, and the analytical verification suite.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification failure, 3 I/O
//! error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};

use hamlsh::adversary::WalkAlgo;
use hamlsh::datasets::{gen_random, gen_sparse_random, gen_zero, load_points, save_points};
use hamlsh::error::Error;
use hamlsh::harness::verify::verify_lemmas;
use hamlsh::harness::{
    compare_adaptive_random, defense_eval, run_sweep, run_trial, DatasetSpec, ExperimentSpec,
    GridPoint, GridSpec, SweepResult, DEFAULT_MAX_POINTS,
};
use hamlsh::rng::rng_from_seed;

#[derive(Parser)]
#[command(
    name = "hamlsh",
    version,
    about = "Hamming-space LSH false-negative attack and defense experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Master seed (overrides the config file's seed).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Trials per grid point (overrides the config file's count).
    #[arg(long, global = true)]
    trials: Option<u32>,

    /// Output file (CSV for sweep-like commands; report text otherwise).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Experiment config file (TOML) for sweep, compare, and defense-eval.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Emit JSON: to stdout instead of text, and as a sibling `.json` file
    /// next to --out.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset file of newline-separated bit strings.
    GenData(GenDataArgs),
    /// Run the attack at one parameter point, printing every trial.
    Attack(AttackArgs),
    /// Run the sweep described by --config and emit success-rate rows.
    Sweep,
    /// Measure queries-to-first-false-negative for the restarted walk
    /// against uniform random sampling, per --config grid point.
    Compare,
    /// Attack the defended index from --config and measure report rates
    /// and re-query persistence.
    DefenseEval,
    /// Check the analytical bounds behind the attack; fails with exit
    /// code 2 if any measured quantity lands outside its bound.
    Verify,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DataKind {
    /// Every point at the origin.
    Zero,
    /// Uniform random bits.
    Random,
    /// Bernoulli(p) bits.
    SparseRandom,
}

#[derive(clap::Args)]
struct GenDataArgs {
    /// Generator to use.
    #[arg(long, value_enum, default_value_t = DataKind::Random)]
    kind: DataKind,

    /// Number of points.
    #[arg(short, long)]
    n: usize,

    /// Dimension.
    #[arg(short, long)]
    d: usize,

    /// Per-bit one-probability for sparse-random.
    #[arg(long, default_value_t = 0.1)]
    p: f64,
}

#[derive(clap::Args)]
struct AttackArgs {
    /// Dataset size (generator datasets; forbidden with --dataset).
    #[arg(short, long)]
    n: Option<usize>,

    /// Dimension (generator datasets; forbidden with --dataset).
    #[arg(short, long)]
    d: Option<usize>,

    /// Near radius.
    #[arg(short, long)]
    r: u32,

    /// Approximation factor.
    #[arg(short, long, default_value_t = 2.0)]
    c: f64,

    /// Table-count multiplier.
    #[arg(long, default_value_t = 4.0)]
    lambda: f64,

    /// Walk variant: "simple" or "fast".
    #[arg(long, default_value = "fast", value_parser = parse_algo)]
    algo: WalkAlgo,

    /// Walk start distance (default: derived from the parameters).
    #[arg(long)]
    start_distance: Option<u32>,

    /// Walk target distance (default: r).
    #[arg(long)]
    target_distance: Option<u32>,

    /// Generator for the per-trial dataset.
    #[arg(long, value_enum, default_value_t = DataKind::Random)]
    data_kind: DataKind,

    /// Per-bit one-probability for --data-kind sparse-random.
    #[arg(long, default_value_t = 0.1)]
    p: f64,

    /// Attack a fixed dataset loaded from this file instead of a generator.
    #[arg(long)]
    dataset: Option<PathBuf>,

    /// Keep at most this many points from --dataset (0 keeps all).
    #[arg(long, default_value_t = DEFAULT_MAX_POINTS)]
    max_points: usize,

    /// Build the index with no hash functions (degenerate test setup).
    #[arg(long)]
    empty_index: bool,
}

fn parse_algo(s: &str) -> Result<WalkAlgo, String> {
    WalkAlgo::from_str(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let ok = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::DataFormat { .. } => ExitCode::from(3),
                Error::Config(_) | Error::InvalidParameter(_) | Error::InvalidDataset(_) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::GenData(args) => gen_data(&cli, args),
        Command::Attack(args) => attack(&cli, args),
        Command::Sweep => sweep_like(&cli, run_sweep),
        Command::Compare => sweep_like(&cli, compare_adaptive_random),
        Command::DefenseEval => sweep_like(&cli, defense_eval),
        Command::Verify => verify(&cli),
    }
}

fn gen_data(cli: &Cli, args: &GenDataArgs) -> Result<ExitCode, Error> {
    let out = cli
        .out
        .as_ref()
        .ok_or_else(|| Error::Config("gen-data needs --out <path>".into()))?;
    let mut rng = rng_from_seed(cli.seed.unwrap_or(0));
    let ds = match args.kind {
        DataKind::Zero => gen_zero(args.n, args.d)?,
        DataKind::Random => gen_random(args.n, args.d, &mut rng)?,
        DataKind::SparseRandom => gen_sparse_random(args.n, args.d, args.p, &mut rng)?,
    };
    save_points(&ds, out)?;
    println!("wrote {} points of dimension {} to {}", ds.len(), ds.d, out.display());
    Ok(ExitCode::SUCCESS)
}

fn attack(cli: &Cli, args: &AttackArgs) -> Result<ExitCode, Error> {
    let (dataset, n, d) = match &args.dataset {
        Some(path) => {
            if args.n.is_some() || args.d.is_some() {
                return Err(Error::Config(
                    "--n/--d come from the file; drop them when using --dataset".into(),
                ));
            }
            let ds = load_points(path)?;
            let n = if args.max_points > 0 {
                ds.len().min(args.max_points)
            } else {
                ds.len()
            };
            let spec = DatasetSpec::File {
                path: path.clone(),
                max_points: args.max_points,
            };
            (spec, n, ds.d)
        }
        None => {
            let n = args
                .n
                .ok_or_else(|| Error::Config("--n is required without --dataset".into()))?;
            let d = args
                .d
                .ok_or_else(|| Error::Config("--d is required without --dataset".into()))?;
            let spec = match args.data_kind {
                DataKind::Zero => DatasetSpec::Zero,
                DataKind::Random => DatasetSpec::Random,
                DataKind::SparseRandom => DatasetSpec::SparseRandom { p: args.p },
            };
            (spec, n, d)
        }
    };
    let grid = GridSpec {
        n: Some(n),
        d: Some(d),
        r: args.r,
        c: args.c,
        lambda: args.lambda,
        start_distance: args.start_distance,
        target_distance: args.target_distance,
        algo: args.algo,
        vary: Vec::new(),
    };
    let trials = cli.trials.unwrap_or(1);
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let spec = ExperimentSpec {
        name: "attack".into(),
        dataset,
        grid,
        trials,
        seed: cli.seed.unwrap_or(0),
        defense: None,
        output: None,
        empty_index: args.empty_index,
        max_restarts: 1000,
        max_random_queries: 1_000_000,
        requeries: 100,
    };

    let point = GridPoint {
        n,
        d,
        r: args.r,
        c: args.c,
        lambda: args.lambda,
        start_distance: args.start_distance,
        target_distance: args.target_distance,
        algo: args.algo,
    };
    let mut results = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        results.push(run_trial(&spec, &point, 0, trial)?);
    }
    let successes = results.iter().filter(|t| t.success).count();
    let document = if cli.json {
        serde_json::to_string_pretty(&results).expect("trial results serialize")
    } else {
        let mut text = String::new();
        for (i, t) in results.iter().enumerate() {
            text.push_str(&format!(
                "trial {i}: {} in {} queries ({} ms, seed {})\n",
                if t.success { "false negative found" } else { "failed" },
                t.lsh_queries,
                t.wall_time_ms,
                t.seed
            ));
        }
        text.push_str(&format!("success rate: {successes}/{trials}\n"));
        text
    };
    print!("{document}");
    if let Some(path) = &cli.out {
        std::fs::write(path, &document)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep_like(
    cli: &Cli,
    engine: fn(&ExperimentSpec) -> Result<SweepResult, Error>,
) -> Result<ExitCode, Error> {
    let Some(config) = cli.config.as_ref() else {
        eprintln!("error: this command needs --config <file.toml>");
        return Ok(ExitCode::from(1));
    };
    let mut spec = ExperimentSpec::load(config)?;
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    if let Some(trials) = cli.trials {
        spec.trials = trials;
    }
    let result = engine(&spec)?;
    let out = cli.out.clone().or_else(|| spec.output.clone());
    match out {
        Some(path) => {
            result.write_csv(&path)?;
            eprintln!("wrote {}", path.display());
            if cli.json {
                let json_path = path.with_extension("json");
                result.write_json(&json_path)?;
                eprintln!("wrote {}", json_path.display());
            }
        }
        None => {
            if cli.json {
                println!("{}", result.to_json());
            } else {
                print!("{}", result.to_csv());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(cli: &Cli) -> Result<ExitCode, Error> {
    let report = verify_lemmas(cli.seed.unwrap_or(0))?;
    let document = if cli.json {
        report.to_json()
    } else {
        report.render()
    };
    print!("{document}");
    if !cli.json {
        // A trailing one-line verdict mirrors the per-check lines.
        println!(
            "{}: {} checks",
            if report.all_passed() { "ok" } else { "FAILED" },
            report.checks.len()
        );
    }
    if let Some(path) = &cli.out {
        std::fs::write(path, &document)?;
    }
    Ok(if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}
