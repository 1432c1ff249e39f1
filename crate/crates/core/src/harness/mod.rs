//! Experiment engine: seeded trial execution, parameter sweeps, the
//! adaptive-vs-random comparison, defense evaluation, and tabular output.
//!
//! An [`ExperimentSpec`] (usually parsed from a TOML file) names a dataset,
//! a base parameter point with optional one-axis-at-a-time variations, a
//! trial count, and a master seed. Every trial derives its own seed from
//! `(master seed, grid-point index, trial index)`, so results are
//! reproducible bit-for-bit at any worker count and trials can run in
//! parallel without shared state.
//!
//! Output is a [`SweepResult`]: one row per grid point carrying either
//! aggregated statistics or an error message, serializable as CSV (fixed
//! schema, `.`-decimal, six fractional digits) and as JSON.

pub mod verify;

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{random_baseline, run_walk, AttackConfig, WalkAlgo};
use crate::datasets::{gen_random, gen_sparse_random, gen_zero, load_points, Dataset};
use crate::defenses::{build_dp, build_resampled, DEFAULT_ALPHA};
use crate::error::{Error, Result};
use crate::index::{AnnIndex, LshIndex};
use crate::params::{derive_params, LshParams};
use crate::point::Point;
use crate::rng::{mix_seed, rng_from_seed};

/// Default number of points kept when loading a file dataset.
pub const DEFAULT_MAX_POINTS: usize = 10_000;

/// Which dataset a spec runs against. Generator datasets are re-generated
/// per trial (their `n`/`d` come from the grid point); file datasets are
/// loaded once and shared read-only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetSpec {
    /// All points at the origin of the Hamming cube.
    Zero,
    /// Uniform points (each bit fair).
    Random,
    /// Bernoulli(p) points.
    SparseRandom {
        /// Per-bit one-probability.
        p: f64,
    },
    /// Points loaded from a text file, truncated to `max_points`.
    File {
        /// Path of the dataset file.
        path: PathBuf,
        /// Keep at most this many points (0 keeps all).
        #[serde(default = "default_max_points")]
        max_points: usize,
    },
}

fn default_max_points() -> usize {
    DEFAULT_MAX_POINTS
}

/// Optional robustification wrapper around the per-trial index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DefenseSpec {
    /// No wrapper: plain LSH built at the grid point's lambda.
    None,
    /// Random resampling over `copies` lambda-1 indexes.
    Resample {
        /// Number of independent copies.
        copies: usize,
        /// Copies consulted per query.
        query_samples: usize,
    },
    /// Noisy-count aggregation over `copies` lambda-1 indexes.
    Dp {
        /// Number of independent copies.
        copies: usize,
        /// Copies consulted per query.
        query_samples: usize,
        /// Two-sided geometric noise parameter.
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

/// One axis of a sweep: a field name and the values it takes while every
/// other field stays at its base value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VaryAxis {
    /// Grid field to vary: one of `n`, `d`, `r`, `c`, `lambda`,
    /// `start_distance`, `target_distance`, `algo`.
    pub field: String,
    /// Values the field takes (numbers, or `"simple"`/`"fast"` for `algo`).
    pub values: Vec<VaryValue>,
}

/// A value in a vary axis: a number for the numeric fields, an algorithm
/// name for `algo`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VaryValue {
    /// Numeric value (integers are accepted for the integer fields).
    Number(f64),
    /// Walk selector, for the `algo` field.
    Algo(WalkAlgo),
}

/// Base parameter point plus the axes varied one at a time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Dataset size (required for generator datasets; must match the file
    /// for file datasets when given).
    #[serde(default)]
    pub n: Option<usize>,
    /// Dimension (same rule as `n`).
    #[serde(default)]
    pub d: Option<usize>,
    /// Near radius.
    pub r: u32,
    /// Approximation factor.
    #[serde(default = "default_c")]
    pub c: f64,
    /// Repetition multiplier.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// Walk start distance (default `max(0, r - round(t))`).
    #[serde(default)]
    pub start_distance: Option<u32>,
    /// Walk target distance (default `r`).
    #[serde(default)]
    pub target_distance: Option<u32>,
    /// Which walk the attack runs.
    #[serde(default = "default_algo")]
    pub algo: WalkAlgo,
    /// Axes varied one at a time (empty: the base point alone).
    #[serde(default)]
    pub vary: Vec<VaryAxis>,
}

fn default_c() -> f64 {
    2.0
}

fn default_lambda() -> f64 {
    4.0
}

fn default_algo() -> WalkAlgo {
    WalkAlgo::Fast
}

/// A full experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Label carried into the output files.
    #[serde(default = "default_name")]
    pub name: String,
    /// Dataset source.
    pub dataset: DatasetSpec,
    /// Parameter grid.
    pub grid: GridSpec,
    /// Trials per grid point.
    #[serde(default = "default_trials")]
    pub trials: u32,
    /// Master seed; every trial seed is derived from it.
    #[serde(default)]
    pub seed: u64,
    /// Optional defense wrapper around each trial's index.
    #[serde(default)]
    pub defense: Option<DefenseSpec>,
    /// Default output path for the CLI.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Test construction: build indexes with no hash functions at all, so
    /// every query answers nothing and every attack run succeeds at once.
    #[serde(default)]
    pub empty_index: bool,
    /// Restart cap per comparison trial.
    #[serde(default = "default_max_restarts")]
    pub max_restarts: u32,
    /// Random-baseline query budget per comparison trial.
    #[serde(default = "default_max_random_queries")]
    pub max_random_queries: u64,
    /// Re-queries per reported false negative in defense evaluation.
    #[serde(default = "default_requeries")]
    pub requeries: u32,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_trials() -> u32 {
    1000
}

fn default_max_restarts() -> u32 {
    1000
}

fn default_max_random_queries() -> u64 {
    1_000_000
}

fn default_requeries() -> u32 {
    100
}

impl ExperimentSpec {
    /// Parses a spec from TOML text.
    ///
    /// # Errors
    /// Returns [`Error::Config`] describing the first syntax or schema
    /// problem.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads and parses a TOML spec file.
    ///
    /// # Errors
    /// I/O errors pass through; parse problems become [`Error::Config`].
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }
}

/// One concrete parameter point, with the walk cutoffs resolved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedPoint {
    /// Dataset size.
    pub n: usize,
    /// Dimension.
    pub d: usize,
    /// Near radius.
    pub r: u32,
    /// Approximation factor.
    pub c: f64,
    /// Repetition multiplier.
    pub lambda: f64,
    /// Walk start distance actually used.
    pub start_distance: u32,
    /// Walk target distance actually used.
    pub target_distance: u32,
    /// Walk the attack ran.
    pub algo: WalkAlgo,
}

impl ResolvedPoint {
    fn csv_cells(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{},{},{}",
            self.n,
            self.d,
            self.r,
            self.c,
            self.lambda,
            self.start_distance,
            self.target_distance,
            self.algo
        )
    }
}

/// A grid point before resolution: optional fields fall back to the
/// parameter-derived defaults at run time.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    /// Dataset size.
    pub n: usize,
    /// Dimension.
    pub d: usize,
    /// Near radius.
    pub r: u32,
    /// Approximation factor.
    pub c: f64,
    /// Repetition multiplier.
    pub lambda: f64,
    /// Walk start distance override.
    pub start_distance: Option<u32>,
    /// Walk target distance override.
    pub target_distance: Option<u32>,
    /// Walk selector.
    pub algo: WalkAlgo,
}

impl GridPoint {
    fn fallback_resolved(&self) -> ResolvedPoint {
        ResolvedPoint {
            n: self.n,
            d: self.d,
            r: self.r,
            c: self.c,
            lambda: self.lambda,
            start_distance: self.start_distance.unwrap_or(0),
            target_distance: self.target_distance.unwrap_or(self.r),
            algo: self.algo,
        }
    }
}

/// Result of a single trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    /// The resolved parameter point the trial ran at.
    pub point: ResolvedPoint,
    /// Whether a false negative was certified.
    pub success: bool,
    /// Index queries the attack consumed.
    pub lsh_queries: u64,
    /// Wall-clock milliseconds (excluded from all determinism contracts).
    pub wall_time_ms: u64,
    /// The derived seed the trial ran under.
    pub seed: u64,
}

/// Aggregates of a plain sweep row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialStats {
    /// Mean success indicator.
    pub success_rate: f64,
    /// Standard error of the mean success indicator.
    pub sem: f64,
    /// Mean query count.
    pub mean_queries: f64,
    /// Standard error of the mean query count.
    pub sem_queries: f64,
}

/// Aggregates of an adaptive-vs-random comparison row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareStats {
    /// Mean queries to the first certified false negative, walk restarts.
    pub adaptive_mean_queries: f64,
    /// Its standard error.
    pub adaptive_sem: f64,
    /// Mean queries to the first false negative, uniform sampling.
    pub random_mean_queries: f64,
    /// Its standard error.
    pub random_sem: f64,
    /// `random_mean_queries / adaptive_mean_queries`.
    pub ratio: f64,
    /// Delta-method standard error of the ratio.
    pub ratio_sem: f64,
}

/// Aggregates of a defense-evaluation row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefenseStats {
    /// Fraction of trials whose attack reported a false negative.
    pub report_rate: f64,
    /// Standard error of the report rate.
    pub sem: f64,
    /// Among reported queries: fraction answered nothing in at least 90% of
    /// the re-queries.
    pub persist90: f64,
    /// As above at the 50% threshold.
    pub persist50: f64,
    /// As above at the 10% threshold.
    pub persist10: f64,
}

/// The statistics column group a row carries.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum RowStats {
    /// Plain sweep columns.
    Sweep(TrialStats),
    /// Comparison columns.
    Compare(CompareStats),
    /// Defense-evaluation columns.
    Defense(DefenseStats),
}

/// One output row: a resolved grid point with statistics or an error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// The resolved parameter point.
    pub point: ResolvedPoint,
    /// Aggregated statistics (absent on error rows).
    pub stats: Option<RowStats>,
    /// What went wrong (absent on data rows).
    pub error: Option<String>,
}

/// A completed sweep: rows in grid order plus the column schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    /// Spec label.
    pub name: String,
    /// Trials per grid point.
    pub trials: u32,
    /// Statistics column names, in CSV order.
    pub columns: Vec<String>,
    /// One row per grid point.
    pub rows: Vec<SweepRow>,
}

const SWEEP_COLUMNS: &[&str] = &["success_rate", "sem", "mean_queries", "sem_queries"];
const COMPARE_COLUMNS: &[&str] = &[
    "adaptive_mean_queries",
    "adaptive_sem",
    "random_mean_queries",
    "random_sem",
    "ratio",
    "ratio_sem",
];
const DEFENSE_COLUMNS: &[&str] = &["report_rate", "sem", "persist90", "persist50", "persist10"];

impl RowStats {
    fn values(&self) -> Vec<f64> {
        match self {
            RowStats::Sweep(s) => vec![s.success_rate, s.sem, s.mean_queries, s.sem_queries],
            RowStats::Compare(s) => vec![
                s.adaptive_mean_queries,
                s.adaptive_sem,
                s.random_mean_queries,
                s.random_sem,
                s.ratio,
                s.ratio_sem,
            ],
            RowStats::Defense(s) => {
                vec![s.report_rate, s.sem, s.persist90, s.persist50, s.persist10]
            }
        }
    }
}

impl SweepResult {
    /// Renders the CSV document: a header row, then one row per grid point.
    /// Columns: `n,d,r,c,lambda,start_distance,target_distance,algo`, the
    /// statistics columns, then `trials`. Floats use six fractional digits
    /// with a `.` decimal separator; error rows carry `NaN` cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("n,d,r,c,lambda,start_distance,target_distance,algo");
        for column in &self.columns {
            out.push(',');
            out.push_str(column);
        }
        out.push_str(",trials\n");
        for row in &self.rows {
            out.push_str(&row.point.csv_cells());
            let values = row
                .stats
                .as_ref()
                .map_or_else(|| vec![f64::NAN; self.columns.len()], RowStats::values);
            for value in values {
                out.push_str(&format!(",{value:.6}"));
            }
            out.push_str(&format!(",{}\n", self.trials));
        }
        out
    }

    /// Renders the JSON document (pretty-printed).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep results are serializable")
    }

    /// Writes the CSV document to `path`, creating parent directories.
    ///
    /// # Errors
    /// I/O errors pass through.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_creating_dirs(path, &self.to_csv())
    }

    /// Writes the JSON document to `path`, creating parent directories.
    ///
    /// # Errors
    /// I/O errors pass through.
    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_creating_dirs(path, &self.to_json())
    }
}

fn write_creating_dirs(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, content)?;
    Ok(())
}

/// A loaded dataset source: generators re-run per trial, files are shared.
enum DatasetSource {
    Zero,
    Random,
    SparseRandom(f64),
    File(Arc<Dataset>),
}

struct Prepared {
    source: DatasetSource,
    points: Vec<GridPoint>,
}

fn prepare(spec: &ExperimentSpec) -> Result<Prepared> {
    let (source, file_dims) = match &spec.dataset {
        DatasetSpec::Zero => (DatasetSource::Zero, None),
        DatasetSpec::Random => (DatasetSource::Random, None),
        DatasetSpec::SparseRandom { p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::Config(format!(
                    "sparse-random p must lie in [0, 1], got {p}"
                )));
            }
            (DatasetSource::SparseRandom(*p), None)
        }
        DatasetSpec::File { path, max_points } => {
            let mut dataset = load_points(path)?;
            if *max_points > 0 && dataset.len() > *max_points {
                dataset.points.truncate(*max_points);
            }
            let dims = (dataset.len(), dataset.d);
            (DatasetSource::File(Arc::new(dataset)), Some(dims))
        }
    };
    if spec.empty_index && !matches!(spec.defense, None | Some(DefenseSpec::None)) {
        return Err(Error::Config(
            "empty_index is a plain-LSH test construction; remove the defense".into(),
        ));
    }
    let points = expand_grid(&spec.grid, file_dims)?;
    Ok(Prepared { source, points })
}

/// Expands a grid spec into concrete points: the base point when no axis is
/// given, otherwise each axis's values applied one at a time (all other
/// fields at base), concatenated in axis order.
fn expand_grid(grid: &GridSpec, file_dims: Option<(usize, usize)>) -> Result<Vec<GridPoint>> {
    let (n, d) = match file_dims {
        Some((file_n, file_d)) => {
            if let Some(n) = grid.n {
                if n != file_n {
                    return Err(Error::Config(format!(
                        "grid n = {n} does not match the {file_n} points loaded from the file"
                    )));
                }
            }
            if let Some(d) = grid.d {
                if d != file_d {
                    return Err(Error::Config(format!(
                        "grid d = {d} does not match the file dimension {file_d}"
                    )));
                }
            }
            (file_n, file_d)
        }
        None => {
            let n = grid
                .n
                .ok_or_else(|| Error::Config("grid.n is required for generator datasets".into()))?;
            let d = grid
                .d
                .ok_or_else(|| Error::Config("grid.d is required for generator datasets".into()))?;
            (n, d)
        }
    };
    let base = GridPoint {
        n,
        d,
        r: grid.r,
        c: grid.c,
        lambda: grid.lambda,
        start_distance: grid.start_distance,
        target_distance: grid.target_distance,
        algo: grid.algo,
    };
    if grid.vary.is_empty() {
        return Ok(vec![base]);
    }
    let mut points = Vec::new();
    for axis in &grid.vary {
        if axis.values.is_empty() {
            return Err(Error::Config(format!(
                "vary axis {:?} has no values",
                axis.field
            )));
        }
        for value in &axis.values {
            let mut point = base.clone();
            apply_vary(&mut point, &axis.field, value, file_dims.is_some())?;
            points.push(point);
        }
    }
    Ok(points)
}

fn apply_vary(
    point: &mut GridPoint,
    field: &str,
    value: &VaryValue,
    file_dataset: bool,
) -> Result<()> {
    let numeric = |value: &VaryValue| -> Result<f64> {
        match value {
            VaryValue::Number(x) => Ok(*x),
            VaryValue::Algo(_) => Err(Error::Config(format!(
                "field {field:?} takes numbers, not an algorithm name"
            ))),
        }
    };
    let integer = |value: &VaryValue| -> Result<u64> {
        let x = numeric(value)?;
        if x < 0.0 || x.fract() != 0.0 || !x.is_finite() {
            return Err(Error::Config(format!(
                "field {field:?} takes non-negative integers, got {x}"
            )));
        }
        Ok(x as u64)
    };
    match field {
        "n" | "d" if file_dataset => {
            return Err(Error::Config(format!(
                "cannot vary {field:?} with a file dataset"
            )));
        }
        "n" => point.n = integer(value)? as usize,
        "d" => point.d = integer(value)? as usize,
        "r" => {
            point.r = u32::try_from(integer(value)?)
                .map_err(|_| Error::Config("field \"r\" value too large".into()))?;
        }
        "c" => point.c = numeric(value)?,
        "lambda" => point.lambda = numeric(value)?,
        "start_distance" => {
            point.start_distance = Some(
                u32::try_from(integer(value)?)
                    .map_err(|_| Error::Config("field \"start_distance\" value too large".into()))?,
            );
        }
        "target_distance" => {
            point.target_distance = Some(
                u32::try_from(integer(value)?)
                    .map_err(|_| Error::Config("field \"target_distance\" value too large".into()))?,
            );
        }
        "algo" => match value {
            VaryValue::Algo(algo) => point.algo = *algo,
            VaryValue::Number(x) => {
                return Err(Error::Config(format!(
                    "field \"algo\" takes \"simple\" or \"fast\", got {x}"
                )));
            }
        },
        other => {
            return Err(Error::Config(format!(
                "unknown vary field {other:?} (expected one of n, d, r, c, lambda, \
                 start_distance, target_distance, algo)"
            )));
        }
    }
    Ok(())
}

/// Everything a single trial needs, freshly built under its own seed.
struct TrialInstance {
    index: Box<dyn AnnIndex>,
    origin: Point,
    config: AttackConfig,
    resolved: ResolvedPoint,
}

fn resolve_config(point: &GridPoint, params: &LshParams) -> Result<(AttackConfig, ResolvedPoint)> {
    let mut config = AttackConfig::for_params(params, point.algo);
    if let Some(start) = point.start_distance {
        config.start_distance = start;
    }
    if let Some(target) = point.target_distance {
        config.target_distance = target;
    }
    config.validate(params)?;
    let resolved = ResolvedPoint {
        n: point.n,
        d: point.d,
        r: point.r,
        c: point.c,
        lambda: point.lambda,
        start_distance: config.start_distance,
        target_distance: config.target_distance,
        algo: point.algo,
    };
    Ok((config, resolved))
}

fn materialize_dataset<R: Rng>(
    source: &DatasetSource,
    point: &GridPoint,
    rng: &mut R,
) -> Result<(Arc<Dataset>, Point)> {
    match source {
        DatasetSource::Zero => {
            let ds = Arc::new(gen_zero(point.n, point.d)?);
            let origin = ds.points[0].clone();
            Ok((ds, origin))
        }
        DatasetSource::Random => {
            let ds = Arc::new(gen_random(point.n, point.d, rng)?);
            let origin = crate::adversary::find_isolated_origin(&ds)?.0;
            Ok((ds, origin))
        }
        DatasetSource::SparseRandom(p) => {
            let ds = Arc::new(gen_sparse_random(point.n, point.d, *p, rng)?);
            let origin = crate::adversary::find_isolated_origin(&ds)?.0;
            Ok((ds, origin))
        }
        DatasetSource::File(ds) => {
            // Fixed datasets keep a fixed origin: the first point.
            Ok((Arc::clone(ds), ds.points[0].clone()))
        }
    }
}

fn build_instance<R: Rng>(
    spec: &ExperimentSpec,
    source: &DatasetSource,
    point: &GridPoint,
    rng: &mut R,
) -> Result<TrialInstance> {
    let params = derive_params(point.n, point.d, point.r, point.c, point.lambda)?;
    let (config, resolved) = resolve_config(point, &params)?;
    let (dataset, origin) = materialize_dataset(source, point, rng)?;
    let index: Box<dyn AnnIndex> = if spec.empty_index {
        Box::new(LshIndex::with_hashes(dataset, &params, Vec::new())?)
    } else {
        match &spec.defense {
            None | Some(DefenseSpec::None) => {
                Box::new(LshIndex::build(dataset, &params, rng)?)
            }
            Some(DefenseSpec::Resample {
                copies,
                query_samples,
            }) => {
                let copy_params = derive_params(point.n, point.d, point.r, point.c, 1.0)?;
                Box::new(build_resampled(
                    dataset,
                    &copy_params,
                    *copies,
                    *query_samples,
                    rng,
                )?)
            }
            Some(DefenseSpec::Dp {
                copies,
                query_samples,
                alpha,
            }) => {
                let copy_params = derive_params(point.n, point.d, point.r, point.c, 1.0)?;
                Box::new(build_dp(
                    dataset,
                    &copy_params,
                    *copies,
                    *query_samples,
                    *alpha,
                    rng,
                )?)
            }
        }
    };
    Ok(TrialInstance {
        index,
        origin,
        config,
        resolved,
    })
}

/// Runs one trial: derives the trial seed, builds the dataset and index
/// (plus the defense wrapper when configured), selects the origin, runs the
/// configured walk, and records the outcome.
///
/// # Errors
/// Parameter and configuration violations surface as errors; the sweep
/// driver records them as error rows rather than crashing.
pub fn run_trial(
    spec: &ExperimentSpec,
    point: &GridPoint,
    point_index: u32,
    trial_index: u32,
) -> Result<TrialResult> {
    let started = Instant::now();
    let prepared = prepare_single_source(spec)?;
    run_trial_inner(spec, &prepared, point, point_index, trial_index, started)
}

/// Re-validates and loads the dataset source for a standalone trial call.
/// Sweeps prepare once and reuse the source.
fn prepare_single_source(spec: &ExperimentSpec) -> Result<DatasetSource> {
    Ok(prepare(spec)?.source)
}

fn run_trial_inner(
    spec: &ExperimentSpec,
    source: &DatasetSource,
    point: &GridPoint,
    point_index: u32,
    trial_index: u32,
    started: Instant,
) -> Result<TrialResult> {
    let seed = mix_seed(spec.seed, u64::from(point_index), u64::from(trial_index));
    let mut rng = rng_from_seed(seed);
    let instance = build_instance(spec, source, point, &mut rng)?;
    let outcome = run_walk(
        instance.index.as_ref(),
        &instance.origin,
        &instance.config,
        &mut rng,
    )?;
    Ok(TrialResult {
        point: instance.resolved,
        success: outcome.success,
        lsh_queries: outcome.lsh_queries_used,
        wall_time_ms: u64::try_from(started.elapsed().as_millis()).unwrap_or(u64::MAX),
        seed,
    })
}

fn mean_sem(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs every grid point for `trials` trials each and aggregates success
/// rates and query counts with their standard errors.
///
/// # Errors
/// Dataset-level problems (unreadable file, bad spec) fail the whole sweep;
/// per-point parameter problems become error rows.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    run_engine(spec, PointEngine::Sweep)
}

/// For each grid point, measures mean queries to the first certified false
/// negative for the restarted fast walk and for uniform random sampling at
/// distance `r`, on the same per-trial index.
///
/// # Errors
/// As [`run_sweep`].
pub fn compare_adaptive_random(spec: &ExperimentSpec) -> Result<SweepResult> {
    run_engine(spec, PointEngine::Compare)
}

/// For each grid point, runs the attack against the configured index
/// (plain or defended), re-queries every reported false negative
/// `spec.requeries` times, and aggregates the report rate plus persistence
/// fractions at the 90%/50%/10% thresholds.
///
/// # Errors
/// As [`run_sweep`], plus a configuration error when no defense descriptor
/// is present (use `kind = "none"` to evaluate plain LSH).
pub fn defense_eval(spec: &ExperimentSpec) -> Result<SweepResult> {
    if spec.defense.is_none() {
        return Err(Error::Config(
            "defense-eval needs a [defense] section (kind = \"none\" evaluates plain LSH)".into(),
        ));
    }
    run_engine(spec, PointEngine::Defense)
}

#[derive(Clone, Copy)]
enum PointEngine {
    Sweep,
    Compare,
    Defense,
}

fn run_engine(spec: &ExperimentSpec, engine: PointEngine) -> Result<SweepResult> {
    if spec.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let prepared = prepare(spec)?;
    let columns: &[&str] = match engine {
        PointEngine::Sweep => SWEEP_COLUMNS,
        PointEngine::Compare => COMPARE_COLUMNS,
        PointEngine::Defense => DEFENSE_COLUMNS,
    };
    let rows = prepared
        .points
        .iter()
        .enumerate()
        .map(|(point_index, point)| {
            run_point(spec, &prepared.source, point, point_index as u32, engine)
        })
        .collect();
    Ok(SweepResult {
        name: spec.name.clone(),
        trials: spec.trials,
        columns: columns.iter().map(|&c| c.to_owned()).collect(),
        rows,
    })
}

fn error_row(point: &GridPoint, params: Option<&LshParams>, message: String) -> SweepRow {
    let resolved = match params {
        Some(params) => resolve_config(point, params)
            .map(|(_, resolved)| resolved)
            .unwrap_or_else(|_| point.fallback_resolved()),
        None => point.fallback_resolved(),
    };
    SweepRow {
        point: resolved,
        stats: None,
        error: Some(message),
    }
}

fn run_point(
    spec: &ExperimentSpec,
    source: &DatasetSource,
    point: &GridPoint,
    point_index: u32,
    engine: PointEngine,
) -> SweepRow {
    // Validate the point once up front so a bad point yields one error row
    // instead of `trials` identical failures.
    let params = match derive_params(point.n, point.d, point.r, point.c, point.lambda) {
        Ok(params) => params,
        Err(e) => return error_row(point, None, e.to_string()),
    };
    let resolved = match resolve_config(point, &params) {
        Ok((_, resolved)) => resolved,
        Err(e) => return error_row(point, Some(&params), e.to_string()),
    };
    let outcomes: Vec<Result<PointOutcome>> = (0..spec.trials)
        .into_par_iter()
        .map(|trial_index| run_point_trial(spec, source, point, point_index, trial_index, engine))
        .collect();
    let mut collected = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        match outcome {
            Ok(o) => collected.push(o),
            Err(e) => return error_row(point, Some(&params), e.to_string()),
        }
    }
    let stats = aggregate(&collected, engine);
    SweepRow {
        point: resolved,
        stats: Some(stats),
        error: None,
    }
}

enum PointOutcome {
    Sweep {
        success: bool,
        queries: u64,
    },
    Compare {
        adaptive_queries: u64,
        random_queries: u64,
    },
    Defense {
        reported: bool,
        persisted: Option<u32>,
    },
}

fn run_point_trial(
    spec: &ExperimentSpec,
    source: &DatasetSource,
    point: &GridPoint,
    point_index: u32,
    trial_index: u32,
    engine: PointEngine,
) -> Result<PointOutcome> {
    let seed = mix_seed(spec.seed, u64::from(point_index), u64::from(trial_index));
    let mut rng = rng_from_seed(seed);
    let instance = build_instance(spec, source, point, &mut rng)?;
    let index = instance.index.as_ref();
    match engine {
        PointEngine::Sweep => {
            let outcome = run_walk(index, &instance.origin, &instance.config, &mut rng)?;
            Ok(PointOutcome::Sweep {
                success: outcome.success,
                queries: outcome.lsh_queries_used,
            })
        }
        PointEngine::Compare => {
            // Adaptive arm: restart the fast walk until a false negative is
            // certified; spend the whole consumed budget.
            let mut config = instance.config.clone();
            config.algo = WalkAlgo::Fast;
            // Censored trials (cap reached without success) record the
            // consumed budget as a floor; the default cap makes that
            // practically unreachable.
            let before = index.queries_used();
            for _ in 0..spec.max_restarts {
                let outcome = run_walk(index, &instance.origin, &config, &mut rng)?;
                if outcome.success {
                    break;
                }
            }
            let adaptive_queries = index.queries_used() - before;
            // Random arm on the same index, after the adaptive arm.
            let random = random_baseline(
                index,
                &instance.origin,
                instance.config.target_distance,
                &mut rng,
                spec.max_random_queries,
            )?;
            Ok(PointOutcome::Compare {
                adaptive_queries,
                random_queries: random.lsh_queries_used,
            })
        }
        PointEngine::Defense => {
            let outcome = run_walk(index, &instance.origin, &instance.config, &mut rng)?;
            let persisted = match (&outcome.query, outcome.success) {
                (Some(q), true) => {
                    let mut bottoms = 0u32;
                    for _ in 0..spec.requeries {
                        if index.query(q)?.is_none() {
                            bottoms += 1;
                        }
                    }
                    Some(bottoms)
                }
                _ => None,
            };
            Ok(PointOutcome::Defense {
                reported: outcome.success,
                persisted,
            })
        }
    }
}

fn aggregate(outcomes: &[PointOutcome], engine: PointEngine) -> RowStats {
    match engine {
        PointEngine::Sweep => {
            let successes: Vec<f64> = outcomes
                .iter()
                .map(|o| match o {
                    PointOutcome::Sweep { success, .. } => f64::from(u8::from(*success)),
                    _ => unreachable!("engine outcomes are homogeneous"),
                })
                .collect();
            let queries: Vec<f64> = outcomes
                .iter()
                .map(|o| match o {
                    PointOutcome::Sweep { queries, .. } => *queries as f64,
                    _ => unreachable!("engine outcomes are homogeneous"),
                })
                .collect();
            let (success_rate, sem) = mean_sem(&successes);
            let (mean_queries, sem_queries) = mean_sem(&queries);
            RowStats::Sweep(TrialStats {
                success_rate,
                sem,
                mean_queries,
                sem_queries,
            })
        }
        PointEngine::Compare => {
            let adaptive: Vec<f64> = outcomes
                .iter()
                .map(|o| match o {
                    PointOutcome::Compare {
                        adaptive_queries, ..
                    } => *adaptive_queries as f64,
                    _ => unreachable!("engine outcomes are homogeneous"),
                })
                .collect();
            let random: Vec<f64> = outcomes
                .iter()
                .map(|o| match o {
                    PointOutcome::Compare { random_queries, .. } => *random_queries as f64,
                    _ => unreachable!("engine outcomes are homogeneous"),
                })
                .collect();
            let (adaptive_mean, adaptive_sem) = mean_sem(&adaptive);
            let (random_mean, random_sem) = mean_sem(&random);
            let ratio = random_mean / adaptive_mean;
            let ratio_sem = if adaptive_mean > 0.0 && random_mean > 0.0 {
                ratio
                    * ((adaptive_sem / adaptive_mean).powi(2)
                        + (random_sem / random_mean).powi(2))
                    .sqrt()
            } else {
                f64::NAN
            };
            RowStats::Compare(CompareStats {
                adaptive_mean_queries: adaptive_mean,
                adaptive_sem,
                random_mean_queries: random_mean,
                random_sem,
                ratio,
                ratio_sem,
            })
        }
        PointEngine::Defense => {
            let reported: Vec<f64> = outcomes
                .iter()
                .map(|o| match o {
                    PointOutcome::Defense { reported, .. } => f64::from(u8::from(*reported)),
                    _ => unreachable!("engine outcomes are homogeneous"),
                })
                .collect();
            let persisted: Vec<u32> = outcomes
                .iter()
                .filter_map(|o| match o {
                    PointOutcome::Defense { persisted, .. } => *persisted,
                    _ => unreachable!("engine outcomes are homogeneous"),
                })
                .collect();
            let (report_rate, sem) = mean_sem(&reported);
            let fraction_at = |threshold: u32| {
                if persisted.is_empty() {
                    f64::NAN
                } else {
                    persisted.iter().filter(|&&b| b >= threshold).count() as f64
                        / persisted.len() as f64
                }
            };
            RowStats::Defense(DefenseStats {
                report_rate,
                sem,
                persist90: fraction_at(90),
                persist50: fraction_at(50),
                persist10: fraction_at(10),
            })
        }
    }
}
