//! Python bindings for the `hamlsh` library.
//!
//! The module mirrors the Rust surface: parameter derivation, dataset
//! generators and file IO, the LSH index plus its two defended variants
//! behind one `Index` class, the adversarial walks, the analytical
//! verification suite, and the TOML-driven experiment engines. Points
//! cross the boundary as lists of 0/1 integers.

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyIndexError, PyValueError};
use pyo3::prelude::*;

use hamlsh::adversary::{self, AttackConfig, TraceEvent, WalkAlgo};
use hamlsh::datasets::{self, Dataset};
use hamlsh::defenses;
use hamlsh::error::Error;
use hamlsh::harness::{self, verify::verify_lemmas, ExperimentSpec};
use hamlsh::index::{AnnIndex, LshIndex};
use hamlsh::oracles;
use hamlsh::params::{derive_params, LshParams};
use hamlsh::point::Point;
use hamlsh::rng::rng_from_seed;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn point_from_bits(bits: &[u8]) -> PyResult<Point> {
    let bools: Vec<bool> = bits
        .iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(PyValueError::new_err(format!(
                "point coordinates must be 0 or 1, got {other}"
            ))),
        })
        .collect::<PyResult<_>>()?;
    Point::from_bits(&bools).map_err(to_py)
}

fn point_to_bits(p: &Point) -> Vec<u32> {
    (0..p.dim()).map(|i| u32::from(p.get(i))).collect()
}

/// Derived LSH parameters.
#[pyclass(frozen, name = "Params", skip_from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: LshParams,
}

#[pymethods]
impl PyParams {
    /// Derive the full parameter set from `(n, d, r, c, lambda)`.
    #[staticmethod]
    #[pyo3(signature = (n, d, r, c = 2.0, lambda_ = 4.0))]
    fn derive(n: usize, d: usize, r: u32, c: f64, lambda_: f64) -> PyResult<Self> {
        Ok(Self {
            inner: derive_params(n, d, r, c, lambda_).map_err(to_py)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d
    }

    #[getter]
    fn r(&self) -> u32 {
        self.inner.r
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn p1(&self) -> f64 {
        self.inner.p1
    }

    #[getter]
    fn p2(&self) -> f64 {
        self.inner.p2
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho
    }

    #[getter]
    fn k(&self) -> u32 {
        self.inner.k
    }

    #[getter]
    fn ell(&self) -> f64 {
        self.inner.ell
    }

    #[getter]
    fn l(&self) -> u32 {
        self.inner.l
    }

    /// The far radius `c * r` as an integer.
    fn far_radius(&self) -> u32 {
        self.inner.far_radius()
    }

    fn __repr__(&self) -> String {
        format!(
            "Params(n={}, d={}, r={}, c={}, lambda={}, k={}, L={})",
            self.inner.n, self.inner.d, self.inner.r, self.inner.c, self.inner.lambda,
            self.inner.k, self.inner.l
        )
    }
}

/// An immutable set of binary points.
#[pyclass(frozen, name = "Dataset")]
struct PyDataset {
    inner: Arc<Dataset>,
}

#[pymethods]
impl PyDataset {
    /// `n` copies of the all-zeros point.
    #[staticmethod]
    fn zero(n: usize, d: usize) -> PyResult<Self> {
        Ok(Self {
            inner: Arc::new(datasets::gen_zero(n, d).map_err(to_py)?),
        })
    }

    /// `n` points with i.i.d. uniform bits.
    #[staticmethod]
    fn random(n: usize, d: usize, seed: u64) -> PyResult<Self> {
        let mut rng = rng_from_seed(seed);
        Ok(Self {
            inner: Arc::new(datasets::gen_random(n, d, &mut rng).map_err(to_py)?),
        })
    }

    /// `n` points with i.i.d. Bernoulli(`p`) bits.
    #[staticmethod]
    fn sparse_random(n: usize, d: usize, p: f64, seed: u64) -> PyResult<Self> {
        let mut rng = rng_from_seed(seed);
        Ok(Self {
            inner: Arc::new(datasets::gen_sparse_random(n, d, p, &mut rng).map_err(to_py)?),
        })
    }

    /// Load a dataset from a text file of 0/1 lines.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: Arc::new(datasets::load_points(path).map_err(to_py)?),
        })
    }

    /// Write the dataset as a text file of 0/1 lines.
    fn save(&self, path: PathBuf) -> PyResult<()> {
        datasets::save_points(&self.inner, path).map_err(to_py)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.d
    }

    fn __len__(&self) -> usize {
        self.inner.points.len()
    }

    /// The `i`-th point as a list of 0/1 integers.
    fn point(&self, i: usize) -> PyResult<Vec<u32>> {
        self.inner
            .points
            .get(i)
            .map(point_to_bits)
            .ok_or_else(|| {
                PyIndexError::new_err(format!(
                    "point {i} out of range for dataset of {}",
                    self.inner.points.len()
                ))
            })
    }

    /// Minimum Hamming distance from `q` to any stored point.
    fn min_distance(&self, q: Vec<u8>) -> PyResult<u32> {
        self.inner.min_distance(&point_from_bits(&q)?).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(name={:?}, n={}, d={})",
            self.inner.name,
            self.inner.points.len(),
            self.inner.d
        )
    }
}

/// A queryable nearest-neighbor structure: plain LSH or one of the two
/// defended variants, all behind the same `query` interface.
#[pyclass(frozen, name = "Index")]
struct PyIndex {
    inner: Box<dyn AnnIndex>,
    kind: &'static str,
}

#[pymethods]
impl PyIndex {
    /// Build a plain LSH index over `dataset` with `params`.
    #[staticmethod]
    fn build(dataset: PyRef<'_, PyDataset>, params: PyRef<'_, PyParams>, seed: u64) -> PyResult<Self> {
        let mut rng = rng_from_seed(seed);
        let idx = LshIndex::build(Arc::clone(&dataset.inner), &params.inner, &mut rng)
            .map_err(to_py)?;
        Ok(Self {
            inner: Box::new(idx),
            kind: "lsh",
        })
    }

    /// Build the random-resampling defense: `copies` independent indexes,
    /// `query_samples` of them consulted per query.
    #[staticmethod]
    fn build_resampled(
        dataset: PyRef<'_, PyDataset>,
        params: PyRef<'_, PyParams>,
        copies: usize,
        query_samples: usize,
        seed: u64,
    ) -> PyResult<Self> {
        let mut rng = rng_from_seed(seed);
        let idx = defenses::build_resampled(
            Arc::clone(&dataset.inner),
            &params.inner,
            copies,
            query_samples,
            &mut rng,
        )
        .map_err(to_py)?;
        Ok(Self {
            inner: Box::new(idx),
            kind: "resample",
        })
    }

    /// Build the noisy-count defense with two-sided geometric noise.
    #[staticmethod]
    #[pyo3(signature = (dataset, params, copies, query_samples, seed, alpha = defenses::DEFAULT_ALPHA))]
    fn build_dp(
        dataset: PyRef<'_, PyDataset>,
        params: PyRef<'_, PyParams>,
        copies: usize,
        query_samples: usize,
        seed: u64,
        alpha: f64,
    ) -> PyResult<Self> {
        let mut rng = rng_from_seed(seed);
        let idx = defenses::build_dp(
            Arc::clone(&dataset.inner),
            &params.inner,
            copies,
            query_samples,
            alpha,
            &mut rng,
        )
        .map_err(to_py)?;
        Ok(Self {
            inner: Box::new(idx),
            kind: "dp",
        })
    }

    /// One query: the id of a stored point within `c*r` of `q`, or `None`.
    fn query(&self, q: Vec<u8>) -> PyResult<Option<usize>> {
        self.inner.query(&point_from_bits(&q)?).map_err(to_py)
    }

    /// Total queries answered so far.
    #[getter]
    fn queries_used(&self) -> u64 {
        self.inner.queries_used()
    }

    /// The parameters the structure was built with.
    #[getter]
    fn params(&self) -> PyParams {
        PyParams {
            inner: self.inner.params().clone(),
        }
    }

    fn __repr__(&self) -> String {
        let p = self.inner.params();
        format!(
            "Index(kind={:?}, n={}, d={}, L={}, queries_used={})",
            self.kind,
            p.n,
            p.d,
            p.l,
            self.inner.queries_used()
        )
    }
}

/// The result of one attack run.
#[pyclass(frozen, name = "Outcome")]
struct PyOutcome {
    /// Whether a false negative was certified.
    #[pyo3(get)]
    success: bool,
    query: Option<Vec<u32>>,
    /// Index queries consumed by this run.
    #[pyo3(get)]
    lsh_queries_used: u64,
    /// Completed outer iterations.
    #[pyo3(get)]
    outer_iterations: u32,
    trace: Option<Vec<(String, u32, Option<u32>)>>,
    /// Failure classification, `None` on success.
    #[pyo3(get)]
    failure: Option<String>,
}

#[pymethods]
impl PyOutcome {
    /// The certified query as a list of 0/1 integers (`None` on failure).
    #[getter]
    fn query(&self) -> Option<Vec<u32>> {
        self.query.clone()
    }

    /// Recorded trace when enabled: `("start", distance, None)`,
    /// `("outer", distance, None)`, and `("bisect", gap_before, gap_after)`
    /// tuples in walk order.
    #[getter]
    fn trace(&self) -> Option<Vec<(String, u32, Option<u32>)>> {
        self.trace.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Outcome(success={}, lsh_queries_used={}, outer_iterations={}, failure={:?})",
            self.success, self.lsh_queries_used, self.outer_iterations, self.failure
        )
    }
}

impl From<adversary::AttackOutcome> for PyOutcome {
    fn from(o: adversary::AttackOutcome) -> Self {
        Self {
            success: o.success,
            query: o.query.as_ref().map(point_to_bits),
            lsh_queries_used: o.lsh_queries_used,
            outer_iterations: o.outer_iterations,
            trace: o.trace.map(|events| {
                events
                    .into_iter()
                    .map(|e| match e {
                        TraceEvent::Start { distance, .. } => ("start".into(), distance, None),
                        TraceEvent::Outer { distance, .. } => ("outer".into(), distance, None),
                        TraceEvent::Bisect {
                            gap_before,
                            gap_after,
                        } => ("bisect".into(), gap_before, Some(gap_after)),
                    })
                    .collect()
            }),
            failure: o.failure.map(|f| format!("{f:?}")),
        }
    }
}

/// Run one adversarial walk against `index` from origin `z`.
#[pyfunction]
#[pyo3(signature = (index, z, algo = "fast", seed = 0, start_distance = None,
                    target_distance = None, record_trace = false))]
fn run_walk(
    index: PyRef<'_, PyIndex>,
    z: Vec<u8>,
    algo: &str,
    seed: u64,
    start_distance: Option<u32>,
    target_distance: Option<u32>,
    record_trace: bool,
) -> PyResult<PyOutcome> {
    let algo: WalkAlgo = algo.parse().map_err(to_py)?;
    let params = index.inner.params();
    let mut config = AttackConfig::for_params(params, algo);
    if let Some(s) = start_distance {
        config.start_distance = s;
    }
    if let Some(t) = target_distance {
        config.target_distance = t;
    }
    config.record_trace = record_trace;
    config.validate(params).map_err(to_py)?;
    let z = point_from_bits(&z)?;
    let mut rng = rng_from_seed(seed);
    adversary::run_walk(&*index.inner, &z, &config, &mut rng)
        .map(PyOutcome::from)
        .map_err(to_py)
}

/// Query uniformly-sampled points at distance `target_distance` from `z`
/// until one is answered with nothing, up to `max_queries` attempts.
#[pyfunction]
#[pyo3(signature = (index, z, target_distance, seed = 0, max_queries = 1_000_000))]
fn random_baseline(
    index: PyRef<'_, PyIndex>,
    z: Vec<u8>,
    target_distance: u32,
    seed: u64,
    max_queries: u64,
) -> PyResult<PyOutcome> {
    let z = point_from_bits(&z)?;
    let mut rng = rng_from_seed(seed);
    adversary::random_baseline(&*index.inner, &z, target_distance, &mut rng, max_queries)
        .map(PyOutcome::from)
        .map_err(to_py)
}

/// The dataset point maximizing the minimum distance to all points with a
/// different value, returned with that isolation distance.
#[pyfunction]
fn find_isolated_origin(dataset: PyRef<'_, PyDataset>) -> PyResult<(Vec<u32>, u32)> {
    let (point, isolation) = adversary::find_isolated_origin(&dataset.inner).map_err(to_py)?;
    Ok((point_to_bits(&point), isolation))
}

/// P[a uniformly random size-`s` support avoids all `m` flipped
/// coordinates] in dimension `d`, exactly.
#[pyfunction]
fn exact_collision_prob(d: usize, s: usize, m: usize) -> f64 {
    oracles::exact_collision_prob(d, s, m)
}

/// Expected support size of a `k`-coordinate hash in dimension `d`.
#[pyfunction]
fn expected_support(d: usize, k: u32) -> f64 {
    oracles::expected_support(d, k)
}

/// Run the analytical verification suite; returns `(all_passed, report)`.
#[pyfunction]
#[pyo3(signature = (seed = 0))]
fn verify(seed: u64) -> PyResult<(bool, String)> {
    let report = verify_lemmas(seed).map_err(to_py)?;
    Ok((report.all_passed(), report.render()))
}

/// Run a success-rate sweep from a TOML experiment config; returns CSV.
#[pyfunction]
fn sweep_csv(config_toml: &str) -> PyResult<String> {
    let spec = ExperimentSpec::from_toml_str(config_toml).map_err(to_py)?;
    Ok(harness::run_sweep(&spec).map_err(to_py)?.to_csv())
}

/// Run the adaptive-vs-random comparison from a TOML config; returns CSV.
#[pyfunction]
fn compare_csv(config_toml: &str) -> PyResult<String> {
    let spec = ExperimentSpec::from_toml_str(config_toml).map_err(to_py)?;
    Ok(harness::compare_adaptive_random(&spec).map_err(to_py)?.to_csv())
}

/// Run the defense evaluation from a TOML config; returns CSV.
#[pyfunction]
fn defense_eval_csv(config_toml: &str) -> PyResult<String> {
    let spec = ExperimentSpec::from_toml_str(config_toml).map_err(to_py)?;
    Ok(harness::defense_eval(&spec).map_err(to_py)?.to_csv())
}

#[pymodule]
fn hamlsh_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyIndex>()?;
    m.add_class::<PyOutcome>()?;
    m.add_function(wrap_pyfunction!(run_walk, m)?)?;
    m.add_function(wrap_pyfunction!(random_baseline, m)?)?;
    m.add_function(wrap_pyfunction!(find_isolated_origin, m)?)?;
    m.add_function(wrap_pyfunction!(exact_collision_prob, m)?)?;
    m.add_function(wrap_pyfunction!(expected_support, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    m.add_function(wrap_pyfunction!(compare_csv, m)?)?;
    m.add_function(wrap_pyfunction!(defense_eval_csv, m)?)?;
    m.add("DEFAULT_ALPHA", defenses::DEFAULT_ALPHA)?;
    Ok(())
}
