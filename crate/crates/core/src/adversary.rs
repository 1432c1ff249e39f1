//! Adaptive attacks that manufacture false-negative queries, plus the
//! non-adaptive random baseline.
//!
//! Both walks start from a point `q` at a chosen distance below the near
//! radius from an origin `z` and push outward one coordinate per outer
//! iteration, always flipping a bit that was just observed to destroy the
//! last remaining collisions. The simple walk finds that bit by flipping
//! random agreement bits one at a time until the answer changes; the fast
//! walk jumps straight to the far radius and binary-searches the boundary,
//! spending `O(log(c*r))` queries instead of `O(c*r)` per iteration.
//!
//! Attacks see the index **only** through [`AnnIndex`]: the query operation,
//! the parameters, the point set, and the query counter. The hash functions
//! and bucket tables stay hidden, exactly as for an external client.

use rand::Rng;

use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::index::AnnIndex;
use crate::params::LshParams;
use crate::point::{
    distance, flip_agreement_bits, flip_random_agreement_bit, midpoint_toward,
    sample_at_distance, Point,
};

/// Which walk to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkAlgo {
    /// One-bit-at-a-time inner loop; `O(c*r)` queries per outer iteration.
    Simple,
    /// Jump-to-far-radius + binary search; `O(log(c*r))` queries per outer
    /// iteration.
    Fast,
}

impl std::fmt::Display for WalkAlgo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WalkAlgo::Simple => "simple",
            WalkAlgo::Fast => "fast",
        })
    }
}

impl std::str::FromStr for WalkAlgo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(WalkAlgo::Simple),
            "fast" => Ok(WalkAlgo::Fast),
            other => Err(Error::InvalidParameter(format!(
                "unknown algorithm {other:?} (expected \"simple\" or \"fast\")"
            ))),
        }
    }
}

/// Tuning knobs of one attack run.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackConfig {
    /// Which walk to run.
    pub algo: WalkAlgo,
    /// The walk offset: `2 e^2 (lambda + 1)` by default. The default start
    /// distance is `r - round(t)`, clamped at zero.
    pub t: f64,
    /// Distance from the origin at which the walk starts.
    pub start_distance: u32,
    /// The walk fails once the current point reaches this distance while the
    /// index still answers with the origin. Defaults to `r`; raising it
    /// toward `c*r` asks for a false negative certified at a larger radius.
    pub target_distance: u32,
    /// Safety cap on outer iterations; `ceil(t) + r` by default.
    pub max_outer_iterations: u32,
    /// Record a per-iteration trace (off by default; costs memory).
    pub record_trace: bool,
}

impl AttackConfig {
    /// The default configuration for `params`: `t = 2 e^2 (lambda + 1)`,
    /// `start_distance = max(0, r - round(t))`, `target_distance = r`,
    /// `max_outer_iterations = ceil(t) + r`.
    pub fn for_params(params: &LshParams, algo: WalkAlgo) -> Self {
        let t = 2.0 * std::f64::consts::E.powi(2) * (params.lambda + 1.0);
        let start = f64::from(params.r) - t.round();
        Self {
            algo,
            t,
            start_distance: start.max(0.0) as u32,
            target_distance: params.r,
            max_outer_iterations: t.ceil() as u32 + params.r,
            record_trace: false,
        }
    }

    /// Checks this configuration against `params`: the start distance must
    /// not exceed `r` and the target distance must lie in `1..=c*r`.
    ///
    /// # Errors
    /// Returns [`Error::InvalidParameter`] describing the violated bound.
    pub fn validate(&self, params: &LshParams) -> Result<()> {
        if self.start_distance > params.r {
            return Err(Error::InvalidParameter(format!(
                "start_distance {} exceeds r = {}",
                self.start_distance, params.r
            )));
        }
        if self.target_distance > params.far_radius() {
            return Err(Error::InvalidParameter(format!(
                "target_distance {} exceeds c*r = {}",
                self.target_distance,
                params.far_radius()
            )));
        }
        if self.target_distance == 0 {
            return Err(Error::InvalidParameter(
                "target_distance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Why a run ended without a certified false negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    /// The walk reached `target_distance` while the index still answered
    /// with the origin.
    RadiusReached,
    /// A probe at the far radius still collided with the origin, so the
    /// boundary search had nothing to bisect.
    FarCollision,
    /// The outer-iteration safety cap fired.
    MaxIterations,
    /// The loop exited (the answer was no longer the origin) but the exit
    /// query was answered with some other point, or no stored point lies
    /// within the target distance.
    NotVerified,
    /// The query budget of the random baseline ran out.
    QueryBudgetExhausted,
}

/// One entry of an attack trace.
#[derive(Debug, Clone)]
pub enum TraceEvent {
    /// The sampled starting point.
    Start {
        /// Distance to the origin.
        distance: u32,
        /// The walk position.
        point: Point,
    },
    /// A completed outer iteration (one coordinate pushed).
    Outer {
        /// Distance to the origin after the push.
        distance: u32,
        /// The walk position after the push.
        point: Point,
    },
    /// One boundary-bisection probe of the fast walk.
    Bisect {
        /// Distance between the bracketing points before the probe.
        gap_before: u32,
        /// Distance between the bracketing points after the probe.
        gap_after: u32,
    },
}

/// Result of one attack run.
#[derive(Debug, Clone)]
pub struct AttackOutcome {
    /// Whether a false negative was certified.
    pub success: bool,
    /// The certified query (present exactly when `success`).
    pub query: Option<Point>,
    /// Index queries consumed by this run (counter delta).
    pub lsh_queries_used: u64,
    /// Completed outer iterations.
    pub outer_iterations: u32,
    /// Recorded trace, when enabled.
    pub trace: Option<Vec<TraceEvent>>,
    /// Failure classification (present exactly when `!success`).
    pub failure: Option<FailureReason>,
}

/// Picks the dataset point maximizing the minimum distance to all points
/// with a *different value*, returning it with that minimum distance. For a
/// singleton or all-identical dataset every point qualifies with the
/// sentinel isolation `d + 1`.
///
/// Brute force `O(n^2 d)`; intended for dataset preparation, not hot loops.
pub fn find_isolated_origin(dataset: &Dataset) -> Result<(Point, u32)> {
    let sentinel = dataset.d as u32 + 1;
    let mut best: Option<(usize, u32)> = None;
    for (i, p) in dataset.points.iter().enumerate() {
        let mut isolation = sentinel;
        for q in &dataset.points {
            if p == q {
                continue;
            }
            isolation = isolation.min(distance(p, q)?);
        }
        if best.is_none_or(|(_, b)| isolation > b) {
            best = Some((i, isolation));
        }
    }
    let (i, isolation) = best.expect("dataset is non-empty by construction");
    Ok((dataset.points[i].clone(), isolation))
}

/// Checks the false-negative definition directly: the index answers nothing
/// for `q`, yet some stored point lies within distance `r` of it. The
/// existence check is a direct scan over the point set, not an index query;
/// the query operation is invoked exactly once.
///
/// # Errors
/// Returns [`Error::DimensionMismatch`] when `q` has the wrong dimension.
pub fn verify_false_negative(index: &dyn AnnIndex, q: &Point) -> Result<bool> {
    if index.query(q)?.is_some() {
        return Ok(false);
    }
    Ok(index.dataset().min_distance(q)? <= index.params().r)
}

/// Runs the one-bit-at-a-time walk.
///
/// # Errors
/// Propagates dimension mismatches and configuration violations; algorithmic
/// dead ends (radius reached, far collision, iteration cap) are reported in
/// the outcome, not as errors.
pub fn simple_walk<R: Rng>(
    index: &dyn AnnIndex,
    z: &Point,
    config: &AttackConfig,
    rng: &mut R,
) -> Result<AttackOutcome> {
    walk(index, z, config, rng, WalkAlgo::Simple)
}

/// Runs the jump-and-bisect walk.
///
/// # Errors
/// As [`simple_walk`].
pub fn fast_walk<R: Rng>(
    index: &dyn AnnIndex,
    z: &Point,
    config: &AttackConfig,
    rng: &mut R,
) -> Result<AttackOutcome> {
    walk(index, z, config, rng, WalkAlgo::Fast)
}

/// Runs whichever walk `config.algo` selects. [`simple_walk`] and
/// [`fast_walk`] force their own inner loop instead.
///
/// # Errors
/// As [`simple_walk`].
pub fn run_walk<R: Rng>(
    index: &dyn AnnIndex,
    z: &Point,
    config: &AttackConfig,
    rng: &mut R,
) -> Result<AttackOutcome> {
    walk(index, z, config, rng, config.algo)
}

/// What one inner loop produced.
enum InnerStep {
    /// The coordinate whose flip destroyed the observed collisions.
    Bit(u32),
    /// A far-radius probe still collided with the origin.
    FarCollision,
    /// The inner loop exited before flipping anything (possible only against
    /// non-deterministic wrappers whose answer to the same point changed).
    NoFlip,
}

fn walk<R: Rng>(
    index: &dyn AnnIndex,
    z: &Point,
    config: &AttackConfig,
    rng: &mut R,
    algo: WalkAlgo,
) -> Result<AttackOutcome> {
    let params = index.params();
    config.validate(params)?;
    if z.dim() != params.d {
        return Err(Error::DimensionMismatch {
            left: z.dim(),
            right: params.d,
        });
    }

    let queries_before = index.queries_used();
    let far = params.far_radius();
    let mut q = sample_at_distance(z, config.start_distance, rng)?;
    let mut trace: Option<Vec<TraceEvent>> = config.record_trace.then(|| {
        vec![TraceEvent::Start {
            distance: config.start_distance,
            point: q.clone(),
        }]
    });
    let mut outer = 0u32;

    let finish = |success: bool,
                  query: Option<Point>,
                  failure: Option<FailureReason>,
                  outer: u32,
                  trace: Option<Vec<TraceEvent>>| {
        AttackOutcome {
            success,
            query,
            lsh_queries_used: index.queries_used() - queries_before,
            outer_iterations: outer,
            trace,
            failure,
        }
    };

    loop {
        let answer = index.query(&q)?;
        if !answer_is_origin(index.dataset(), answer, z) {
            // Loop exit: certify directly. The exit query already observed
            // the index's answer, and the near-point check is a direct scan,
            // so no extra index query is spent.
            let success =
                answer.is_none() && index.dataset().min_distance(&q)? <= config.target_distance;
            return Ok(if success {
                finish(true, Some(q), None, outer, trace)
            } else {
                finish(false, None, Some(FailureReason::NotVerified), outer, trace)
            });
        }
        let dist = distance(&q, z)?;
        if dist >= config.target_distance {
            return Ok(finish(false, None, Some(FailureReason::RadiusReached), outer, trace));
        }
        if outer >= config.max_outer_iterations {
            return Ok(finish(false, None, Some(FailureReason::MaxIterations), outer, trace));
        }

        let step = match algo {
            WalkAlgo::Simple => simple_inner(index, z, &q, far, rng)?,
            WalkAlgo::Fast => fast_inner(index, z, &q, far, dist, rng, &mut trace)?,
        };
        match step {
            InnerStep::FarCollision => {
                return Ok(finish(false, None, Some(FailureReason::FarCollision), outer, trace));
            }
            InnerStep::Bit(j) => {
                q.flip(j as usize);
            }
            InnerStep::NoFlip => {}
        }
        outer += 1;
        if let Some(trace) = trace.as_mut() {
            trace.push(TraceEvent::Outer {
                distance: distance(&q, z)?,
                point: q.clone(),
            });
        }
    }
}

/// Whether the index's answer denotes the origin: the returned point equals
/// `z` **by value** (on datasets with duplicated values any copy counts).
fn answer_is_origin(dataset: &Dataset, answer: Option<usize>, z: &Point) -> bool {
    answer.is_some_and(|id| dataset.points[id] == *z)
}

/// Inner loop of the simple walk: flip random agreement bits one at a time
/// in a scratch copy until the answer is no longer the origin; give up if
/// the scratch point passes the far radius while still being answered with
/// the origin.
fn simple_inner<R: Rng>(
    index: &dyn AnnIndex,
    z: &Point,
    q: &Point,
    far: u32,
    rng: &mut R,
) -> Result<InnerStep> {
    let mut probe = q.clone();
    let mut last_flip: Option<u32> = None;
    loop {
        let answer = index.query(&probe)?;
        if !answer_is_origin(index.dataset(), answer, z) {
            return Ok(match last_flip {
                Some(j) => InnerStep::Bit(j),
                None => InnerStep::NoFlip,
            });
        }
        let (next, j) = flip_random_agreement_bit(&probe, z, rng)?;
        probe = next;
        last_flip = Some(j);
        if distance(&probe, z)? > far {
            return Ok(InnerStep::FarCollision);
        }
    }
}

/// Inner loop of the fast walk: jump a scratch copy to the far radius; if
/// the index still answers with the origin there, give up. Otherwise
/// binary-search the boundary between the current point (answered with the
/// origin) and the far point (not), and report the single coordinate
/// separating the final bracket.
fn fast_inner<R: Rng>(
    index: &dyn AnnIndex,
    z: &Point,
    q: &Point,
    far: u32,
    dist: u32,
    rng: &mut R,
    trace: &mut Option<Vec<TraceEvent>>,
) -> Result<InnerStep> {
    let mut right = flip_agreement_bits(q, z, far - dist, rng)?;
    let answer = index.query(&right)?;
    if answer_is_origin(index.dataset(), answer, z) {
        return Ok(InnerStep::FarCollision);
    }
    let mut left = q.clone();
    loop {
        let gap = distance(&left, &right)?;
        if gap <= 1 {
            break;
        }
        let mid = midpoint_toward(&left, &right)?;
        let answer = index.query(&mid)?;
        if answer_is_origin(index.dataset(), answer, z) {
            left = mid;
        } else {
            right = mid;
        }
        if let Some(trace) = trace.as_mut() {
            trace.push(TraceEvent::Bisect {
                gap_before: gap,
                gap_after: distance(&left, &right)?,
            });
        }
    }
    match left.differing_indices(&right)?.first() {
        Some(&j) => Ok(InnerStep::Bit(j)),
        None => Ok(InnerStep::NoFlip),
    }
}

/// Non-adaptive baseline: sample fresh uniform points at distance `r` from
/// `z` until one gets no answer; each sample costs one query.
///
/// # Errors
/// Propagates dimension mismatches; an exhausted budget is reported in the
/// outcome.
pub fn random_baseline<R: Rng>(
    index: &dyn AnnIndex,
    z: &Point,
    r: u32,
    rng: &mut R,
    max_queries: u64,
) -> Result<AttackOutcome> {
    let queries_before = index.queries_used();
    for _ in 0..max_queries {
        let q = sample_at_distance(z, r, rng)?;
        if index.query(&q)?.is_none() {
            // dist(q, z) = r certifies the near-point condition directly
            // whenever z is stored; re-check against the set for the general
            // case.
            let success = index.dataset().min_distance(&q)? <= index.params().r;
            return Ok(AttackOutcome {
                success,
                query: success.then_some(q),
                lsh_queries_used: index.queries_used() - queries_before,
                outer_iterations: 0,
                trace: None,
                failure: (!success).then_some(FailureReason::NotVerified),
            });
        }
    }
    Ok(AttackOutcome {
        success: false,
        query: None,
        lsh_queries_used: index.queries_used() - queries_before,
        outer_iterations: 0,
        trace: None,
        failure: Some(FailureReason::QueryBudgetExhausted),
    })
}
