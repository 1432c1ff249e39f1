//! Robustification wrappers: random resampling over many independently
//! built plain-LSH copies, and differentially-private noisy-count
//! aggregation over such copies.
//!
//! Both wrappers hold `copies` indexes built over the same point set with
//! independent hash randomness, each with `lambda = 1`, and relay every
//! query to `query_samples` copies chosen uniformly without replacement.
//! The resampling wrapper returns the first answered point in sample order.
//! The noisy-count wrapper perturbs the success/failure tallies with
//! independent two-sided geometric noise before deciding whether to answer
//! at all, which makes even a fixed query's outcome non-deterministic after
//! the hash randomness is frozen — the property that blunts adaptive
//! adversaries, at the price of some accuracy.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::index::{AnnIndex, LshIndex};
use crate::params::LshParams;
use crate::point::Point;
use crate::rng::rng_from_seed;

/// Samples the two-sided geometric distribution with
/// `Pr[z] = (1 - alpha) / (1 + alpha) * alpha^|z|` over the integers, as the
/// difference of two i.i.d. geometric variables with success probability
/// `1 - alpha`.
///
/// # Errors
/// Returns [`Error::InvalidParameter`] unless `0 < alpha < 1`.
pub fn sample_two_sided_geometric<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<i64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "noise parameter alpha must lie strictly between 0 and 1, got {alpha}"
        )));
    }
    let geometric = Geometric::new(1.0 - alpha)
        .map_err(|e| Error::InvalidParameter(format!("geometric noise: {e}")))?;
    let up = geometric.sample(rng) as i64;
    let down = geometric.sample(rng) as i64;
    Ok(up - down)
}

fn validate_copy_counts(copies: usize, query_samples: usize) -> Result<()> {
    if query_samples == 0 {
        return Err(Error::InvalidParameter(
            "query_samples must be at least 1".into(),
        ));
    }
    if query_samples > copies {
        return Err(Error::InvalidParameter(format!(
            "query_samples {query_samples} exceeds the number of copies {copies}"
        )));
    }
    Ok(())
}

fn validate_copies(copies: &[LshIndex], query_samples: usize) -> Result<()> {
    let Some(first) = copies.first() else {
        return Err(Error::InvalidParameter(
            "at least one copy is required".into(),
        ));
    };
    validate_copy_counts(copies.len(), query_samples)?;
    for copy in copies {
        if (copy.params().lambda - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "copies must be built with lambda = 1, got {}",
                copy.params().lambda
            )));
        }
        if !Arc::ptr_eq(&first.dataset_arc(), &copy.dataset_arc()) {
            return Err(Error::InvalidDataset(
                "all copies must share one dataset".into(),
            ));
        }
    }
    Ok(())
}

/// A bank of independently built plain-LSH copies answered by random
/// resampling: each query relays to `query_samples` copies chosen without
/// replacement and returns the first answered point in sample order.
pub struct ResampledIndex {
    copies: Vec<LshIndex>,
    query_samples: usize,
    query_count: AtomicU64,
    rng: Mutex<ChaCha8Rng>,
}

impl ResampledIndex {
    /// Wraps pre-built copies (they must share one dataset and use
    /// `lambda = 1`). `seed` drives the copy selection made on behalf of
    /// [`AnnIndex::query`] calls.
    pub fn from_copies(copies: Vec<LshIndex>, query_samples: usize, seed: u64) -> Result<Self> {
        validate_copies(&copies, query_samples)?;
        Ok(Self {
            copies,
            query_samples,
            query_count: AtomicU64::new(0),
            rng: Mutex::new(rng_from_seed(seed)),
        })
    }

    /// The underlying copies, in build order.
    pub fn copies(&self) -> &[LshIndex] {
        &self.copies
    }

    /// How many copies each query relays to.
    pub fn query_samples(&self) -> usize {
        self.query_samples
    }

    /// Sum of the copies' query counters.
    pub fn underlying_queries_used(&self) -> u64 {
        self.copies.iter().map(AnnIndex::queries_used).sum()
    }
}

/// Builds `copies` independent plain-LSH indexes over the same dataset and
/// wraps them in a [`ResampledIndex`]. `params` must carry `lambda = 1`.
///
/// # Errors
/// Rejects `query_samples` outside `1..=copies`, a `lambda != 1`, and any
/// dataset/parameter mismatch surfaced by the underlying builds.
pub fn build_resampled<R: Rng>(
    dataset: Arc<Dataset>,
    params: &LshParams,
    copies: usize,
    query_samples: usize,
    rng: &mut R,
) -> Result<ResampledIndex> {
    validate_copy_counts(copies, query_samples)?;
    let built = (0..copies)
        .map(|_| LshIndex::build(Arc::clone(&dataset), params, rng))
        .collect::<Result<Vec<_>>>()?;
    ResampledIndex::from_copies(built, query_samples, rng.random())
}

/// Answers `q` by relaying it to `query_samples` copies chosen uniformly
/// without replacement, returning the first answered point in sample order
/// (or `None` when every sampled copy answers nothing). All sampled copies
/// are queried, so exactly `query_samples` underlying counters increment.
///
/// # Errors
/// Returns [`Error::DimensionMismatch`] when `q` has the wrong dimension.
pub fn query_resampled<R: Rng + ?Sized>(
    idx: &ResampledIndex,
    q: &Point,
    rng: &mut R,
) -> Result<Option<usize>> {
    check_wrapper_dim(&idx.copies, q)?;
    idx.query_count.fetch_add(1, Ordering::Relaxed);
    let sample = rand::seq::index::sample(rng, idx.copies.len(), idx.query_samples);
    let mut answer = None;
    for copy_id in sample.iter() {
        let this = idx.copies[copy_id].query(q)?;
        if answer.is_none() {
            answer = this;
        }
    }
    Ok(answer)
}

impl AnnIndex for ResampledIndex {
    fn params(&self) -> &LshParams {
        self.copies[0].params()
    }

    fn dataset(&self) -> &Dataset {
        self.copies[0].dataset()
    }

    fn query(&self, q: &Point) -> Result<Option<usize>> {
        let mut rng = self.rng.lock().expect("rng mutex poisoned");
        query_resampled(self, q, &mut *rng)
    }

    fn queries_used(&self) -> u64 {
        self.query_count.load(Ordering::Relaxed)
    }
}

/// A bank of plain-LSH copies answered through noisy success/failure counts:
/// each query relays to `query_samples` copies, perturbs the tallies of
/// answered vs. unanswered copies with independent two-sided geometric
/// noise, and refuses to answer when the noisy failure count exceeds the
/// noisy success count.
pub struct DpIndex {
    copies: Vec<LshIndex>,
    query_samples: usize,
    alpha: f64,
    query_count: AtomicU64,
    rng: Mutex<ChaCha8Rng>,
}

impl DpIndex {
    /// Wraps pre-built copies (shared dataset, `lambda = 1`) with noise
    /// parameter `alpha`. `seed` drives the copy selection and noise made on
    /// behalf of [`AnnIndex::query`] calls.
    pub fn from_copies(
        copies: Vec<LshIndex>,
        query_samples: usize,
        alpha: f64,
        seed: u64,
    ) -> Result<Self> {
        validate_copies(&copies, query_samples)?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "noise parameter alpha must lie strictly between 0 and 1, got {alpha}"
            )));
        }
        Ok(Self {
            copies,
            query_samples,
            alpha,
            query_count: AtomicU64::new(0),
            rng: Mutex::new(rng_from_seed(seed)),
        })
    }

    /// The underlying copies, in build order.
    pub fn copies(&self) -> &[LshIndex] {
        &self.copies
    }

    /// How many copies each query relays to.
    pub fn query_samples(&self) -> usize {
        self.query_samples
    }

    /// The two-sided geometric noise parameter.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Sum of the copies' query counters.
    pub fn underlying_queries_used(&self) -> u64 {
        self.copies.iter().map(AnnIndex::queries_used).sum()
    }
}

/// Standard noise level: `alpha = e^{-1/4}`.
pub const DEFAULT_ALPHA: f64 = 0.778_800_783_071_404_9;

/// Builds `copies` independent plain-LSH indexes and wraps them in a
/// [`DpIndex`] with noise parameter `alpha`.
///
/// # Errors
/// As [`build_resampled`], plus `alpha` outside `(0, 1)`.
pub fn build_dp<R: Rng>(
    dataset: Arc<Dataset>,
    params: &LshParams,
    copies: usize,
    query_samples: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<DpIndex> {
    validate_copy_counts(copies, query_samples)?;
    let built = (0..copies)
        .map(|_| LshIndex::build(Arc::clone(&dataset), params, rng))
        .collect::<Result<Vec<_>>>()?;
    DpIndex::from_copies(built, query_samples, alpha, rng.random())
}

/// Answers `q` through noisy counts: relays to `query_samples` copies
/// sampled without replacement, tallies successes `s` and failures `f`,
/// perturbs each with an independent two-sided geometric draw, and returns
/// `None` when the noisy failure count strictly exceeds the noisy success
/// count. Otherwise it returns the first successful copy's point — or
/// `None` when `s == 0`, since no point exists to return even though the
/// comparison favored success. Ties favor answering.
///
/// # Errors
/// Returns [`Error::DimensionMismatch`] when `q` has the wrong dimension.
pub fn query_dp<R: Rng + ?Sized>(idx: &DpIndex, q: &Point, rng: &mut R) -> Result<Option<usize>> {
    check_wrapper_dim(&idx.copies, q)?;
    idx.query_count.fetch_add(1, Ordering::Relaxed);
    let sample = rand::seq::index::sample(rng, idx.copies.len(), idx.query_samples);
    let mut first_success: Option<usize> = None;
    let mut successes = 0i64;
    let mut failures = 0i64;
    for copy_id in sample.iter() {
        match idx.copies[copy_id].query(q)? {
            Some(id) => {
                successes += 1;
                if first_success.is_none() {
                    first_success = Some(id);
                }
            }
            None => failures += 1,
        }
    }
    let noisy_successes = successes + sample_two_sided_geometric(idx.alpha, rng)?;
    let noisy_failures = failures + sample_two_sided_geometric(idx.alpha, rng)?;
    if noisy_failures > noisy_successes {
        return Ok(None);
    }
    Ok(first_success)
}

impl AnnIndex for DpIndex {
    fn params(&self) -> &LshParams {
        self.copies[0].params()
    }

    fn dataset(&self) -> &Dataset {
        self.copies[0].dataset()
    }

    fn query(&self, q: &Point) -> Result<Option<usize>> {
        let mut rng = self.rng.lock().expect("rng mutex poisoned");
        query_dp(self, q, &mut *rng)
    }

    fn queries_used(&self) -> u64 {
        self.query_count.load(Ordering::Relaxed)
    }
}

fn check_wrapper_dim(copies: &[LshIndex], q: &Point) -> Result<()> {
    let d = copies[0].params().d;
    if q.dim() != d {
        return Err(Error::DimensionMismatch {
            left: q.dim(),
            right: d,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{gen_zero, Dataset};
    use crate::index::ConcatHash;
    use crate::params::derive_params;
    use crate::point::{distance, sample_at_distance};
    use crate::rng::rng_from_seed;

    const ALPHA: f64 = DEFAULT_ALPHA;

    fn pmf(alpha: f64, z: i64) -> f64 {
        (1.0 - alpha) / (1.0 + alpha) * alpha.powi(z.unsigned_abs() as i32)
    }

    #[test]
    fn two_sided_geometric_matches_reference_masses() {
        let mut rng = rng_from_seed(40);
        let samples = 100_000u32;
        let mut freq = std::collections::HashMap::new();
        for _ in 0..samples {
            let z = sample_two_sided_geometric(ALPHA, &mut rng).unwrap();
            *freq.entry(z).or_insert(0u32) += 1;
        }
        let f = |z: i64| f64::from(*freq.get(&z).unwrap_or(&0)) / f64::from(samples);
        // (1 - alpha) / (1 + alpha) with alpha = e^{-1/4}.
        assert!((f(0) - 0.124_353).abs() < 0.005, "P[0] = {}", f(0));
        assert!((f(1) - f(-1)).abs() < 0.005, "symmetry broke");
        // Closed-form pmf across a window of outcomes.
        for z in -4..=4 {
            let expect = pmf(ALPHA, z);
            let sigma = (expect * (1.0 - expect) / f64::from(samples)).sqrt();
            assert!(
                (f(z) - expect).abs() <= 4.0 * sigma,
                "P[{z}] = {}, expected {expect}",
                f(z)
            );
        }

        // Near-deterministic limit.
        let mut zeros = 0u32;
        for _ in 0..samples {
            if sample_two_sided_geometric(0.01, &mut rng).unwrap() == 0 {
                zeros += 1;
            }
        }
        let rate = f64::from(zeros) / f64::from(samples);
        assert!((rate - 0.9802).abs() < 0.005, "P[0] at alpha=0.01 = {rate}");
    }

    #[test]
    fn two_sided_geometric_rejects_bad_alpha() {
        let mut rng = rng_from_seed(41);
        for alpha in [0.0, 1.0, -0.3, 1.7, f64::NAN] {
            assert!(sample_two_sided_geometric(alpha, &mut rng).is_err());
        }
    }

    fn lambda_one_params() -> crate::params::LshParams {
        derive_params(2, 64, 12, 2.0, 1.0).unwrap()
    }

    fn duplicate_pair_dataset(d: usize) -> Arc<Dataset> {
        let z = Point::zeros(d).unwrap();
        Arc::new(Dataset::new("pair", d, vec![z.clone(), z]).unwrap())
    }

    #[test]
    fn build_validations_are_enforced() {
        let params = lambda_one_params();
        let ds = duplicate_pair_dataset(64);
        let mut rng = rng_from_seed(42);
        assert!(build_resampled(Arc::clone(&ds), &params, 4, 0, &mut rng).is_err());
        assert!(build_resampled(Arc::clone(&ds), &params, 4, 5, &mut rng).is_err());
        let bad = derive_params(2, 64, 12, 2.0, 4.0).unwrap();
        assert!(build_resampled(Arc::clone(&ds), &bad, 4, 2, &mut rng).is_err());
        assert!(build_dp(Arc::clone(&ds), &params, 4, 2, 0.0, &mut rng).is_err());
        assert!(build_dp(Arc::clone(&ds), &params, 4, 2, 1.0, &mut rng).is_err());
        assert!(build_dp(Arc::clone(&ds), &params, 4, 2, ALPHA, &mut rng).is_ok());
    }

    #[test]
    fn copies_have_distinct_hash_functions() {
        let params = derive_params(16, 64, 8, 2.0, 1.0).unwrap();
        let ds = Arc::new(gen_zero(16, 64).unwrap());
        let mut rng = rng_from_seed(43);
        let idx = build_resampled(ds, &params, 8, 3, &mut rng).unwrap();
        let signatures: Vec<Vec<Vec<u32>>> = idx
            .copies()
            .iter()
            .map(|c| c.hashes().iter().map(|g| g.coords().to_vec()).collect())
            .collect();
        for i in 0..signatures.len() {
            for j in (i + 1)..signatures.len() {
                assert_ne!(signatures[i], signatures[j], "copies {i} and {j} coincide");
            }
        }
    }

    #[test]
    fn single_copy_wrapper_relays_plain_answers() {
        let params = lambda_one_params();
        let ds = duplicate_pair_dataset(64);
        let mut rng = rng_from_seed(44);
        let idx = build_resampled(Arc::clone(&ds), &params, 1, 1, &mut rng).unwrap();
        let z = Point::zeros(64).unwrap();
        for m in [0u32, 4, 12, 20, 40] {
            for _ in 0..10 {
                let q = sample_at_distance(&z, m, &mut rng).unwrap();
                let direct = idx.copies()[0].query(&q).unwrap();
                let relayed = idx.query(&q).unwrap();
                assert_eq!(direct, relayed);
            }
        }
    }

    #[test]
    fn one_wrapper_query_touches_exactly_query_samples_counters() {
        let params = lambda_one_params();
        let ds = duplicate_pair_dataset(64);
        let mut rng = rng_from_seed(45);
        let idx = build_resampled(Arc::clone(&ds), &params, 8, 3, &mut rng).unwrap();
        let q = Point::zeros(64).unwrap();
        idx.query(&q).unwrap();
        assert_eq!(idx.queries_used(), 1);
        assert_eq!(idx.underlying_queries_used(), 3);
        let touched = idx
            .copies()
            .iter()
            .filter(|c| c.queries_used() == 1)
            .count();
        assert_eq!(touched, 3);
        idx.query(&q).unwrap();
        assert_eq!(idx.underlying_queries_used(), 6);

        let dp = build_dp(ds, &params, 5, 2, ALPHA, &mut rng).unwrap();
        dp.query(&q).unwrap();
        assert_eq!(dp.queries_used(), 1);
        assert_eq!(dp.underlying_queries_used(), 2);
    }

    /// Copies that always answer nothing: no hash functions at all.
    fn empty_copy(ds: &Arc<Dataset>, params: &crate::params::LshParams) -> LshIndex {
        LshIndex::with_hashes(Arc::clone(ds), params, Vec::new()).unwrap()
    }

    /// Copies that always answer on queries agreeing with the (all-zeros)
    /// dataset at coordinate 0: a single one-coordinate hash.
    fn constant_copy(ds: &Arc<Dataset>, params: &crate::params::LshParams) -> LshIndex {
        let g = ConcatHash::from_coords(vec![0], 64).unwrap();
        LshIndex::with_hashes(Arc::clone(ds), params, vec![g]).unwrap()
    }

    #[test]
    fn all_empty_copies_answer_bottom() {
        let params = lambda_one_params();
        let ds = duplicate_pair_dataset(64);
        let copies = (0..3).map(|_| empty_copy(&ds, &params)).collect();
        let idx = ResampledIndex::from_copies(copies, 2, 46).unwrap();
        let z = Point::zeros(64).unwrap();
        for _ in 0..100 {
            assert_eq!(idx.query(&z).unwrap(), None);
        }
    }

    #[test]
    fn exact_member_is_always_answered() {
        let params = lambda_one_params();
        let ds = duplicate_pair_dataset(64);
        let mut rng = rng_from_seed(47);
        let idx = build_resampled(Arc::clone(&ds), &params, 4, 2, &mut rng).unwrap();
        let z = Point::zeros(64).unwrap();
        for _ in 0..200 {
            let answer = idx.query(&z).unwrap().expect("member must be found");
            assert_eq!(idx.dataset().points[answer], z);
        }

        // Noise that is almost surely zero makes the count comparison
        // deterministic: s = query_samples, f = 0 always answers.
        let dp = build_dp(Arc::clone(&ds), &params, 4, 2, 1e-9, &mut rng).unwrap();
        for _ in 0..200 {
            assert!(dp.query(&z).unwrap().is_some());
        }

        // At the standard noise level: s = 4, f = 0 on every query, so the
        // answer rate is P[failure noise - success noise <= 4] = 0.7476.
        let dp = build_dp(ds, &params, 4, 4, ALPHA, &mut rng).unwrap();
        let answered = (0..1000).filter(|_| dp.query(&z).unwrap().is_some()).count();
        let rate = answered as f64 / 1000.0;
        assert!((rate - 0.7476).abs() <= 0.05, "answer rate {rate}");
    }

    #[test]
    fn resampled_bottom_rate_matches_subset_enumeration_exactly() {
        // Three always-miss copies and three always-hit copies; sampling 2
        // of 6 without replacement misses both with probability
        // C(3,2)/C(6,2) = 3/15 = 0.2.
        let params = lambda_one_params();
        let ds = duplicate_pair_dataset(64);
        let copies = (0..6)
            .map(|i| {
                if i < 3 {
                    empty_copy(&ds, &params)
                } else {
                    constant_copy(&ds, &params)
                }
            })
            .collect();
        let idx = ResampledIndex::from_copies(copies, 2, 48).unwrap();
        // Any query agreeing at coordinate 0 and within c*r of the zeros
        // point hits the constant copies.
        let q: Point = ("01".to_owned() + &"0".repeat(62)).parse().unwrap();
        let trials = 5000u32;
        let bottoms = (0..trials).filter(|_| idx.query(&q).unwrap().is_none()).count();
        let rate = bottoms as f64 / f64::from(trials);
        let sigma = (0.2f64 * 0.8 / f64::from(trials)).sqrt();
        assert!((rate - 0.2).abs() <= 3.0 * sigma, "bottom rate {rate}");
    }

    #[test]
    fn resampled_bottom_rate_matches_subset_enumeration_on_real_build() {
        let params = lambda_one_params();
        let ds = duplicate_pair_dataset(64);
        let mut rng = rng_from_seed(49);
        let copies = 6usize;
        let query_samples = 2usize;
        let idx = build_resampled(ds, &params, copies, query_samples, &mut rng).unwrap();
        let z = Point::zeros(64).unwrap();
        let q = sample_at_distance(&z, params.r, &mut rng).unwrap();

        // Oracle: query every copy once; the wrapper misses exactly when
        // both sampled copies miss, so P = C(m, 2) / C(6, 2) for m missing
        // copies.
        let missing = idx
            .copies()
            .iter()
            .filter(|c| c.query(&q).unwrap().is_none())
            .count();
        let expected = (missing.saturating_sub(1) * missing) as f64 / (6.0 * 5.0);

        let trials = 5000u32;
        let bottoms = (0..trials).filter(|_| idx.query(&q).unwrap().is_none()).count();
        let rate = bottoms as f64 / f64::from(trials);
        if expected == 0.0 {
            assert_eq!(bottoms, 0, "impossible misses happened");
        } else {
            let sigma = (expected * (1.0 - expected) / f64::from(trials)).sqrt();
            assert!(
                (rate - expected).abs() <= 3.0 * sigma + 1e-9,
                "bottom rate {rate}, subset oracle {expected} ({missing} copies miss)"
            );
        }
    }

    #[test]
    fn dp_tied_counts_answer_bottom_at_the_noise_comparison_rate() {
        // One always-miss copy and one always-hit copy, both always sampled:
        // s = f = 1 on every query, so BOTTOM exactly when the failure noise
        // strictly exceeds the success noise.
        let params = lambda_one_params();
        let ds = duplicate_pair_dataset(64);
        let copies = vec![empty_copy(&ds, &params), constant_copy(&ds, &params)];
        let idx = DpIndex::from_copies(copies, 2, ALPHA, 50).unwrap();
        let z = Point::zeros(64).unwrap();

        // P[N1 - N2 = 0] for i.i.d. two-sided geometrics, then
        // P[N1 > N2] = (1 - P[tie]) / 2 by symmetry.
        let tie: f64 = (-200..=200i64).map(|z| pmf(ALPHA, z).powi(2)).sum();
        let expected = (1.0 - tie) / 2.0;

        let trials = 10_000u32;
        let bottoms = (0..trials).filter(|_| idx.query(&z).unwrap().is_none()).count();
        let rate = bottoms as f64 / f64::from(trials);
        assert!(
            (rate - expected).abs() <= 0.01,
            "bottom rate {rate}, expected {expected}"
        );
    }

    #[test]
    fn dp_answers_bottom_whenever_no_copy_succeeds() {
        let params = lambda_one_params();
        let ds = duplicate_pair_dataset(64);
        let copies = (0..2).map(|_| empty_copy(&ds, &params)).collect();
        let idx = DpIndex::from_copies(copies, 2, ALPHA, 51).unwrap();
        let z = Point::zeros(64).unwrap();
        // Noise often favors success here, yet nothing exists to return.
        for _ in 0..500 {
            assert_eq!(idx.query(&z).unwrap(), None);
        }
    }

    #[test]
    fn repeating_one_query_yields_both_outcomes() {
        let params = lambda_one_params();
        let ds = duplicate_pair_dataset(64);

        // DP wrapper at pinned s == f: roughly fair coin.
        let copies = vec![empty_copy(&ds, &params), constant_copy(&ds, &params)];
        let dp = DpIndex::from_copies(copies, 2, ALPHA, 52).unwrap();
        let z = Point::zeros(64).unwrap();
        let outcomes: std::collections::HashSet<bool> =
            (0..1000).map(|_| dp.query(&z).unwrap().is_some()).collect();
        assert_eq!(outcomes.len(), 2, "DP answers never varied");

        // Resampling wrapper with a mixed bank: outcome depends on the
        // sampled subset.
        let copies = (0..6)
            .map(|i| {
                if i < 3 {
                    empty_copy(&ds, &params)
                } else {
                    constant_copy(&ds, &params)
                }
            })
            .collect();
        let rs = ResampledIndex::from_copies(copies, 2, 53).unwrap();
        let outcomes: std::collections::HashSet<bool> =
            (0..1000).map(|_| rs.query(&z).unwrap().is_some()).collect();
        assert_eq!(outcomes.len(), 2, "resampled answers never varied");
    }

    #[test]
    fn wrappers_never_answer_farther_than_the_far_radius() {
        let params = lambda_one_params();
        let far = params.far_radius();
        let ds = duplicate_pair_dataset(64);
        let mut rng = rng_from_seed(54);
        let rs = build_resampled(Arc::clone(&ds), &params, 5, 2, &mut rng).unwrap();
        let dp = build_dp(Arc::clone(&ds), &params, 5, 2, ALPHA, &mut rng).unwrap();
        let z = Point::zeros(64).unwrap();
        for m in [0u32, 6, 12, 18, 24, 30, 40, 64] {
            for _ in 0..20 {
                let q = sample_at_distance(&z, m, &mut rng).unwrap();
                for answer in [rs.query(&q).unwrap(), dp.query(&q).unwrap()] {
                    if let Some(id) = answer {
                        let p = &rs.dataset().points[id];
                        assert!(distance(p, &q).unwrap() <= far);
                    }
                }
            }
        }
    }

    #[test]
    fn wrapper_dimension_mismatch_is_rejected_and_uncounted() {
        let params = lambda_one_params();
        let ds = duplicate_pair_dataset(64);
        let mut rng = rng_from_seed(55);
        let idx = build_resampled(ds, &params, 3, 2, &mut rng).unwrap();
        let wrong = Point::zeros(32).unwrap();
        assert!(idx.query(&wrong).is_err());
        assert_eq!(idx.queries_used(), 0);
        assert_eq!(idx.underlying_queries_used(), 0);
    }
}
