//! Exact combinatorial ground truth for collision probabilities.
//!
//! Everything here is independent of the index implementation: probabilities
//! are computed from first principles (finite-population counting), so tests
//! can compare Monte-Carlo measurements on the real structure against these
//! values. Oracles take **realized** hash supports rather than re-deriving
//! distributions, decoupling "is the formula right" from "is the sampler
//! right".
//!
//! Adversarial code never calls into this module.

use crate::error::{Error, Result};
use crate::params::LshParams;

/// The basic quantity: a fixed hash support of size `s` in dimension `d`,
/// and a uniformly random `m`-subset of flipped coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CollisionModel {
    /// Dimension.
    pub d: usize,
    /// Support size of the hash function.
    pub s: usize,
    /// Number of flipped coordinates.
    pub m: usize,
}

impl CollisionModel {
    /// Probability that the flip set avoids the support entirely, i.e. that
    /// the hash collides the flipped point with the original.
    pub fn collision_prob(&self) -> f64 {
        exact_collision_prob(self.d, self.s, self.m)
    }
}

/// `C(n, k)` as an exact `u128`, or `None` on overflow.
fn binomial_u128(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut res: u128 = 1;
    for i in 1..=k {
        // res * (n - k + i) is divisible by i at every step.
        res = res.checked_mul((n - k + i) as u128)? / i as u128;
    }
    Some(res)
}

/// Probability that a uniform `m`-subset of `[d]` (flipped coordinates)
/// avoids a fixed support of size `s`: `C(d-s, m) / C(d, m)`.
///
/// This equals the collision probability `Pr[g(q) = g(z)]` for `q` uniform at
/// distance `m` from `z` and a hash `g` of support size `s`. Returns 0 when
/// `m > d - s` (the flips cannot all avoid the support) and 1 when `s == 0`.
///
/// Small cases use exact integer binomials (so enumeration tests can demand
/// bit-for-bit equality); larger cases fall back to an exact-in-structure
/// product of ratios evaluated in floating point.
pub fn exact_collision_prob(d: usize, s: usize, m: usize) -> f64 {
    if s == 0 {
        return if m <= d { 1.0 } else { 0.0 };
    }
    if m + s > d {
        return 0.0;
    }
    if let (Some(num), Some(den)) = (binomial_u128(d - s, m), binomial_u128(d, m)) {
        // Both fit in f64-exact range only for modest d, but the ratio of
        // u128s converted through f64 keeps ~1 ulp accuracy far beyond the
        // exact-equality regime of the tests (d <= 10).
        if num <= 1u128 << 52 && den <= 1u128 << 52 {
            return num as f64 / den as f64;
        }
    }
    (0..m)
        .map(|i| (d - s - i) as f64 / (d - i) as f64)
        .product()
}

/// Exact `E[|Coll(q, z)|]` for `q` uniform at distance `m`, given the
/// realized support sizes of all `L` hash functions: the sum of per-hash
/// collision probabilities.
///
/// # Errors
/// Returns [`Error::InvalidParameter`] when the profile length differs from
/// `params.l`.
pub fn expected_collisions(params: &LshParams, m: usize, supports: &[usize]) -> Result<f64> {
    if supports.len() != params.l as usize {
        return Err(Error::InvalidParameter(format!(
            "support profile has {} entries, expected L = {}",
            supports.len(),
            params.l
        )));
    }
    Ok(supports
        .iter()
        .map(|&s| exact_collision_prob(params.d, s, m))
        .sum())
}

/// Expected support size of a concatenated hash: `k` coordinates drawn
/// i.i.d. uniformly from `[d]` cover `d * (1 - (1 - 1/d)^k)` distinct
/// coordinates in expectation.
pub fn expected_support(d: usize, k: u32) -> f64 {
    let d = d as f64;
    d * (1.0 - (1.0 - 1.0 / d).powi(k as i32))
}

/// Exact probability that a uniform query at distance `m` from the sole
/// stored point value gets no answer, given realized supports: the product
/// over hashes of their non-collision probabilities.
///
/// In the single-point regime the distance filter never rejects (`m <= c*r`
/// in all uses), so "no answer" is exactly "no hash collides".
///
/// # Errors
/// As [`expected_collisions`].
pub fn bottom_probability_single_point(
    params: &LshParams,
    supports: &[usize],
    m: usize,
) -> Result<f64> {
    if supports.len() != params.l as usize {
        return Err(Error::InvalidParameter(format!(
            "support profile has {} entries, expected L = {}",
            supports.len(),
            params.l
        )));
    }
    Ok(supports
        .iter()
        .map(|&s| 1.0 - exact_collision_prob(params.d, s, m))
        .product())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::gen_zero;
    use crate::index::{sample_hash, LshIndex};
    use crate::params::derive_params;
    use crate::point::{sample_at_distance, Point};
    use crate::rng::rng_from_seed;
    use std::sync::Arc;

    fn defaults() -> LshParams {
        derive_params(1000, 300, 30, 2.0, 4.0).unwrap()
    }

    /// Exhaustive counterpart: enumerate all m-subsets of [d] as bitmasks and
    /// count those avoiding the first `s` coordinates.
    fn enumerated_prob(d: usize, s: usize, m: usize) -> f64 {
        let support: u32 = (1u32 << s) - 1;
        let mut total = 0u64;
        let mut avoiding = 0u64;
        for mask in 0u32..1 << d {
            if mask.count_ones() as usize != m {
                continue;
            }
            total += 1;
            if mask & support == 0 {
                avoiding += 1;
            }
        }
        avoiding as f64 / total as f64
    }

    #[test]
    fn trivial_values() {
        for m in 0..=10 {
            assert_eq!(exact_collision_prob(10, 0, m), 1.0);
        }
        assert_eq!(exact_collision_prob(10, 3, 2), 21.0 / 45.0);
        assert!((exact_collision_prob(10, 3, 2) - 0.4667).abs() < 1e-4);
        for s in 1..=10 {
            assert_eq!(exact_collision_prob(10, s, 10), 0.0);
        }
    }

    #[test]
    fn collision_model_wraps_the_formula() {
        let model = CollisionModel { d: 10, s: 3, m: 2 };
        assert_eq!(model.collision_prob(), 21.0 / 45.0);
    }

    #[test]
    fn matches_enumeration_exactly_on_small_cases() {
        // A slice of the full acceptance sweep: exact equality, no tolerance.
        for d in 1..=8usize {
            for s in 0..=d {
                for m in 0..=d {
                    assert_eq!(
                        exact_collision_prob(d, s, m),
                        enumerated_prob(d, s, m),
                        "d={d} s={s} m={m}"
                    );
                }
            }
        }
    }

    #[test]
    fn monotone_non_increasing_in_s_and_m() {
        for d in [10usize, 50, 300] {
            for s in 0..d {
                for m in 0..d {
                    let p = exact_collision_prob(d, s, m);
                    assert!(p >= exact_collision_prob(d, s + 1, m) - 1e-15);
                    assert!(p >= exact_collision_prob(d, s, m + 1) - 1e-15);
                }
            }
        }
    }

    #[test]
    fn large_dimension_fallback_is_accurate() {
        // d big enough to overflow integer binomials: compare the product
        // fallback against the independent with-replacement-free identity
        // via logarithms.
        let (d, s, m) = (10_000usize, 60usize, 400usize);
        let p = exact_collision_prob(d, s, m);
        let ln_p: f64 = (0..m)
            .map(|i| ((d - s - i) as f64).ln() - ((d - i) as f64).ln())
            .sum();
        assert!((p.ln() - ln_p).abs() < 1e-9);
        assert!(p > 0.0 && p < 1.0);
    }

    #[test]
    fn expected_support_reference_values() {
        assert_eq!(expected_support(300, 0), 0.0);
        assert!((expected_support(1, 5) - 1.0).abs() < 1e-12);
        let v = expected_support(300, 31);
        assert!((v - 29.498_59).abs() < 1e-3, "expected support {v}");

        // Monte-Carlo cross-check of the coupon formula.
        let mut rng = rng_from_seed(3);
        let params = defaults();
        let samples = 100_000;
        let mean: f64 = (0..samples)
            .map(|_| sample_hash(&params, &mut rng).support_size() as f64)
            .sum::<f64>()
            / f64::from(samples);
        assert!((mean - v).abs() < 0.02, "MC mean {mean} vs formula {v}");
    }

    #[test]
    fn expected_collisions_reference_values() {
        let params = defaults();
        let all_zero = vec![0usize; params.l as usize];
        assert_eq!(
            expected_collisions(&params, 7, &all_zero).unwrap(),
            f64::from(params.l)
        );
        assert!(expected_collisions(&params, 7, &[0, 0]).is_err());

        let tiny = derive_params(2, 10, 3, 2.0, 0.1).unwrap();
        assert_eq!(tiny.l, 1);
        let v = expected_collisions(&tiny, 2, &[3]).unwrap();
        assert_eq!(v, 21.0 / 45.0);
    }

    #[test]
    fn expected_collisions_matches_monte_carlo_at_defaults() {
        // Build one default index over the zero dataset; measure mean
        // |Coll(q, z)| over 10^4 uniform q at distance r against the exact
        // expectation for the realized supports, within 3 sigma.
        let params = defaults();
        let mut rng = rng_from_seed(5);
        let ds = Arc::new(gen_zero(1000, 300).unwrap());
        let idx = LshIndex::build(Arc::clone(&ds), &params, &mut rng).unwrap();
        let supports: Vec<usize> = idx.hashes().iter().map(|g| g.support_size()).collect();
        let z = Point::zeros(300).unwrap();

        let exact = expected_collisions(&params, 30, &supports).unwrap();
        let trials = 10_000u32;
        let mut sum = 0f64;
        let mut sumsq = 0f64;
        for _ in 0..trials {
            let q = sample_at_distance(&z, 30, &mut rng).unwrap();
            let coll = idx.coll_set(&z, &q).unwrap().len() as f64;
            sum += coll;
            sumsq += coll * coll;
        }
        let mean = sum / f64::from(trials);
        let var = (sumsq / f64::from(trials) - mean * mean).max(0.0);
        let sem = (var / f64::from(trials)).sqrt();
        assert!(
            (mean - exact).abs() <= 3.0 * sem,
            "MC mean {mean}, exact {exact}, sem {sem}"
        );
    }

    #[test]
    fn bottom_probability_reference_and_monte_carlo() {
        let params = defaults();
        // Any zero support forces the product to zero.
        let mut supports = vec![5usize; params.l as usize];
        supports[17] = 0;
        assert_eq!(
            bottom_probability_single_point(&params, &supports, 30).unwrap(),
            0.0
        );

        let tiny = derive_params(2, 10, 3, 2.0, 0.1).unwrap();
        let v = bottom_probability_single_point(&tiny, &[3], 2).unwrap();
        assert!((v - (1.0 - 21.0 / 45.0)).abs() < 1e-15);

        // Monte-Carlo agreement at defaults on one realized index.
        let mut rng = rng_from_seed(7);
        let ds = Arc::new(gen_zero(1000, 300).unwrap());
        let idx = LshIndex::build(Arc::clone(&ds), &params, &mut rng).unwrap();
        let supports: Vec<usize> = idx.hashes().iter().map(|g| g.support_size()).collect();
        let z = Point::zeros(300).unwrap();
        let exact = bottom_probability_single_point(&params, &supports, 30).unwrap();
        let trials = 10_000u32;
        let mut bottoms = 0u32;
        for _ in 0..trials {
            let q = sample_at_distance(&z, 30, &mut rng).unwrap();
            if idx.coll_set(&z, &q).unwrap().is_empty() {
                bottoms += 1;
            }
        }
        let rate = f64::from(bottoms) / f64::from(trials);
        let sigma = (exact * (1.0 - exact) / f64::from(trials)).sqrt();
        assert!(
            (rate - exact).abs() <= 3.0 * sigma,
            "MC rate {rate}, exact {exact}, sigma {sigma}"
        );
    }

    #[test]
    fn default_parameter_bottom_probability_is_near_design_target() {
        // Averaged over hash sampling, the per-hash collision probability at
        // distance r is (1 - r/d)^k, so a fresh index answers nothing with
        // probability (1 - p1^k)^L = 0.0168335 at the default setting, in
        // line with the exp(-lambda) = 0.0183 design heuristic.
        let params = defaults();
        let per_hash = params.p1.powi(params.k as i32);
        let bottom = (1.0 - per_hash).powi(params.l as i32);
        assert!((bottom - 0.016_833_5).abs() < 1e-6, "fresh-index rate {bottom}");
        assert!(bottom < 0.05);
    }
}
