//! Derivation of LSH parameters from the user inputs `(n, d, r, c, lambda)`.
//!
//! The elementary hash family (project to one uniformly random coordinate) is
//! `(r, cr, 1 - r/d, 1 - cr/d)`-sensitive. From the collision probabilities
//! `p1 = 1 - r/d` and `p2 = 1 - cr/d` the standard construction sets
//!
//! * `k = ceil(log_{1/p2} n)` coordinates per concatenated hash,
//! * `rho = ln(1/p1) / ln(1/p2)`,
//! * `ell = n^rho`, and
//! * `L = ceil(lambda * ell)` concatenated hashes in total,
//!
//! where `lambda` scales the table count: the probability that a query at
//! distance `r` from a stored point finds no collision is roughly
//! `exp(-lambda)`. (The per-query failure probability delta of the usual
//! statement corresponds to `exp(-Theta(lambda))`; this crate exposes
//! `lambda` only.)

use serde::Serialize;

use crate::error::{Error, Result};

/// Maximum supported dimension; bucket keys for `k <= 64` pack into a single
/// machine word and coordinates into `u32`s.
pub const MAX_DIMENSION: usize = 1 << 16;

/// User inputs plus all derived LSH quantities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LshParams {
    /// Dataset size.
    pub n: usize,
    /// Dimension of the Hamming cube.
    pub d: usize,
    /// Near radius.
    pub r: u32,
    /// Approximation factor (> 1).
    pub c: f64,
    /// Table-count multiplier (> 0).
    pub lambda: f64,
    /// Collision probability at distance `r`: `1 - r/d`.
    pub p1: f64,
    /// Collision probability at distance `cr`: `1 - cr/d`.
    pub p2: f64,
    /// `ln(1/p1) / ln(1/p2)`.
    pub rho: f64,
    /// Coordinates per concatenated hash: `ceil(ln n / ln(1/p2))`, min 1.
    pub k: u32,
    /// `n^rho`.
    pub ell: f64,
    /// Number of concatenated hashes: `ceil(lambda * ell)`.
    pub l: u32,
}

impl LshParams {
    /// The integer far radius: the Alg-style filter `dist <= c*r` is
    /// equivalent to `dist <= floor(c*r)` for integer distances. A small
    /// epsilon guards against representation dust in `c * r`.
    pub fn far_radius(&self) -> u32 {
        (self.c * f64::from(self.r) + 1e-9).floor() as u32
    }
}

/// Derives the full parameter set.
///
/// # Errors
/// Returns [`Error::InvalidParameter`] when `n < 2`, `r == 0`, `c <= 1`,
/// `lambda <= 0`, `c*r > d`, or `d` exceeds [`MAX_DIMENSION`].
pub fn derive_params(n: usize, d: usize, r: u32, c: f64, lambda: f64) -> Result<LshParams> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be >= 2, got {n}")));
    }
    if d == 0 || d > MAX_DIMENSION {
        return Err(Error::InvalidParameter(format!(
            "d must be in 1..={MAX_DIMENSION}, got {d}"
        )));
    }
    if r == 0 {
        return Err(Error::InvalidParameter("r must be positive".into()));
    }
    if !(c > 1.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("c must be > 1, got {c}")));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be > 0, got {lambda}"
        )));
    }
    let cr = c * f64::from(r);
    if cr > d as f64 + 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "far radius exceeds dimension: c*r = {cr} > d = {d}"
        )));
    }
    let p1 = 1.0 - f64::from(r) / d as f64;
    let p2 = 1.0 - cr / d as f64;
    let ln_inv_p2 = -p2.max(0.0).ln(); // +inf when p2 == 0
    let rho = -p1.ln() / ln_inv_p2;
    // k = ceil(log_{1/p2} n); the formula yields 0 only in the degenerate
    // p2 == 0 case (c*r == d), where one coordinate already separates far
    // pairs, so clamp to 1.
    let k = ((n as f64).ln() / ln_inv_p2).ceil().max(1.0) as u32;
    let ell = (n as f64).powf(rho);
    let l = (lambda * ell).ceil() as u32;
    Ok(LshParams {
        n,
        d,
        r,
        c,
        lambda,
        p1,
        p2,
        rho,
        k,
        ell,
        l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The default experiment setting used throughout the test suite.
    pub fn defaults() -> LshParams {
        derive_params(1000, 300, 30, 2.0, 4.0).unwrap()
    }

    #[test]
    fn default_setting_probabilities() {
        let p = defaults();
        assert!((p.p1 - 0.9).abs() < 1e-12);
        assert!((p.p2 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn default_setting_derived_quantities() {
        // Independently computed with high-precision arithmetic:
        // k = ceil(ln 1000 / ln 1.25) = ceil(30.9564...) = 31
        // rho = ln(1/0.9) / ln(1.25) = 0.472164734482815...
        // ell = 1000^rho = 26.0912089870629...
        // L = ceil(4 * ell) = ceil(104.3648...) = 105
        let p = defaults();
        assert_eq!(p.k, 31);
        assert!((p.rho - 0.472_164_734_482_815).abs() < 1e-12, "rho = {}", p.rho);
        assert!((p.ell - 26.091_208_987_063).abs() < 1e-9, "ell = {}", p.ell);
        assert_eq!(p.l, 105);
        assert_eq!(p.far_radius(), 60);
    }

    #[test]
    fn tiny_setting_formula_evaluation() {
        let p = derive_params(2, 4, 1, 2.0, 1.0).unwrap();
        assert!((p.p1 - 0.75).abs() < 1e-12);
        assert!((p.p2 - 0.5).abs() < 1e-12);
        assert_eq!(p.k, 1);
        let expected_rho = (4.0f64 / 3.0).ln() / 2.0f64.ln();
        assert!((p.rho - expected_rho).abs() < 1e-12);
    }

    #[test]
    fn ceil_identities_hold() {
        // The stored k and L always equal re-evaluated ceilings.
        for (n, d, r, c, lambda) in [
            (1000usize, 300usize, 30u32, 2.0f64, 4.0f64),
            (50, 128, 10, 3.0, 1.0),
            (10_000, 300, 45, 2.0, 8.0),
            (2, 4, 1, 2.0, 0.5),
            (317, 1024, 64, 2.5, 2.25),
        ] {
            let p = derive_params(n, d, r, c, lambda).unwrap();
            let k = ((n as f64).ln() / (1.0 / p.p2).ln()).ceil().max(1.0) as u32;
            let l = (lambda * (n as f64).powf(p.rho)).ceil() as u32;
            assert_eq!(p.k, k);
            assert_eq!(p.l, l);
            assert!(p.rho > 0.0 && p.rho < 1.0);
            assert!(p.p2 < p.p1 && p.p1 < 1.0 && p.p2 >= 0.0);
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(derive_params(1, 300, 30, 2.0, 4.0).is_err());
        assert!(derive_params(1000, 300, 0, 2.0, 4.0).is_err());
        assert!(derive_params(1000, 300, 30, 1.0, 4.0).is_err());
        assert!(derive_params(1000, 300, 30, 2.0, 0.0).is_err());
        // far radius exceeds dimension
        assert!(derive_params(1000, 300, 200, 2.0, 4.0).is_err());
        assert!(derive_params(1000, MAX_DIMENSION + 1, 30, 2.0, 4.0).is_err());
    }

    #[test]
    fn far_radius_floors_fractional_cr() {
        let p = derive_params(100, 100, 3, 1.5, 1.0).unwrap();
        assert_eq!(p.far_radius(), 4); // c*r = 4.5
        let p = derive_params(100, 100, 10, 2.0, 1.0).unwrap();
        assert_eq!(p.far_radius(), 20);
    }
}
