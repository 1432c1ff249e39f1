//! Packed bit-vector points and the constrained random transformations used
//! by the adversarial walks.
//!
//! A [`Point`] is an element of `{0,1}^d` stored as 64-bit words; Hamming
//! distance is a word-wise XOR + popcount. All transformation helpers treat
//! points as immutable values and return fresh points.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample as sample_indices;
use rand::Rng;

use crate::error::{Error, Result};

/// A point in `{0,1}^d`, bit `i` stored at word `i / 64`, bit `i % 64`.
///
/// Trailing bits beyond `dim` are always zero, so derived equality and
/// ordering agree with the positional-bit semantics.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Point {
    dim: usize,
    words: Vec<u64>,
}

impl Point {
    /// The all-zero point of dimension `dim`.
    ///
    /// # Errors
    /// Returns [`Error::InvalidParameter`] if `dim == 0`.
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            words: vec![0; dim.div_ceil(64)],
        })
    }

    /// Builds a point from explicit bits.
    ///
    /// # Errors
    /// Returns [`Error::InvalidParameter`] if `bits` is empty.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mut p = Self::zeros(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            if b {
                p.set(i, true);
            }
        }
        Ok(p)
    }

    /// Dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Reads bit `i`.
    ///
    /// # Panics
    /// Panics if `i >= dim` (an out-of-range coordinate is a programming
    /// error, not an input condition).
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.dim, "coordinate {i} out of range for dim {}", self.dim);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Writes bit `i`.
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.dim, "coordinate {i} out of range for dim {}", self.dim);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    /// Flips bit `i`.
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.dim, "coordinate {i} out of range for dim {}", self.dim);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    /// Number of set bits.
    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Raw words (read-only; trailing bits are zero).
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Hamming distance to `other`.
    ///
    /// # Errors
    /// Returns [`Error::DimensionMismatch`] when dimensions differ.
    pub fn distance(&self, other: &Point) -> Result<u32> {
        distance(self, other)
    }

    /// Indices where `self` and `other` differ, ascending.
    pub fn differing_indices(&self, other: &Point) -> Result<Vec<u32>> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let mut out = Vec::new();
        for (w, (a, b)) in self.words.iter().zip(&other.words).enumerate() {
            let mut x = a ^ b;
            while x != 0 {
                let bit = x.trailing_zeros();
                out.push((w * 64) as u32 + bit);
                x &= x - 1;
            }
        }
        Ok(out)
    }

    /// Indices where `self` and `other` agree, ascending.
    pub fn agreeing_indices(&self, other: &Point) -> Result<Vec<u32>> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let mut out = Vec::new();
        for (w, (a, b)) in self.words.iter().zip(&other.words).enumerate() {
            // Agreement mask, with bits past `dim` cleared in the last word.
            let mut x = !(a ^ b);
            let base = w * 64;
            if base + 64 > self.dim {
                x &= (1u64 << (self.dim - base)) - 1;
            }
            while x != 0 {
                let bit = x.trailing_zeros();
                out.push(base as u32 + bit);
                x &= x - 1;
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Point({self})")
    }
}

impl FromStr for Point {
    type Err = Error;

    /// Parses a string of `'0'`/`'1'` characters, index 0 first.
    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidParameter("empty point string".into()));
        }
        let mut p = Point::zeros(s.len())?;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => p.set(i, true),
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "invalid character {other:?} in point string"
                    )))
                }
            }
        }
        Ok(p)
    }
}

/// Hamming distance between `p` and `q`.
///
/// # Errors
/// Returns [`Error::DimensionMismatch`] when dimensions differ.
pub fn distance(p: &Point, q: &Point) -> Result<u32> {
    if p.dim != q.dim {
        return Err(Error::DimensionMismatch {
            left: p.dim,
            right: q.dim,
        });
    }
    Ok(p.words
        .iter()
        .zip(&q.words)
        .map(|(a, b)| (a ^ b).count_ones())
        .sum())
}

/// Samples a point uniformly from the sphere of radius `m` around `z`,
/// i.e. flips an `m`-subset of coordinates chosen uniformly without
/// replacement.
///
/// # Errors
/// Returns [`Error::InvalidParameter`] if `m > z.dim()`.
pub fn sample_at_distance<R: Rng>(z: &Point, m: u32, rng: &mut R) -> Result<Point> {
    let d = z.dim();
    if m as usize > d {
        return Err(Error::InvalidParameter(format!(
            "distance {m} exceeds dimension {d}"
        )));
    }
    let mut q = z.clone();
    for i in sample_indices(rng, d, m as usize) {
        q.flip(i);
    }
    Ok(q)
}

/// Flips one coordinate of `q` chosen uniformly from the agreement set
/// `I = {i : q_i == z_i}`; returns the new point and the flipped index.
///
/// # Errors
/// Returns [`Error::NoAgreementBits`] when `I` is empty and
/// [`Error::DimensionMismatch`] on dimension mismatch.
pub fn flip_random_agreement_bit<R: Rng>(
    q: &Point,
    z: &Point,
    rng: &mut R,
) -> Result<(Point, u32)> {
    let agree = q.agreeing_indices(z)?;
    if agree.is_empty() {
        return Err(Error::NoAgreementBits);
    }
    let j = agree[rng.random_range(0..agree.len())];
    let mut out = q.clone();
    out.flip(j as usize);
    Ok((out, j))
}

/// Flips `count` distinct coordinates chosen uniformly without replacement
/// from the agreement set of `q` and `z`.
///
/// # Errors
/// Returns [`Error::InvalidParameter`] when `count` exceeds the agreement-set
/// size and [`Error::DimensionMismatch`] on dimension mismatch.
pub fn flip_agreement_bits<R: Rng>(
    q: &Point,
    z: &Point,
    count: u32,
    rng: &mut R,
) -> Result<Point> {
    let agree = q.agreeing_indices(z)?;
    if count as usize > agree.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot flip {count} agreement bits; only {} available",
            agree.len()
        )));
    }
    let mut out = q.clone();
    for pick in sample_indices(rng, agree.len(), count as usize) {
        out.flip(agree[pick] as usize);
    }
    Ok(out)
}

/// Returns `q_left` with exactly `floor(dist/2)` of the coordinates differing
/// from `q_right` flipped toward `q_right`.
///
/// The flipped coordinates are the lowest-index differing ones, making
/// bisection traces deterministic.
///
/// # Errors
/// Returns [`Error::AlreadyAdjacent`] when the distance is below 2 and
/// [`Error::DimensionMismatch`] on dimension mismatch.
pub fn midpoint_toward(q_left: &Point, q_right: &Point) -> Result<Point> {
    let diff = q_left.differing_indices(q_right)?;
    if diff.len() < 2 {
        return Err(Error::AlreadyAdjacent);
    }
    let mut mid = q_left.clone();
    for &i in &diff[..diff.len() / 2] {
        mid.flip(i as usize);
    }
    Ok(mid)
}
