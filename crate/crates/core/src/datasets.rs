//! Synthetic dataset generators, the plain-text point format, and two
//! encoders for external data.
//!
//! ## Point-set text format
//!
//! UTF-8 text, one point per line as a string of `'0'`/`'1'` characters.
//! Blank lines and lines starting with `#` are ignored. All point lines must
//! have equal length, which becomes the dimension `d`. [`load_points`] and
//! [`save_points`] round-trip this format bit-exactly.

use std::fs;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::point::Point;

/// An immutable set of equal-dimension points.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Human-readable label (generator name or file stem).
    pub name: String,
    /// Dimension shared by all points.
    pub d: usize,
    /// The points; ids used by the index are positions in this vector.
    pub points: Vec<Point>,
}

impl Dataset {
    /// Builds a dataset, validating non-emptiness and dimension agreement.
    ///
    /// # Errors
    /// Returns [`Error::InvalidDataset`] when `points` is empty or some point
    /// has dimension != `d`.
    pub fn new(name: impl Into<String>, d: usize, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidDataset("dataset must be non-empty".into()));
        }
        if let Some(p) = points.iter().find(|p| p.dim() != d) {
            return Err(Error::InvalidDataset(format!(
                "point of dimension {} in dataset of dimension {d}",
                p.dim()
            )));
        }
        Ok(Self {
            name: name.into(),
            d,
            points,
        })
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false (the constructor rejects empty sets); present for
    /// idiomatic completeness.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Minimum distance from `q` to any stored point.
    ///
    /// # Errors
    /// Returns [`Error::DimensionMismatch`] when `q` has the wrong dimension.
    pub fn min_distance(&self, q: &Point) -> Result<u32> {
        let mut best = u32::MAX;
        for p in &self.points {
            best = best.min(p.distance(q)?);
            if best == 0 {
                break;
            }
        }
        Ok(best)
    }
}

/// `n` copies of the all-zero point in dimension `d`.
///
/// # Errors
/// Returns [`Error::InvalidParameter`] when `n == 0` or `d == 0`.
pub fn gen_zero(n: usize, d: usize) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let z = Point::zeros(d)?;
    Dataset::new("zero", d, vec![z; n])
}

/// `n` points with i.i.d. uniform bits.
///
/// # Errors
/// As [`gen_zero`].
pub fn gen_random<R: Rng>(n: usize, d: usize, rng: &mut R) -> Result<Dataset> {
    gen_bernoulli("random", n, d, 0.5, rng)
}

/// `n` points with i.i.d. Bernoulli(`p`) bits (`p = 1/15` mirrors the sparse
/// synthetic setting).
///
/// # Errors
/// Returns [`Error::InvalidParameter`] when `p` is outside `[0, 1]`, plus the
/// [`gen_zero`] conditions.
pub fn gen_sparse_random<R: Rng>(n: usize, d: usize, p: f64, rng: &mut R) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "bit probability must be in [0, 1], got {p}"
        )));
    }
    gen_bernoulli("sparse", n, d, p, rng)
}

fn gen_bernoulli<R: Rng>(
    name: &str,
    n: usize,
    d: usize,
    p: f64,
    rng: &mut R,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let mut point = Point::zeros(d)?;
        for i in 0..d {
            if rng.random::<f64>() < p {
                point.set(i, true);
            }
        }
        points.push(point);
    }
    Dataset::new(name, d, points)
}

/// Parses the point-set text format described in the module docs.
///
/// # Errors
/// Returns [`Error::DataFormat`] (with a 1-based line number) on ragged rows
/// or non-`{0,1}` characters, [`Error::InvalidDataset`] when no point lines
/// are present, and [`Error::Io`] on filesystem failures.
pub fn load_points(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "points".to_string());
    let mut points: Vec<Point> = Vec::new();
    let mut d: Option<usize> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let point: Point = line.parse().map_err(|_| Error::DataFormat {
            line: lineno + 1,
            message: format!("expected a string of 0/1 characters, got {line:?}"),
        })?;
        match d {
            None => d = Some(point.dim()),
            Some(d) if d != point.dim() => {
                return Err(Error::DataFormat {
                    line: lineno + 1,
                    message: format!("row length {} differs from first row ({d})", point.dim()),
                })
            }
            _ => {}
        }
        points.push(point);
    }
    let d = d.ok_or_else(|| Error::InvalidDataset("file contains no points".into()))?;
    Dataset::new(name, d, points)
}

/// Writes `ds` in the point-set text format (the exact inverse of
/// [`load_points`]).
///
/// # Errors
/// Returns [`Error::Io`] on filesystem failures.
pub fn save_points(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::with_capacity(ds.len() * (ds.d + 1));
    for p in &ds.points {
        out.push_str(&p.to_string());
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// One-hot encodes a categorical table: each feature contributes one block of
/// width `|vocabulary|` (vocabularies are collected from the data and sorted
/// for determinism), and each row sets exactly one bit per block.
///
/// # Errors
/// Returns [`Error::InvalidDataset`] on an empty table or ragged rows.
pub fn one_hot_encode(rows: &[Vec<String>]) -> Result<Dataset> {
    let first = rows
        .first()
        .ok_or_else(|| Error::InvalidDataset("no rows to encode".into()))?;
    let arity = first.len();
    if arity == 0 {
        return Err(Error::InvalidDataset("rows have no features".into()));
    }
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != arity) {
        return Err(Error::InvalidDataset(format!(
            "row {i} has {} features, expected {arity}",
            row.len()
        )));
    }
    // Sorted vocabulary per feature.
    let mut vocabs: Vec<Vec<&str>> = vec![Vec::new(); arity];
    for (f, vocab) in vocabs.iter_mut().enumerate() {
        let mut values: Vec<&str> = rows.iter().map(|r| r[f].as_str()).collect();
        values.sort_unstable();
        values.dedup();
        *vocab = values;
    }
    let offsets: Vec<usize> = vocabs
        .iter()
        .scan(0usize, |acc, v| {
            let off = *acc;
            *acc += v.len();
            Some(off)
        })
        .collect();
    let d: usize = vocabs.iter().map(Vec::len).sum();
    let mut points = Vec::with_capacity(rows.len());
    for row in rows {
        let mut p = Point::zeros(d)?;
        for (f, value) in row.iter().enumerate() {
            let slot = vocabs[f].binary_search(&value.as_str()).expect("value seen during vocab pass");
            p.set(offsets[f] + slot, true);
        }
        points.push(p);
    }
    Dataset::new("one-hot", d, points)
}

/// Binarizes a numeric matrix: bit = (value > threshold).
///
/// # Errors
/// Returns [`Error::InvalidDataset`] on an empty matrix or ragged rows.
pub fn threshold_binarize(values: &[Vec<f64>], threshold: f64) -> Result<Dataset> {
    let first = values
        .first()
        .ok_or_else(|| Error::InvalidDataset("no rows to binarize".into()))?;
    let d = first.len();
    if d == 0 {
        return Err(Error::InvalidDataset("rows have no columns".into()));
    }
    let mut points = Vec::with_capacity(values.len());
    for (i, row) in values.iter().enumerate() {
        if row.len() != d {
            return Err(Error::InvalidDataset(format!(
                "row {i} has {} columns, expected {d}",
                row.len()
            )));
        }
        let mut p = Point::zeros(d)?;
        for (j, &v) in row.iter().enumerate() {
            if v > threshold {
                p.set(j, true);
            }
        }
        points.push(p);
    }
    Dataset::new("binarized", d, points)
}
