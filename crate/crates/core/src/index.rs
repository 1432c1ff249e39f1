//! The plain Hamming LSH structure: `L` concatenated coordinate-projection
//! hashes with bucket tables, and a deterministic first-hit query procedure.
//!
//! Querying scans the hash functions in stored order, looks up the query's
//! bucket under each, and returns the first stored point within distance
//! `c*r`; if no function yields one the answer is "no near point"
//! (`None`). The scan order plus insertion order make query answers fully
//! deterministic once the hash functions are fixed.
//!
//! [`AnnIndex`] is the black-box boundary handed to adversarial code: it
//! exposes parameters, the point set, the query operation, and the query
//! counter — never the hash functions or tables. White-box diagnostics
//! ([`LshIndex::coll_set`], [`LshIndex::hashes`]) are inherent methods on the
//! concrete type, used only by tests, oracles, and the verification suite.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::Rng;

use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::params::LshParams;
use crate::point::Point;

/// A concatenation of `k` elementary hashes: projection of a point onto `k`
/// coordinates sampled i.i.d. uniformly **with replacement** (duplicates are
/// kept; they matter for support-size statistics).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcatHash {
    coords: Vec<u32>,
}

impl ConcatHash {
    /// Builds a hash from explicit coordinates (primarily for tests).
    ///
    /// # Errors
    /// Returns [`Error::InvalidParameter`] when empty or out of range.
    pub fn from_coords(coords: Vec<u32>, d: usize) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("hash needs at least one coordinate".into()));
        }
        if let Some(&c) = coords.iter().find(|&&c| c as usize >= d) {
            return Err(Error::InvalidParameter(format!(
                "coordinate {c} out of range for dimension {d}"
            )));
        }
        Ok(Self { coords })
    }

    /// The `k` projected coordinates, in sampling order.
    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    /// Number of distinct coordinates read by this hash.
    pub fn support_size(&self) -> usize {
        let mut sorted = self.coords.clone();
        sorted.sort_unstable();
        sorted.dedup();
        sorted.len()
    }

    /// The bucket key of `p`: the k-bit projection.
    fn key(&self, p: &Point) -> BucketKey {
        if self.coords.len() <= 64 {
            let mut bits = 0u64;
            for (j, &c) in self.coords.iter().enumerate() {
                if p.get(c as usize) {
                    bits |= 1 << j;
                }
            }
            BucketKey::Packed(bits)
        } else {
            let mut words = vec![0u64; self.coords.len().div_ceil(64)];
            for (j, &c) in self.coords.iter().enumerate() {
                if p.get(c as usize) {
                    words[j / 64] |= 1 << (j % 64);
                }
            }
            BucketKey::Wide(words.into_boxed_slice())
        }
    }
}

/// A k-bit projection: packed into one word for `k <= 64`, a word slice
/// otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum BucketKey {
    Packed(u64),
    Wide(Box<[u64]>),
}

/// Samples a concatenated hash: `k` coordinates i.i.d. uniform on `[0, d)`.
pub fn sample_hash<R: Rng>(params: &LshParams, rng: &mut R) -> ConcatHash {
    let coords = (0..params.k)
        .map(|_| rng.random_range(0..params.d as u32))
        .collect();
    ConcatHash { coords }
}

/// Black-box capabilities available to adversarial code: the query operation,
/// the parameters, the point set, and the cumulative query count. Nothing
/// about the hash functions leaks through this trait.
pub trait AnnIndex: Send + Sync {
    /// The parameters the structure was built with.
    fn params(&self) -> &LshParams;

    /// The indexed point set.
    fn dataset(&self) -> &Dataset;

    /// One query: the id of a stored point within distance `c*r` of `q`, or
    /// `None`. Increments the query counter by exactly 1 regardless of
    /// outcome.
    ///
    /// # Errors
    /// Returns [`Error::DimensionMismatch`] when `q` has the wrong dimension.
    fn query(&self, q: &Point) -> Result<Option<usize>>;

    /// Total queries answered so far.
    fn queries_used(&self) -> u64;
}

/// The plain LSH index.
pub struct LshIndex {
    params: LshParams,
    hashes: Vec<ConcatHash>,
    tables: Vec<HashMap<BucketKey, Vec<u32>>>,
    dataset: Arc<Dataset>,
    query_count: AtomicU64,
}

impl LshIndex {
    /// Samples `L` hash functions and inserts every point into its bucket
    /// under each.
    ///
    /// # Errors
    /// Returns [`Error::InvalidDataset`] when `|P| != params.n` and
    /// [`Error::DimensionMismatch`] when the dataset dimension differs from
    /// `params.d`.
    pub fn build<R: Rng>(dataset: Arc<Dataset>, params: &LshParams, rng: &mut R) -> Result<Self> {
        let hashes: Vec<ConcatHash> = (0..params.l).map(|_| sample_hash(params, rng)).collect();
        Self::with_hashes(dataset, params, hashes)
    }

    /// Builds an index over explicit hash functions. An empty list is
    /// permitted: such an index collides nothing and answers every query with
    /// `None`, which is useful as a degenerate test fixture.
    ///
    /// # Errors
    /// As [`LshIndex::build`], plus [`Error::InvalidParameter`] for hashes
    /// that read out-of-range coordinates.
    pub fn with_hashes(
        dataset: Arc<Dataset>,
        params: &LshParams,
        hashes: Vec<ConcatHash>,
    ) -> Result<Self> {
        if dataset.len() != params.n {
            return Err(Error::InvalidDataset(format!(
                "dataset has {} points, params expect n = {}",
                dataset.len(),
                params.n
            )));
        }
        if dataset.d != params.d {
            return Err(Error::DimensionMismatch {
                left: dataset.d,
                right: params.d,
            });
        }
        for h in &hashes {
            if let Some(&c) = h.coords().iter().find(|&&c| c as usize >= params.d) {
                return Err(Error::InvalidParameter(format!(
                    "hash coordinate {c} out of range for dimension {}",
                    params.d
                )));
            }
        }
        let tables = hashes
            .iter()
            .map(|g| {
                let mut table: HashMap<BucketKey, Vec<u32>> = HashMap::new();
                for (id, p) in dataset.points.iter().enumerate() {
                    table.entry(g.key(p)).or_default().push(id as u32);
                }
                table
            })
            .collect();
        Ok(Self {
            params: params.clone(),
            hashes,
            tables,
            dataset,
            query_count: AtomicU64::new(0),
        })
    }

    /// White-box diagnostic: indices of the hash functions under which `p`
    /// and `q` share a bucket. Never used by adversarial code and does not
    /// touch the query counter.
    ///
    /// # Errors
    /// Returns [`Error::DimensionMismatch`] on dimension mismatch.
    pub fn coll_set(&self, p: &Point, q: &Point) -> Result<Vec<usize>> {
        self.check_dim(p)?;
        self.check_dim(q)?;
        Ok(self
            .hashes
            .iter()
            .enumerate()
            .filter(|(_, g)| g.key(p) == g.key(q))
            .map(|(i, _)| i)
            .collect())
    }

    /// White-box diagnostic: the hash functions themselves (for support
    /// statistics and oracle cross-checks).
    pub fn hashes(&self) -> &[ConcatHash] {
        &self.hashes
    }

    /// The shared dataset handle.
    pub fn dataset_arc(&self) -> Arc<Dataset> {
        Arc::clone(&self.dataset)
    }

    fn check_dim(&self, q: &Point) -> Result<()> {
        if q.dim() != self.params.d {
            return Err(Error::DimensionMismatch {
                left: q.dim(),
                right: self.params.d,
            });
        }
        Ok(())
    }
}

impl AnnIndex for LshIndex {
    fn params(&self) -> &LshParams {
        &self.params
    }

    fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    fn query(&self, q: &Point) -> Result<Option<usize>> {
        self.check_dim(q)?;
        self.query_count.fetch_add(1, Ordering::Relaxed);
        let far = self.params.far_radius();
        for (g, table) in self.hashes.iter().zip(&self.tables) {
            let Some(bucket) = table.get(&g.key(q)) else {
                continue;
            };
            for &id in bucket {
                let p = &self.dataset.points[id as usize];
                if p.distance(q)? <= far {
                    return Ok(Some(id as usize));
                }
            }
        }
        Ok(None)
    }

    fn queries_used(&self) -> u64 {
        self.query_count.load(Ordering::Relaxed)
    }
}

/// Free-function form of [`LshIndex::build`].
///
/// # Errors
/// As [`LshIndex::build`].
pub fn build_index<R: Rng>(
    dataset: Arc<Dataset>,
    params: &LshParams,
    rng: &mut R,
) -> Result<LshIndex> {
    LshIndex::build(dataset, params, rng)
}
