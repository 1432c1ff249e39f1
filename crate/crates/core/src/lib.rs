//! Hamming-space locality-sensitive hashing, an adaptive adversary that
//! manufactures false-negative queries, two robustification wrappers, and a
//! seeded experiment harness.
//!
//! The crate is organised bottom-up:
//!
//! * [`point`] — packed bit-vector points with Hamming-distance primitives and
//!   the constrained random transformations used by the adversarial walks.
//! * [`params`] — derivation of the classic `(r, cr, p1, p2)`-sensitive
//!   parameters `k`, `rho`, `ell`, `L` from user inputs.
//! * [`index`] — the plain LSH structure: `L` concatenated hash functions with
//!   bucket tables and a deterministic first-hit query procedure.
//! * [`datasets`] — synthetic generators (zero / uniform / sparse) plus a
//!   plain-text point format and two encoders for external data.
//! * [`oracles`] — exact combinatorial ground truth for collision
//!   probabilities, used by tests and the `verify` subcommand, never by the
//!   adversary.
//! * [`adversary`] — the simple and fast adaptive walks and the non-adaptive
//!   random baseline, all operating through the black-box [`index::AnnIndex`]
//!   trait.
//! * [`defenses`] — resampled-copies and noisy-count (differentially private)
//!   query wrappers.
//! * [`harness`] — experiment specs, parameter sweeps, strategy comparison,
//!   defense evaluation, statistical self-checks, and CSV/JSON output.
//!
//! Every randomised component takes an explicit RNG; [`rng`] documents the
//! master-seed / child-seed scheme that makes parallel sweeps reproduce
//! byte-identically at any worker count.

pub mod adversary;
pub mod datasets;
pub mod defenses;
pub mod error;
pub mod harness;
pub mod index;
pub mod oracles;
pub mod params;
pub mod point;
pub mod rng;

pub use error::{Error, Result};
pub use point::Point;
