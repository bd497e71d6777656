//! Sublinear-time estimation of random-greedy maximal independent set size
//! under an adjacency-matrix oracle, and an O(log k)-approximate metric
//! Steiner Forest cost estimator built on it.
//!
//! Alongside the estimators the crate carries the exact baselines used to
//! check them: brute-force RGMIS, a Dreyfus-Wagner Steiner Forest solver
//! for small instances, and constructive certificates for the upper bound.

pub mod bench;
pub mod certify;
pub mod error;
pub mod format;
pub mod gen;
pub mod instance;
pub mod mis;
pub mod oracle;
pub mod perm;
pub mod rng;
pub mod steiner;

pub use error::{Error, Result};
pub use instance::{Metric, MetricInstance};
pub use oracle::{CountingAdjacencyOracle, CountingDistanceOracle, Graph, Scale};
pub use perm::{random_permutation, Permutation};
