//! Data-parallel map with a sequential fallback.
//!
//! The heavy loops in this crate (flights within a scenario, scenarios within
//! an experiment) are embarrassingly parallel, so they all funnel through
//! [`map_indexed`]. With the default `parallel` feature the work is spread
//! over a rayon pool; without it the same closure runs on one thread. Both
//! paths visit indices `0..n` and return results in index order, so outputs
//! are identical regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..n` on the current thread.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Always-sequential variant, kept so benchmarks can compare the two paths
/// within a single build.
pub fn map_indexed_seq<U, F>(n: usize, mut f: F) -> Vec<U>
where
    F: FnMut(usize) -> U,
{
    (0..n).map(|i| f(i)).collect()
}
