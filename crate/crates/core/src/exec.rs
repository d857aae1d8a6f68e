//! Parallel execution helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) the heavy loops fan out over
//! rayon; without it the same entry points run sequentially. Both paths are
//! bit-for-bit deterministic: results are collected in index order and
//! reductions tie-break on the smallest index, so thread count and work
//! stealing never change an answer.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Minimizes `f` over `0..n`, returning `(value, index)`. Exact value ties
/// resolve to the smallest index on both execution paths.
pub fn min_by_index<F>(n: usize, f: F) -> (f64, usize)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    assert!(n > 0, "min_by_index needs a nonempty range");
    let pick = |a: (f64, usize), b: (f64, usize)| {
        if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    #[cfg(feature = "parallel")]
    {
        (0..n)
            .into_par_iter()
            .map(|i| (f(i), i))
            .reduce(|| (f64::INFINITY, usize::MAX), pick)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n)
            .map(|i| (f(i), i))
            .fold((f64::INFINITY, usize::MAX), pick)
    }
}
