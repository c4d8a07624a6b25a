//! Fixed-block execution for the direct-sum oracles.
//!
//! Every oracle splits its index range into blocks of [`BLOCK`] consecutive
//! integers. Blocks are evaluated independently (in parallel when the
//! `parallel` feature is on) and their partial results are combined strictly
//! in block order, so floating-point reductions are bit-identical regardless
//! of the worker count.

use std::ops::Range;

/// Block length for range partitioning. Independent of the thread count.
pub const BLOCK: u64 = 1 << 14;

/// Execution strategy for block-partitioned work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// Runs blocks on the rayon pool; identical to `Sequential` when the
    /// crate is built without the `parallel` feature.
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Splits `range` into consecutive blocks of `BLOCK` integers.
pub fn blocks(range: Range<u64>) -> Vec<Range<u64>> {
    let mut out = Vec::new();
    let mut lo = range.start;
    while lo < range.end {
        let hi = (lo + BLOCK).min(range.end);
        out.push(lo..hi);
        lo = hi;
    }
    out
}

/// Evaluates `f` on every block of `range` and returns the per-block results
/// in block order.
pub fn map_blocks<T, F>(range: Range<u64>, exec: Exec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync + Send,
{
    let parts = blocks(range);
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            parts.into_par_iter().map(f).collect()
        }
        _ => parts.into_iter().map(f).collect(),
    }
}

/// Applies `f` to each element of `items`, preserving order.
pub fn map_items<I, T, F>(items: Vec<I>, exec: Exec, f: F) -> Vec<T>
where
    I: Send,
    T: Send,
    F: Fn(I) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            items.into_par_iter().map(f).collect()
        }
        _ => items.into_iter().map(f).collect(),
    }
}

/// Block-partitioned sum with deterministic left-to-right reduction.
pub fn sum_blocks<T, F>(range: Range<u64>, exec: Exec, zero: T, f: F) -> T
where
    T: Send + std::ops::Add<Output = T>,
    F: Fn(Range<u64>) -> T + Sync + Send,
{
    map_blocks(range, exec, f)
        .into_iter()
        .fold(zero, |acc, part| acc + part)
}
