//! Execution strategy for the data-parallel loops (message enumeration,
//! tuple enumeration, dual-code sums, sweep trials).
//!
//! Every parallel path splits its index space into fixed chunks that do not
//! depend on the thread count, and combines chunk results in chunk order.
//! Floating-point outputs are therefore bit-identical between
//! [`Exec::Sequential`] and [`Exec::Parallel`].

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length used when splitting large index ranges.
pub const CHUNK: u64 = 1 << 12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Exec {
    /// Applies `f` to every index in `0..n`, returning results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
        }
    }

    /// Splits `0..total` into fixed chunks of [`CHUNK`] indices, maps each
    /// chunk with `f`, and returns the per-chunk results in chunk order.
    pub fn map_chunks<T, F>(self, total: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Range<u64>) -> T + Sync + Send,
    {
        let chunks = total.div_ceil(CHUNK) as usize;
        self.map(chunks, |c| {
            let start = c as u64 * CHUNK;
            f(start..(start + CHUNK).min(total))
        })
    }
}
