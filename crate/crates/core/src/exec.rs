//! Execution strategy for the data-parallel loops.
//!
//! With the `parallel` feature disabled, [`Exec::Parallel`] silently runs
//! sequentially, so call sites never need a `cfg`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Map `f` over `0..len`, preserving index order in the output.
    pub fn map_range<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
            _ => (0..len).map(f).collect(),
        }
    }

    /// Map `f` over a slice, preserving order.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        self.map_range(items.len(), |i| f(&items[i]))
    }

    /// Fold `0..len` with an associative, commutative combiner. Results are
    /// identical across strategies as long as `combine` is exact (min/max,
    /// integer sums).
    pub fn fold_range<T, F, C>(self, len: usize, identity: T, f: F, combine: C) -> T
    where
        T: Send + Sync + Clone,
        F: Fn(usize) -> T + Sync + Send,
        C: Fn(T, T) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..len)
                    .into_par_iter()
                    .with_min_len(1024)
                    .map(f)
                    .reduce(|| identity.clone(), &combine)
            }
            _ => (0..len).map(f).fold(identity, combine),
        }
    }
}
