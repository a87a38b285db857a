//! Data-parallel helpers.
//!
//! With the `parallel` feature the hot loops (LHS trials, binning rows) run on
//! rayon; without it every [`Execution`] mode runs sequentially. Results never
//! depend on the mode: work items are indexed and reductions are
//! order-independent.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// `(0..n).map(f).collect()`, in parallel when requested and available.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Maps every index and folds with an associative, commutative `reduce`.
pub fn map_reduce<T, F, R>(exec: Execution, n: usize, identity: T, f: F, reduce: R) -> T
where
    T: Send + Sync + Clone,
    F: Fn(usize) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n)
                .into_par_iter()
                .map(f)
                .reduce(|| identity.clone(), &reduce)
        }
        _ => (0..n).map(f).fold(identity, reduce),
    }
}
