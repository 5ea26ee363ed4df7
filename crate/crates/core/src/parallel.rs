//! Order-preserving parallel map over trial indices.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// `f(0), f(1), ..., f(count - 1)` evaluated on the current rayon pool and
/// returned in index order. Any error aborts the whole map.
pub(crate) fn try_map_trials<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..count as u64).into_par_iter().map(f).collect()
}

/// Runs `op` on a dedicated pool of `workers` threads.
pub fn with_workers<R, F>(workers: usize, op: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::WorkerPool(e.to_string()))?;
    Ok(pool.install(op))
}
