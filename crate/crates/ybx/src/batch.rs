//! Parallel evaluation with results kept in input order.

use rayon::prelude::*;

use crate::error::YbxError;

/// Runs `f` over `inputs` on at most `jobs` threads (0 = rayon default) and
/// returns the results in input order.
pub fn run_ordered<I, T, F>(inputs: &[I], jobs: usize, f: F) -> Result<Vec<T>, YbxError>
where
    I: Sync,
    T: Send,
    F: Fn(usize, &I) -> Result<T, YbxError> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| YbxError::Usage(format!("cannot start {jobs} workers: {e}")))?;
    let results: Vec<Result<T, YbxError>> = pool.install(|| inputs.par_iter().enumerate().map(|(i, x)| f(i, x)).collect());
    results.into_iter().collect()
}
