//! Worker pool for independent work items.
//!
//! The worker count comes from `SPECLAB_THREADS` (default: available
//! cores). Results are always returned in item order, and every item
//! carries its own seed, so the count never changes the output.

use std::sync::OnceLock;

use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;
use rayon::ThreadPool;

pub const THREADS_VAR: &str = "SPECLAB_THREADS";

pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => {
            let n: usize =
                v.trim().parse().with_context(|| format!("{THREADS_VAR}={v:?} is not a positive integer"))?;
            if n == 0 {
                return Err(anyhow!("{THREADS_VAR} must be at least 1"));
            }
            Ok(n)
        }
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn pool() -> Result<&'static ThreadPool> {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    if let Some(p) = POOL.get() {
        return Ok(p);
    }
    let p = rayon::ThreadPoolBuilder::new().num_threads(thread_count()?).build().context("cannot start worker pool")?;
    Ok(POOL.get_or_init(|| p))
}

/// Maps `f` over `items` on the pool; the first error (in item order) wins.
pub fn try_map<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    let out: Vec<Result<U>> = pool()?.install(|| items.par_iter().map(&f).collect());
    out.into_iter().collect()
}
