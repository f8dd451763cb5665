//! Worker-pool sizing. Results never depend on the worker count: every parallel
//! map in the library collects in index order and reductions run sequentially.

use anyhow::{Context, Result};

pub const THREADS_VAR: &str = "PARACALC_THREADS";

/// Reads PARACALC_THREADS (a positive integer) if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => {
            let k: usize = v.trim().parse().with_context(|| format!("{THREADS_VAR}={v} is not a count"))?;
            anyhow::ensure!(k > 0, "{THREADS_VAR} must be positive");
            Ok(Some(k))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(e).context(THREADS_VAR),
    }
}

/// Caps the global pool at PARACALC_THREADS workers. Call once, before any work.
#[cfg(feature = "parallel")]
pub fn init_global_pool() -> Result<()> {
    if let Some(k) = threads_from_env()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .context("configuring the worker pool")?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
pub fn init_global_pool() -> Result<()> {
    threads_from_env()?;
    Ok(())
}

/// Runs `f` on a dedicated pool of `workers` threads.
#[cfg(feature = "parallel")]
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
pub fn with_workers<T: Send>(_workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    Ok(f())
}
