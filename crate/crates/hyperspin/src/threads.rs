//! Worker pool sized by `HYPERSPIN_THREADS`.

use crate::error::{AppError, Result};

pub const THREADS_ENV: &str = "HYPERSPIN_THREADS";

/// Worker cap from the environment: `None` when unset or empty.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(s) if s.trim().is_empty() => Ok(None),
        Ok(s) => parse_cap(&s).map(Some),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(AppError::Config(format!("{THREADS_ENV}: {e}"))),
    }
}

pub fn parse_cap(s: &str) -> Result<usize> {
    match s.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(AppError::Config(format!("{THREADS_ENV} must be a positive integer, got `{s}`"))),
    }
}

/// Workers a command will use.
pub fn effective_threads() -> Result<usize> {
    Ok(thread_cap()?.unwrap_or_else(rayon::current_num_threads))
}

/// Pool with at most the requested number of workers.
pub fn pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| AppError::Config(e.to_string()))
}

/// Runs `f` inside the capped pool.
pub fn install<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    Ok(pool()?.install(f))
}
