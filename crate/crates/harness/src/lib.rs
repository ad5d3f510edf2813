//! Experiment harness for fwboost: CSV and synthetic data, the repeated
//! split / cross-validate / fit protocol, and metric files.

pub mod data;
pub mod error;
pub mod experiment;
pub mod protocol;

pub use error::{HarnessError, Result};

/// Environment variable bounding worker threads (`0` or unset: one per core).
pub const THREADS_ENV: &str = "FWBOOST_THREADS";

/// Sizes the global thread pool from [`THREADS_ENV`]. Results never depend
/// on the thread count.
pub fn init_threads() -> Result<()> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            HarnessError::Invalid(format!(
                "{THREADS_ENV} must be a non-negative integer, got {v:?}"
            ))
        })?,
        Err(_) => 0,
    };
    // A pool that is already running is kept.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}
