//! Shared worker pool for frequency and phase sweeps.

use std::sync::OnceLock;

/// Environment variable that caps the number of sweep workers.
pub const WORKERS_ENV: &str = "PARACIRC_WORKERS";

static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();

pub fn pool() -> &'static rayon::ThreadPool {
    POOL.get_or_init(|| {
        let workers = std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|n| *n > 0)
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("failed to start worker pool")
    })
}
