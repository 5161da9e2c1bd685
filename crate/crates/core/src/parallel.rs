/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "QRPS_THREADS";

use crate::error::{QrpsError, Result};

/// Pool sized by `QRPS_THREADS`, defaulting to the machine's cores.
pub(crate) fn worker_pool() -> Result<rayon::ThreadPool> {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| QrpsError::Config(format!("cannot build worker pool: {e}")))
}
