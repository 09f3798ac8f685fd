//! Thread-pool plumbing shared by the numerical modules.

use std::sync::OnceLock;

/// Environment variable capping internal parallelism.
pub const THREADS_ENV: &str = "CONIC_LMCF_THREADS";

static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();

fn pool() -> &'static rayon::ThreadPool {
    POOL.get_or_init(|| {
        let n = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("failed to build thread pool")
    })
}

/// Runs `f` inside the crate's pool, so `CONIC_LMCF_THREADS` is honoured.
pub fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    pool().install(f)
}

pub fn num_threads() -> usize {
    pool().current_num_threads()
}
