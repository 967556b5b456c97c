//! Data-parallel loop helpers.
//!
//! With the `parallel` feature the helpers dispatch to rayon, unless the
//! runtime switch [`set_parallel`] has turned it off. Without the feature
//! every loop runs sequentially.

use std::sync::atomic::{AtomicBool, Ordering};

static ENABLED: AtomicBool = AtomicBool::new(true);

/// Enables or disables the rayon path at runtime (no effect without the
/// `parallel` feature).
pub fn set_parallel(on: bool) {
    ENABLED.store(on, Ordering::Relaxed);
}

/// True when loops are dispatched to rayon.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel") && ENABLED.load(Ordering::Relaxed)
}

/// Configures the global rayon pool size. Returns false if the pool was
/// already initialized or the feature is off.
pub fn init_threads(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        false
    }
}

/// Collects `f(i)` for `i in 0..n`.
pub(crate) fn map<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Maximum of `f(i)` over `0..n` (0 for empty ranges).
pub(crate) fn max_of<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).reduce(|| 0.0, f64::max);
    }
    (0..n).map(f).fold(0.0, f64::max)
}
