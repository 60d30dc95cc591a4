//! Data-parallel helpers with a sequential fallback.
//!
//! All parallel maps preserve input order, and every reduction in the crate
//! folds the collected results sequentially, so numerical output is identical
//! with the `parallel` feature on or off.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, in parallel when the `parallel` feature is enabled.
/// The output order always matches the input order.
pub fn maybe_par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Index-driven variant of [`maybe_par_map`].
pub fn maybe_par_map_idx<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Always-sequential map, kept for benchmarking against the parallel path.
pub fn seq_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Caps the global thread pool. `None` leaves the default (all cores).
/// Returns whether the cap was applied; calling twice is a no-op.
pub fn configure_threads(n: Option<usize>) -> bool {
    #[cfg(feature = "parallel")]
    {
        match n {
            Some(n) if n >= 1 => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .is_ok(),
            _ => false,
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        false
    }
}
