//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) per-item work runs on the current
//! rayon pool; without it everything runs in order on the calling thread.
//! Results are always collected in index order, so output never depends on
//! the worker count.

use crate::error::Result;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `(0..n).map(f)` collected in order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
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

/// Fallible [`map_indexed`]. On failure returns the error of the lowest
/// failing index, independent of scheduling.
pub fn try_map_indexed<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    map_indexed(n, f).into_iter().collect()
}

/// Runs `f` with `workers` threads, or on the ambient pool when `None`.
/// Without the `parallel` feature the worker count is ignored.
pub fn with_workers<R, F>(workers: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        match workers {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .expect("failed to build worker pool")
                .install(f),
            None => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        f()
    }
}

/// Threads available to [`map_indexed`] in the current context.
pub fn current_workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn order_is_preserved() {
        let v = with_workers(Some(4), || map_indexed(1000, |i| i * 3));
        assert_eq!(v, (0..1000).map(|i| i * 3).collect::<Vec<_>>());
    }

    #[test]
    fn lowest_error_wins() {
        let r: Result<Vec<usize>> = with_workers(Some(3), || {
            try_map_indexed(500, |i| {
                if i % 97 == 13 { Err(Error::EmptyInput(if i == 13 { "first" } else { "later" })) } else { Ok(i) }
            })
        });
        assert!(matches!(r, Err(Error::EmptyInput("first"))));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn worker_count_is_applied() {
        assert_eq!(with_workers(Some(3), current_workers), 3);
    }
}
