//! Batch execution over independent work items.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] runs
//! on the rayon global pool; without it every batch runs sequentially. The
//! output order always matches the input order, so results are identical
//! either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True if batches will actually fan out across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `(0..n).map(f)` collected in order.
pub fn map_indices<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// `items.iter().map(f)` collected in order.
pub fn map_slice<I, T, F>(items: &[I], exec: Execution, f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Runs `op` on a dedicated pool of `threads` workers (sequentially when
/// the `parallel` feature is off).
pub fn with_threads<T: Send>(threads: usize, op: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
            return pool.install(op);
        }
    }
    let _ = threads;
    op()
}
