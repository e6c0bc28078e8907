//! Worker pool used by the mining phase.
//!
//! With the `std` feature, work runs on a dedicated rayon pool. Inner loops
//! call [`split_map`], which fans out only when already running inside a pool
//! with more than one thread. Results are always collected in input order.

use alloc::vec::Vec;

#[cfg(feature = "std")]
use alloc::sync::Arc;

#[derive(Clone, Default)]
pub(crate) struct Executor {
    #[cfg(feature = "std")]
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl core::fmt::Debug for Executor {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Executor").field("workers", &self.workers()).finish()
    }
}

impl Executor {
    pub(crate) fn new(workers: usize) -> Self {
        #[cfg(feature = "std")]
        {
            let pool = (workers > 1).then(|| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .thread_name(|i| alloc::format!("txmotif-{i}"))
                    .build()
                    .map(Arc::new)
                    .ok()
            });
            Executor { pool: pool.flatten() }
        }
        #[cfg(not(feature = "std"))]
        {
            let _ = workers;
            Executor {}
        }
    }

    pub(crate) fn workers(&self) -> usize {
        #[cfg(feature = "std")]
        {
            self.pool.as_ref().map_or(1, |p| p.current_num_threads())
        }
        #[cfg(not(feature = "std"))]
        {
            1
        }
    }

    pub(crate) fn map_ordered<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "std")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| items.par_iter().with_min_len(1).map(&f).collect());
        }
        items.iter().map(f).collect()
    }
}

/// Ordered map that splits across the current pool when there is one.
pub(crate) fn split_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "std")]
    if items.len() > 1 && rayon::current_thread_index().is_some() && rayon::current_num_threads() > 1 {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}
