//! Execution-mode plumbing: the same drivers run data-parallel or strictly
//! sequential. With the `parallel` feature disabled every mode degrades to
//! the sequential path; with it enabled, `Sequential` still runs plain
//! iterators so both paths can be compared in one binary.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    /// Plain iterator evaluation on the calling thread.
    Sequential,
    /// Work-stealing evaluation; `jobs` limits the worker count, `None`
    /// defers to the global pool.
    Parallel { jobs: Option<usize> },
}

impl ExecMode {
    /// Builds a mode from a requested job count: 1 selects the sequential
    /// path, anything else a pool of that size.
    pub fn with_jobs(jobs: Option<usize>) -> Self {
        match jobs {
            Some(1) => ExecMode::Sequential,
            other => ExecMode::Parallel { jobs: other },
        }
    }

    /// Maps `f` over `items`, preserving order. The closure must be pure up
    /// to the returned value; results are identical across modes.
    pub fn map_vec<T, U, F>(self, items: Vec<T>, f: F) -> Vec<U>
    where
        T: Send,
        U: Send,
        F: Fn(T) -> U + Sync + Send,
    {
        match self {
            ExecMode::Sequential => items.into_iter().map(f).collect(),
            ExecMode::Parallel { jobs } => parallel_map(items, f, jobs),
        }
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, U, F>(items: Vec<T>, f: F, jobs: Option<usize>) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    match jobs {
        None => items.into_par_iter().map(f).collect(),
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .expect("worker pool construction");
            pool.install(|| items.into_par_iter().map(f).collect())
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, U, F>(items: Vec<T>, f: F, _jobs: Option<usize>) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_iter().map(f).collect()
}

/// Validates a job-count request from a command line or config surface.
pub fn validate_jobs(jobs: Option<usize>) -> Result<()> {
    if jobs == Some(0) {
        return Err(Error::SpecMismatch {
            reason: "job count 0 is not a schedule".into(),
        });
    }
    Ok(())
}
