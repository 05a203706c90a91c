use groupci_core::mcsim::{Executor, Sequential};
use rayon::prelude::*;

use crate::error::{CliError, Result};

/// Replications spread over a dedicated rayon pool.
///
/// Results come back indexed by replication, so the report does not depend
/// on the number of workers.
pub struct Parallel {
    pool: rayon::ThreadPool,
}

impl Parallel {
    pub fn new(workers: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::usage(format!("cannot start {workers} workers: {e}")))?;
        Ok(Parallel { pool })
    }
}

impl Executor for Parallel {
    fn run(&self, reps: u64, job: &(dyn Fn(u64) -> Vec<f64> + Sync)) -> Vec<Vec<f64>> {
        self.pool.install(|| (0..reps).into_par_iter().map(job).collect())
    }
}

/// `Sequential` for one worker, a rayon pool otherwise.
pub fn executor(workers: usize) -> Result<Box<dyn Executor>> {
    match workers {
        0 => Err(CliError::usage("--workers must be at least 1")),
        1 => Ok(Box::new(Sequential)),
        n => Ok(Box::new(Parallel::new(n)?)),
    }
}
