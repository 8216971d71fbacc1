use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuildError, ThreadPoolBuilder};
use scalowork_core::exec::Executor;

/// Runs each round's tasks on a dedicated rayon pool of `workers` threads.
pub struct RayonExecutor {
    pool: ThreadPool,
    workers: usize,
}

impl RayonExecutor {
    pub fn new(workers: usize) -> Result<Self, ThreadPoolBuildError> {
        let workers = workers.max(1);
        let pool = ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("scalowork-worker-{i}"))
            .build()?;
        Ok(Self { pool, workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }
}

impl Executor for RayonExecutor {
    fn run<T, F>(&self, tasks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        self.pool.install(|| (0..tasks).into_par_iter().map(&f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use scalowork_core::exec::Sequential;
    use scalowork_core::graph::generate_ba;
    use scalowork_core::mds::{greedy_distributed, Partition};

    #[test]
    fn results_come_back_in_task_order() {
        let exec = RayonExecutor::new(4).unwrap();
        assert_eq!(exec.run(100, |i| i * i), (0..100).map(|i| i * i).collect::<Vec<_>>());
        assert_eq!(exec.workers(), 4);
        assert_eq!(RayonExecutor::new(0).unwrap().workers(), 1);
    }

    #[test]
    fn same_set_as_sequential() {
        let g = generate_ba(500, 4, 3).unwrap();
        let p = Partition::contiguous(g.n(), 4);
        let a = greedy_distributed(&g, &p, &Sequential).unwrap();
        let b = greedy_distributed(&g, &p, &RayonExecutor::new(4).unwrap()).unwrap();
        assert_eq!(a.set, b.set);
        assert_eq!(a.rounds, b.rounds);
    }
}
