//! Barrier-style task execution used by the round-synchronized solver.

use alloc::vec::Vec;

/// Runs `tasks` independent closures and returns their results in task order.
///
/// Implementations may run tasks concurrently; callers only rely on the
/// returned order, never on execution order.
pub trait Executor {
    fn run<T, F>(&self, tasks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;
}

/// Runs every task on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn run<T, F>(&self, tasks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..tasks).map(f).collect()
    }
}

impl<E: Executor + ?Sized> Executor for &E {
    fn run<T, F>(&self, tasks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (**self).run(tasks, f)
    }
}
