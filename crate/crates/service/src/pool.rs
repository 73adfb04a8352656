//! A fixed-size pool of conversion threads. Each thread retires after a
//! set number of jobs and is replaced by a fresh one.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc, Mutex};
use std::thread;

use thiserror::Error;
use tokio::sync::oneshot;

type Job = Box<dyn FnOnce() + Send + 'static>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PoolError {
    #[error("worker panicked")]
    Panicked,
    #[error("worker pool is shut down")]
    Closed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PoolStats {
    pub size: usize,
    /// Threads started over the pool's lifetime, replacements included.
    pub spawned: usize,
    pub completed: usize,
}

struct Shared {
    rx: Mutex<mpsc::Receiver<Job>>,
    recycle_after: usize,
    spawned: AtomicUsize,
    completed: AtomicUsize,
}

pub struct WorkerPool {
    tx: Mutex<Option<mpsc::Sender<Job>>>,
    shared: Arc<Shared>,
    size: usize,
}

impl WorkerPool {
    /// `recycle_after` of zero disables recycling.
    pub fn new(size: usize, recycle_after: usize) -> Self {
        let size = size.max(1);
        let (tx, rx) = mpsc::channel();
        let shared = Arc::new(Shared {
            rx: Mutex::new(rx),
            recycle_after: if recycle_after == 0 { usize::MAX } else { recycle_after },
            spawned: AtomicUsize::new(0),
            completed: AtomicUsize::new(0),
        });
        for _ in 0..size {
            spawn_worker(shared.clone());
        }
        WorkerPool { tx: Mutex::new(Some(tx)), shared, size }
    }

    fn submit(&self, job: Job) -> Result<(), PoolError> {
        let guard = self.tx.lock().unwrap_or_else(|e| e.into_inner());
        guard.as_ref().ok_or(PoolError::Closed)?.send(job).map_err(|_| PoolError::Closed)
    }

    /// Run `f` on a worker thread and wait for its value.
    pub async fn run<T, F>(&self, f: F) -> Result<T, PoolError>
    where
        T: Send + 'static,
        F: FnOnce() -> T + Send + 'static,
    {
        let (tx, rx) = oneshot::channel();
        self.submit(Box::new(move || {
            let _ = tx.send(catch_unwind(AssertUnwindSafe(f)));
        }))?;
        match rx.await {
            Ok(Ok(v)) => Ok(v),
            Ok(Err(_)) => Err(PoolError::Panicked),
            Err(_) => Err(PoolError::Closed),
        }
    }

    /// Blocking variant of [`WorkerPool::run`] for non-async callers.
    pub fn run_blocking<T, F>(&self, f: F) -> Result<T, PoolError>
    where
        T: Send + 'static,
        F: FnOnce() -> T + Send + 'static,
    {
        let (tx, rx) = mpsc::channel();
        self.submit(Box::new(move || {
            let _ = tx.send(catch_unwind(AssertUnwindSafe(f)));
        }))?;
        match rx.recv() {
            Ok(Ok(v)) => Ok(v),
            Ok(Err(_)) => Err(PoolError::Panicked),
            Err(_) => Err(PoolError::Closed),
        }
    }

    pub fn stats(&self) -> PoolStats {
        PoolStats {
            size: self.size,
            spawned: self.shared.spawned.load(Ordering::SeqCst),
            completed: self.shared.completed.load(Ordering::SeqCst),
        }
    }

    /// Stop accepting jobs; queued jobs still run.
    pub fn shutdown(&self) {
        self.tx.lock().unwrap_or_else(|e| e.into_inner()).take();
    }
}

impl Drop for WorkerPool {
    fn drop(&mut self) {
        self.shutdown();
    }
}

fn spawn_worker(shared: Arc<Shared>) {
    shared.spawned.fetch_add(1, Ordering::SeqCst);
    thread::Builder::new()
        .name("texmath-worker".into())
        .stack_size(32 << 20)
        .spawn(move || {
            let mut done = 0;
            while done < shared.recycle_after {
                let job = {
                    let rx = shared.rx.lock().unwrap_or_else(|e| e.into_inner());
                    rx.recv()
                };
                let Ok(job) = job else { return };
                job();
                done += 1;
                shared.completed.fetch_add(1, Ordering::SeqCst);
            }
            spawn_worker(shared);
        })
        .expect("spawn worker thread");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workers_recycle_after_quota() {
        let pool = WorkerPool::new(2, 3);
        for i in 0..12 {
            assert_eq!(pool.run_blocking(move || i * 2), Ok(i * 2));
        }
        // 12 jobs at 3 per thread retire 4 threads, each replaced.
        let want = PoolStats { size: 2, spawned: 6, completed: 12 };
        let deadline = std::time::Instant::now() + std::time::Duration::from_secs(5);
        while pool.stats() != want && std::time::Instant::now() < deadline {
            thread::sleep(std::time::Duration::from_millis(5));
        }
        assert_eq!(pool.stats(), want);
    }

    #[test]
    fn panics_are_contained() {
        let pool = WorkerPool::new(1, 0);
        assert_eq!(pool.run_blocking(|| -> u8 { panic!("boom") }), Err(PoolError::Panicked));
        assert_eq!(pool.run_blocking(|| 7), Ok(7));
    }

    #[test]
    fn shutdown_rejects_new_jobs() {
        let pool = WorkerPool::new(1, 0);
        pool.shutdown();
        assert_eq!(pool.run_blocking(|| 1), Err(PoolError::Closed));
    }
}
