//! Work-stealing pool for independent jobs.
//!
//! Jobs start in a global injector. Each worker drains its own FIFO deque,
//! refills it from the injector in batches, and otherwise steals from peers,
//! starting at a random victim. Results are collected per worker and merged
//! by job index after the pool joins.

use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;

use crossbeam_deque::{Injector, Steal, Stealer, Worker};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PoolOptions {
    pub workers: usize,
    pub pin: bool,
    /// CPU ids to pin workers to, cycled. Defaults to consecutive cores.
    pub pin_map: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PoolStats {
    pub jobs_per_worker: Vec<u64>,
    pub steals: u64,
    /// Times a worker found nothing to run although the injector or a peer
    /// deque still held work. Non-zero only through steal races.
    pub idle_while_work: u64,
    pub pinned: Vec<bool>,
}

fn work_visible<T>(injector: &Injector<T>, stealers: &[Stealer<T>]) -> bool {
    !injector.is_empty() || stealers.iter().any(|s| !s.is_empty())
}

enum Found {
    Job(usize, bool),
    Retry,
    Empty,
}

fn find_job(
    me: usize,
    local: &Worker<usize>,
    injector: &Injector<usize>,
    stealers: &[Stealer<usize>],
    rng: &mut ChaCha8Rng,
) -> Found {
    if let Some(j) = local.pop() {
        return Found::Job(j, false);
    }
    let mut retry = false;
    match injector.steal_batch_and_pop(local) {
        Steal::Success(j) => return Found::Job(j, false),
        Steal::Retry => retry = true,
        Steal::Empty => {}
    }
    let n = stealers.len();
    if n > 1 {
        let start = rng.random_range(0..n);
        for k in 0..n {
            let v = (start + k) % n;
            if v == me {
                continue;
            }
            match stealers[v].steal() {
                Steal::Success(j) => return Found::Job(j, true),
                Steal::Retry => retry = true,
                Steal::Empty => {}
            }
        }
    }
    if retry { Found::Retry } else { Found::Empty }
}

fn pin_current(worker: usize, opts: &PoolOptions) -> bool {
    let target = match &opts.pin_map {
        Some(map) if !map.is_empty() => map[worker % map.len()],
        _ => worker,
    };
    let Some(cores) = core_affinity::get_core_ids() else {
        log::warn!("worker {worker}: cannot query CPU ids, running unpinned");
        return false;
    };
    let Some(core) = cores.iter().find(|c| c.id == target).or_else(|| {
        if opts.pin_map.is_none() && !cores.is_empty() {
            Some(&cores[worker % cores.len()])
        } else {
            None
        }
    }) else {
        log::warn!("worker {worker}: CPU {target} not available, running unpinned");
        return false;
    };
    if core_affinity::set_for_current(*core) {
        true
    } else {
        log::warn!("worker {worker}: pinning to CPU {} failed, running unpinned", core.id);
        false
    }
}

/// Run `job(i)` for every `i < n_jobs` and return the results in index order.
pub fn run_jobs<R, F>(n_jobs: usize, opts: &PoolOptions, job: F) -> (Vec<R>, PoolStats)
where
    R: Send,
    F: Fn(usize) -> R + Sync,
{
    let workers = opts.workers.max(1);
    let injector = Injector::new();
    for i in 0..n_jobs {
        injector.push(i);
    }
    let locals: Vec<Worker<usize>> = (0..workers).map(|_| Worker::new_fifo()).collect();
    let stealers: Vec<Stealer<usize>> = locals.iter().map(Worker::stealer).collect();
    let steals = AtomicU64::new(0);
    let idle = AtomicU64::new(0);

    let per_worker: Vec<(Vec<(usize, R)>, bool)> = thread::scope(|s| {
        let handles: Vec<_> = locals
            .into_iter()
            .enumerate()
            .map(|(w, local)| {
                let (injector, stealers, steals, idle, job) = (&injector, &stealers, &steals, &idle, &job);
                s.spawn(move || {
                    let pinned = opts.pin && pin_current(w, opts);
                    let mut rng = ChaCha8Rng::seed_from_u64(w as u64);
                    let mut out = Vec::new();
                    loop {
                        match find_job(w, &local, injector, stealers, &mut rng) {
                            Found::Job(j, stolen) => {
                                if stolen {
                                    steals.fetch_add(1, Ordering::Relaxed);
                                }
                                out.push((j, job(j)));
                            }
                            Found::Retry => thread::yield_now(),
                            Found::Empty => {
                                if !work_visible(injector, stealers) {
                                    break;
                                }
                                idle.fetch_add(1, Ordering::Relaxed);
                                thread::yield_now();
                            }
                        }
                    }
                    (out, pinned)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("pool worker panicked")).collect()
    });

    let stats = PoolStats {
        jobs_per_worker: per_worker.iter().map(|(o, _)| o.len() as u64).collect(),
        steals: steals.into_inner(),
        idle_while_work: idle.into_inner(),
        pinned: per_worker.iter().map(|(_, p)| *p).collect(),
    };
    let mut slots: Vec<Option<R>> = (0..n_jobs).map(|_| None).collect();
    for (out, _) in per_worker {
        for (j, r) in out {
            slots[j] = Some(r);
        }
    }
    (slots.into_iter().map(|r| r.expect("every job runs exactly once")).collect(), stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    #[test]
    fn runs_every_job_once_in_order() {
        for workers in [1, 2, 5] {
            let opts = PoolOptions { workers, ..Default::default() };
            let (out, stats) = run_jobs(100, &opts, |i| i * i);
            assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
            assert_eq!(stats.jobs_per_worker.iter().sum::<u64>(), 100);
            assert_eq!(stats.jobs_per_worker.len(), workers);
        }
    }

    #[test]
    fn empty_job_set() {
        let (out, _) = run_jobs(0, &PoolOptions { workers: 3, ..Default::default() }, |i| i);
        assert!(out.is_empty());
    }

    #[test]
    fn unequal_jobs_keep_workers_busy() {
        let opts = PoolOptions { workers: 4, ..Default::default() };
        let (_, stats) = run_jobs(64, &opts, |i| {
            thread::sleep(Duration::from_micros(if i % 7 == 0 { 3000 } else { 200 }));
        });
        // steal races are the only source; bounded well below the job count
        assert!(stats.idle_while_work <= 64, "{stats:?}");
    }

    #[test]
    fn pinning_failure_is_not_fatal() {
        let opts = PoolOptions { workers: 2, pin: true, pin_map: Some(vec![100_000]) };
        let (out, stats) = run_jobs(4, &opts, |i| i);
        assert_eq!(out, vec![0, 1, 2, 3]);
        assert_eq!(stats.pinned, vec![false, false]);
    }
}
