//! Bounded worker pool whose results reach a single consumer in input order.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

/// Runs `work` over `items` on up to `jobs` threads and hands each result
/// to `sink` on the calling thread, in item order. Stops feeding new items
/// after `sink` returns an error.
pub fn run_ordered<T, R, E, W, S>(jobs: usize, items: &[T], work: W, mut sink: S) -> Result<(), E>
where
    T: Sync,
    R: Send,
    W: Fn(&T) -> R + Sync,
    S: FnMut(&T, R) -> Result<(), E>,
{
    let jobs = jobs.clamp(1, items.len().max(1));
    let next = AtomicUsize::new(0);
    let stop = std::sync::atomic::AtomicBool::new(false);
    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<(usize, R)>();
        for _ in 0..jobs {
            let tx = tx.clone();
            let (next, stop, work) = (&next, &stop, &work);
            scope.spawn(move || loop {
                if stop.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                if tx.send((i, work(&items[i]))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        let mut emit = 0;
        for (i, r) in rx {
            pending.insert(i, r);
            while let Some(r) = pending.remove(&emit) {
                if let Err(e) = sink(&items[emit], r) {
                    stop.store(true, Ordering::Relaxed);
                    return Err(e);
                }
                emit += 1;
            }
        }
        Ok(())
    })
}
