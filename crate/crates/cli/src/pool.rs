use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

/// Runs `work` over `tasks` on at most `workers` threads.
///
/// `on_done` sees every result on the calling thread as soon as it arrives;
/// the returned vector is in task order whatever the completion order. A
/// panicking task becomes an `Err` with the panic message.
pub fn run_pool<T, R, W, D>(tasks: &[T], workers: usize, work: W, mut on_done: D) -> Vec<Result<R, String>>
where
    T: Sync,
    R: Send,
    W: Fn(&T) -> Result<R, String> + Sync,
    D: FnMut(usize, &Result<R, String>),
{
    let next = AtomicUsize::new(0);
    let mut results: Vec<Option<Result<R, String>>> = (0..tasks.len()).map(|_| None).collect();
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, tasks.len().max(1)) {
            let tx = tx.clone();
            let (next, work) = (&next, &work);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= tasks.len() {
                    break;
                }
                let r = catch_unwind(AssertUnwindSafe(|| work(&tasks[i]))).unwrap_or_else(|e| Err(panic_message(e)));
                if tx.send((i, r)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (i, r) in rx {
            on_done(i, &r);
            results[i] = Some(r);
        }
    });
    results.into_iter().map(|r| r.expect("every task reports")).collect()
}

fn panic_message(e: Box<dyn std::any::Any + Send>) -> String {
    let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
    format!("task panicked: {}", msg.unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_independent_of_workers() {
        let tasks: Vec<u64> = (0..40).collect();
        let work = |&t: &u64| -> Result<u64, String> {
            std::thread::sleep(std::time::Duration::from_micros((40 - t) * 50));
            Ok(t * t)
        };
        let one = run_pool(&tasks, 1, work, |_, _| {});
        let four = run_pool(&tasks, 4, work, |_, _| {});
        assert_eq!(one, four);
    }

    #[test]
    fn failures_stay_isolated() {
        let tasks = [1, 2, 3, 4];
        let mut seen = 0;
        let r = run_pool(
            &tasks,
            2,
            |&t| match t {
                2 => Err("diverged".to_string()),
                3 => panic!("boom"),
                _ => Ok(t),
            },
            |_, _| seen += 1,
        );
        assert_eq!(seen, 4);
        assert_eq!(r[0], Ok(1));
        assert_eq!(r[1], Err("diverged".into()));
        assert!(r[2].as_ref().unwrap_err().contains("boom"));
        assert_eq!(r[3], Ok(4));
    }

    #[test]
    fn empty_task_list() {
        let r: Vec<Result<(), String>> = run_pool(&[] as &[u8], 3, |_| Ok(()), |_, _| {});
        assert!(r.is_empty());
    }
}
