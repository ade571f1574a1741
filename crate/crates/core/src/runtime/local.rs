use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use crate::error::{Error, Result};

use super::plan::ShardPlan;
use super::task::{execute_task, TaskTemplate, WorkerReply};

/// Runs every shard in-process on up to `parallelism` threads. Replies come
/// back in shard order and do not depend on the thread count.
pub fn run_local(
    plan: &ShardPlan,
    template: &TaskTemplate,
    parallelism: usize,
) -> Result<Vec<WorkerReply>> {
    if parallelism == 0 {
        return Err(Error::invalid("parallelism must be positive"));
    }
    let m = plan.m();
    let slots: Vec<Mutex<Option<Result<WorkerReply>>>> = (0..m).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let run_shard = |i: usize| {
        template
            .task_for(plan, i, true)
            .and_then(|t| execute_task(&t))
    };
    let threads = parallelism.min(m);
    if threads == 1 {
        for (i, slot) in slots.iter().enumerate() {
            *slot.lock().unwrap() = Some(run_shard(i));
        }
    } else {
        thread::scope(|scope| {
            for _ in 0..threads {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= m {
                        break;
                    }
                    let r = run_shard(i);
                    *slots[i].lock().unwrap() = Some(r);
                });
            }
        });
    }
    let mut replies = Vec::with_capacity(m);
    let mut failed = Vec::new();
    let mut first_error = None;
    for (i, slot) in slots.into_iter().enumerate() {
        match slot
            .into_inner()
            .unwrap()
            .expect("every shard slot is filled")
        {
            Ok(r) => replies.push(r),
            Err(e) => {
                failed.push(i);
                first_error.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_error {
        return Err(Error::ShardsFailed {
            shards: failed,
            detail: e.to_string(),
        });
    }
    Ok(replies)
}
