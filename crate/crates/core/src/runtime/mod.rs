//! Sharding, local and remote execution of shard tasks.

mod local;
mod plan;
mod remote;
mod task;
pub mod wire;
mod worker;

pub use local::run_local;
pub use plan::{make_shard_plan, ShardPlan};
pub use remote::{run_remote, FailurePolicy, RemoteOptions, RemoteOutcome};
pub use task::{
    combine_replies, execute_task, subsample_seed, DataSource, ShardData, TaskTemplate,
    WorkerReply, WorkerTask,
};
pub use worker::{serve_connection, Worker, WorkerHandle};
