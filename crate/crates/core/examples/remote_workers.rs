//! Runs shards on TCP workers. Two workers are started in-process here; in a
//! real deployment each would be `avgm worker --listen host:port` on its own
//! machine. The remote result matches the in-process one bit for bit.

use std::sync::Arc;

use avgm::aggregate::CombineMethod;
use avgm::gen::{draw_truth, gen_dataset, FeatureStyle, GenModel, GenSpec};
use avgm::loss::LossModel;
use avgm::runtime::{
    combine_replies, make_shard_plan, run_local, run_remote, DataSource, RemoteOptions,
    TaskTemplate, Worker,
};
use avgm::solver::{SolverConfig, SolverMethod};

fn main() -> avgm::Result<()> {
    let workers = [
        Worker::bind("127.0.0.1:0")?.spawn()?,
        Worker::bind("127.0.0.1:0")?.spawn()?,
    ];
    let endpoints: Vec<String> = workers.iter().map(|w| w.addr().to_string()).collect();

    let spec = GenSpec::new(GenModel::Cubic, 10, FeatureStyle::Sparse5, 3)?;
    let truth = draw_truth(&spec)?;
    let n = 20_000;
    let template = TaskTemplate {
        // workers regenerate their shard from the recipe instead of receiving samples
        source: DataSource::Recipe {
            cache: Some(Arc::new(gen_dataset(&spec, &truth, n)?)),
            spec,
        },
        model: LossModel::least_squares(10),
        solver: SolverConfig::with_method(SolverMethod::ClosedFormLs),
        subsample_ratio: Some(0.05),
    };
    let plan = make_shard_plan(n, 8, 11)?;

    let remote = run_remote(&plan, &template, &endpoints, &RemoteOptions::default())?;
    let local = run_local(&plan, &template, 2)?;
    let a = combine_replies(CombineMethod::Savgm, &remote.surviving(), 0.05)?.theta_final;
    let b = combine_replies(CombineMethod::Savgm, &local, 0.05)?.theta_final;
    println!("workers: {}", endpoints.join(", "));
    println!("SAVGM estimate: {:?}", a.as_slice());
    println!("identical to in-process run: {}", a == b);
    Ok(())
}
