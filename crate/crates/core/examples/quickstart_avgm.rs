//! Split a synthetic regression problem over 16 machines, solve each shard
//! locally and average the results.

use std::sync::Arc;

use avgm::aggregate::CombineMethod;
use avgm::gen::{draw_truth, gen_dataset, FeatureStyle, GenModel, GenSpec};
use avgm::harness::mse;
use avgm::loss::LossModel;
use avgm::runtime::{combine_replies, make_shard_plan, run_local, DataSource, TaskTemplate};
use avgm::solver::{self, SolverConfig, SolverMethod};

fn main() -> avgm::Result<()> {
    let spec = GenSpec::new(GenModel::Normal, 20, FeatureStyle::Sparse5, 1)?;
    let truth = draw_truth(&spec)?;
    let theta_star = truth.theta_star()?.clone();
    let data = gen_dataset(&spec, &truth, 50_000)?;

    let model = LossModel::least_squares(20);
    let cfg = SolverConfig::with_method(SolverMethod::ClosedFormLs);
    let central = solver::solve(&model, &data, &cfg, 0)?.theta;

    let plan = make_shard_plan(data.len(), 16, 7)?;
    let template = TaskTemplate {
        source: DataSource::Dataset(Arc::new(data)),
        model,
        solver: cfg,
        subsample_ratio: None,
    };
    let replies = run_local(&plan, &template, 4)?;
    let averaged = combine_replies(CombineMethod::Avgm, &replies, 0.0)?.theta_final;
    let one_shard = &replies[0].theta1;

    println!("centralized   MSE {:.3e}", mse(&central, &theta_star)?);
    println!("AVGM (m = 16) MSE {:.3e}", mse(&averaged, &theta_star)?);
    println!("single shard  MSE {:.3e}", mse(one_shard, &theta_star)?);
    Ok(())
}
