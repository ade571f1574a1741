use std::sync::Arc;

use crate::aggregate::{self, CombineMethod, CombineResult, SubsampleSpec};
use crate::dataset::{Dataset, ParamVector};
use crate::error::{check_dim, Error, Result};
use crate::gen::{draw_truth, gen_range, GenSpec};
use crate::loss::{LossKind, LossModel};
use crate::rng::tagged_seed;
use crate::solver::{self, SolverConfig, SolverMethod};

use super::plan::ShardPlan;

/// Where a shard's samples come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ShardData {
    /// Samples `range_start..range_start + range_len` of a synthetic source,
    /// regenerated by whoever runs the task.
    Recipe {
        spec: GenSpec,
        range_start: u64,
        range_len: u64,
    },
    Inline(Dataset),
}

impl ShardData {
    pub fn materialize(&self) -> Result<Dataset> {
        match self {
            ShardData::Inline(d) => Ok(d.clone()),
            ShardData::Recipe {
                spec,
                range_start,
                range_len,
            } => {
                let truth = draw_truth(spec)?;
                gen_range(spec, &truth, *range_start, *range_len as usize)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkerTask {
    pub shard: ShardData,
    pub model: LossModel,
    pub solver: SolverConfig,
    /// Present for SAVGM runs.
    pub subsample: Option<SubsampleSpec>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkerReply {
    pub theta1: ParamVector,
    pub theta2: Option<ParamVector>,
    pub iterations: u32,
    pub final_grad_norm: f64,
}

/// Seed of the subsample drawn for the task seeded with `seed`.
pub fn subsample_seed(seed: u64) -> u64 {
    tagged_seed(seed, "subsample")
}

fn solve_level(task: &WorkerTask, data: &Dataset, min_norm: bool) -> Result<solver::LocalEstimate> {
    if task.solver.method == SolverMethod::ClosedFormLs && min_norm {
        if task.model.kind() != LossKind::LeastSquares {
            return Err(Error::invalid(
                "closed-form solve requires the least-squares loss",
            ));
        }
        return solver::solve_closed_form_ls_min_norm(data, 0.0);
    }
    solver::solve(&task.model, data, &task.solver, task.seed)
}

/// Runs one shard task: the local minimizer and, for SAVGM with `r > 0`,
/// the minimizer on the shard's subsample.
pub fn execute_task(task: &WorkerTask) -> Result<WorkerReply> {
    let data = task.shard.materialize()?;
    check_dim(task.model.dim(), data.dim())?;
    let est = solve_level(task, &data, false)?;
    let theta2 = match &task.subsample {
        Some(sub) if sub.ratio() > 0.0 => {
            let idx = aggregate::subsample_indices(data.len(), sub);
            if idx.len() == data.len() {
                Some(est.theta.clone())
            } else {
                // tiny subsamples can be rank deficient; take the minimum-norm minimizer
                Some(solve_level(task, &data.select(&idx), true)?.theta)
            }
        }
        _ => None,
    };
    Ok(WorkerReply {
        theta1: est.theta,
        theta2,
        iterations: est.iterations.min(u32::MAX as usize) as u32,
        final_grad_norm: est.final_grad_norm,
    })
}

/// Data source shared by all shards of a run.
#[derive(Debug, Clone)]
pub enum DataSource {
    /// Synthetic recipe; shard `i` is the contiguous stream range
    /// `plan.range(i)`. `cache` may hold the already generated samples
    /// `0..N` so local runs can slice instead of regenerating.
    Recipe {
        spec: GenSpec,
        cache: Option<Arc<Dataset>>,
    },
    /// A loaded dataset; shard `i` is `plan.indices(i)` and is shipped inline.
    Dataset(Arc<Dataset>),
}

/// Everything but the shard-specific parts of a task.
#[derive(Debug, Clone)]
pub struct TaskTemplate {
    pub source: DataSource,
    pub model: LossModel,
    pub solver: SolverConfig,
    /// SAVGM subsampling ratio; `None` for the other methods.
    pub subsample_ratio: Option<f64>,
}

impl TaskTemplate {
    /// Builds shard `i`'s task. With `use_cache`, a cached recipe shard is
    /// sliced into an inline dataset (local execution).
    pub fn task_for(&self, plan: &ShardPlan, i: usize, use_cache: bool) -> Result<WorkerTask> {
        let seed = plan.shard_seeds()[i];
        let shard = match &self.source {
            DataSource::Recipe { spec, cache } => {
                let range = plan.range(i);
                match cache {
                    Some(data) if use_cache => {
                        if data.len() < plan.n_total() {
                            return Err(Error::invalid("cached dataset shorter than the plan"));
                        }
                        ShardData::Inline(data.slice(range))
                    }
                    _ => ShardData::Recipe {
                        spec: spec.clone(),
                        range_start: range.start as u64,
                        range_len: range.len() as u64,
                    },
                }
            }
            DataSource::Dataset(data) => {
                if data.len() != plan.n_total() {
                    return Err(Error::invalid(format!(
                        "plan covers {} samples but the dataset has {}",
                        plan.n_total(),
                        data.len()
                    )));
                }
                ShardData::Inline(data.select(plan.indices(i)))
            }
        };
        let subsample = self
            .subsample_ratio
            .map(|r| SubsampleSpec::new(r, subsample_seed(seed)))
            .transpose()?;
        let mut solver = self.solver.clone();
        solver.resolve_stage1(plan.m(), plan.sizes()[0]);
        Ok(WorkerTask {
            shard,
            model: self.model,
            solver,
            subsample,
            seed,
        })
    }
}

/// Aggregates surviving shard replies for the given method.
pub fn combine_replies(
    method: CombineMethod,
    replies: &[WorkerReply],
    ratio: f64,
) -> Result<CombineResult> {
    let theta1: Vec<ParamVector> = replies.iter().map(|r| r.theta1.clone()).collect();
    match method {
        CombineMethod::Avgm => aggregate::avgm_combine(&theta1),
        CombineMethod::SgdAvgm => aggregate::sgd_avgm_combine(&theta1),
        CombineMethod::Savgm => {
            if ratio == 0.0 {
                return aggregate::savgm_from_shards(&theta1, &[], 0.0);
            }
            let theta2 = replies
                .iter()
                .map(|r| {
                    r.theta2
                        .clone()
                        .ok_or_else(|| Error::invalid("SAVGM reply without subsample estimate"))
                })
                .collect::<Result<Vec<_>>>()?;
            aggregate::savgm_from_shards(&theta1, &theta2, ratio)
        }
    }
}
