use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Instant;

use crate::aggregate::CombineMethod;
use crate::dataset::{Dataset, ParamVector};
use crate::error::{Error, Result};
use crate::gen::{
    draw_truth, gen_dataset, gen_range, resolve_theta_star_seeded, FeatureStyle, GenModel, GenSpec,
    TruthRecord, SPARSE_NNZ,
};
use crate::loss::LossModel;
use crate::rng::{derive_seed, tagged_seed};
use crate::runtime::{
    combine_replies, execute_task, make_shard_plan, run_local, run_remote, DataSource,
    RemoteOptions, ShardPlan, TaskTemplate, WorkerReply,
};
use crate::solver::{Radius, SgdConfig, SolverConfig, SolverMethod, StepSchedule};

use super::metrics;
use super::results::{ExperimentResult, Method, Metric, ResultRow};

/// Smallest logistic holdout.
pub const MIN_HOLDOUT: usize = 10_000;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: GenModel,
    /// Ignored for the Bernoulli source, which is one-dimensional.
    pub d: usize,
    pub feature_style: FeatureStyle,
    /// Ones per row for the click source.
    pub nnz_per_row: usize,
    pub n_total: usize,
    pub m_grid: Vec<usize>,
    pub r_grid: Vec<f64>,
    pub methods: Vec<Method>,
    pub repetitions: usize,
    /// Local solver settings for every method but SGD-AVGM. Its `method`
    /// is replaced by `solver_method`.
    pub solver: SolverConfig,
    /// `None` picks closed-form least squares for regression models and
    /// Newton otherwise.
    pub solver_method: Option<SolverMethod>,
    /// Step rule of the SGD-AVGM shards.
    pub sgd: SgdConfig,
    pub metrics: Vec<Metric>,
    /// Ridge penalty of the click model's logistic loss.
    pub lambda: f64,
    pub output: Option<PathBuf>,
    pub base_seed: u64,
    /// Keep one truth draw for all repetitions instead of redrawing.
    pub fixed_truth: bool,
    /// Oracle fits use `oracle_oversample · N` fresh samples.
    pub oracle_oversample: usize,
    pub parallelism: usize,
    /// Worker endpoints; empty runs in-process.
    pub remote: Vec<String>,
    pub remote_options: RemoteOptions,
    /// Fill the `wall_ms` column. Off by default so repeated runs produce
    /// identical files.
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn new(model: GenModel, d: usize, n_total: usize) -> Self {
        Self {
            model,
            d,
            feature_style: FeatureStyle::Sparse5,
            nnz_per_row: SPARSE_NNZ,
            n_total,
            m_grid: vec![2, 4, 8, 16, 32, 64, 128],
            r_grid: Vec::new(),
            methods: vec![Method::Avgm, Method::Oracle],
            repetitions: 20,
            solver: SolverConfig::default(),
            solver_method: None,
            sgd: SgdConfig {
                schedule: StepSchedule::DOver10DPlusT,
                radius: Radius::Auto,
                ..SgdConfig::default()
            },
            metrics: vec![Metric::Mse],
            lambda: 1e-3,
            output: None,
            base_seed: 0,
            fixed_truth: false,
            oracle_oversample: 10,
            parallelism: 1,
            remote: Vec::new(),
            remote_options: RemoteOptions::default(),
            record_timing: false,
        }
    }

    pub fn dim(&self) -> usize {
        if self.model == GenModel::BernoulliPathological {
            1
        } else {
            self.d
        }
    }

    pub fn gen_spec(&self, seed: u64) -> Result<GenSpec> {
        let spec = GenSpec {
            model: self.model,
            d: self.dim(),
            feature_style: self.feature_style,
            seed,
            nnz_per_row: self.nnz_per_row,
            zero_noise: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn loss_model(&self) -> Result<LossModel> {
        Ok(match self.model {
            GenModel::Normal | GenModel::Cubic | GenModel::Heteroskedastic => {
                LossModel::least_squares(self.dim())
            }
            GenModel::SparseClick => LossModel::ridge_logistic(self.dim(), self.lambda)?,
            GenModel::BernoulliPathological => LossModel::pathological(),
        })
    }

    pub fn local_solver(&self) -> SolverConfig {
        let method = self.solver_method.unwrap_or(match self.model {
            GenModel::Normal | GenModel::Cubic | GenModel::Heteroskedastic => {
                SolverMethod::ClosedFormLs
            }
            _ => SolverMethod::Newton,
        });
        SolverConfig {
            method,
            ..self.solver.clone()
        }
    }

    pub fn sgd_solver(&self) -> SolverConfig {
        SolverConfig {
            method: SolverMethod::Sgd,
            sgd: self.sgd.clone(),
            ..SolverConfig::default()
        }
    }

    pub fn holdout_size(&self) -> usize {
        MIN_HOLDOUT.max(self.n_total / 10)
    }

    pub fn validate(&self) -> Result<()> {
        self.gen_spec(0)?;
        self.loss_model()?;
        self.local_solver().validate()?;
        self.sgd_solver().validate()?;
        let fail = |msg: String| Err(Error::invalid(msg));
        if self.n_total == 0 {
            return fail("N must be positive".into());
        }
        if self.m_grid.is_empty() {
            return fail("m grid is empty".into());
        }
        if let Some(&m) = self.m_grid.iter().find(|&&m| m == 0 || m > self.n_total) {
            return fail(format!("m = {m} outside 1..={}", self.n_total));
        }
        if self.methods.is_empty() || self.metrics.is_empty() {
            return fail("need at least one method and one metric".into());
        }
        if self.repetitions == 0 || self.parallelism == 0 || self.oracle_oversample == 0 {
            return fail("repetitions, parallelism and oversample must be positive".into());
        }
        if self.methods.contains(&Method::Savgm) && self.r_grid.is_empty() {
            return fail("savgm needs a nonempty r grid".into());
        }
        if let Some(r) = self.r_grid.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return fail(format!("subsampling ratio {r} outside [0, 1)"));
        }
        if self.model != GenModel::SparseClick
            && self
                .metrics
                .iter()
                .any(|m| matches!(m, Metric::Logloss | Metric::Auc))
        {
            return fail("logloss and auc need the click model's ±1 labels".into());
        }
        if self.local_solver().theta_init.is_some() && !self.remote.is_empty() {
            return fail("a custom starting point cannot be used with remote workers".into());
        }
        Ok(())
    }
}

/// Everything a repetition's estimates are scored against.
struct RepContext {
    theta_star: ParamVector,
    oracle_mse: Option<f64>,
    holdout: Option<Dataset>,
}

impl RepContext {
    fn score(&self, metric: Metric, theta: &ParamVector) -> Result<f64> {
        match metric {
            Metric::Mse => metrics::mse(theta, &self.theta_star),
            Metric::MseGap => {
                let base = self
                    .oracle_mse
                    .ok_or_else(|| Error::invalid("mse_gap without an oracle"))?;
                Ok(metrics::mse(theta, &self.theta_star)? - base)
            }
            Metric::Logloss => metrics::logloss(
                theta,
                self.holdout.as_ref().expect("holdout drawn for logloss"),
            ),
            Metric::Auc => {
                let (s, y) = metrics::holdout_scores(
                    theta,
                    self.holdout.as_ref().expect("holdout drawn for auc"),
                )?;
                metrics::auc(&s, &y)
            }
        }
    }
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    model: LossModel,
    solver: SolverConfig,
    sgd_solver: SolverConfig,
    shard_parallelism: usize,
    fixed_truth: Option<TruthRecord>,
}

fn repetition_seed(base: u64, rep: usize) -> u64 {
    derive_seed(tagged_seed(base, "repetition"), rep as u64)
}

fn plan_seed(rep_seed: u64, m: usize) -> u64 {
    derive_seed(tagged_seed(rep_seed, "plan"), m as u64)
}

impl Runner<'_> {
    fn resolve(
        &self,
        spec: &GenSpec,
        truth: &mut TruthRecord,
        oracle_seed: u64,
    ) -> Result<ParamVector> {
        match &truth.theta_star {
            Some(t) => Ok(t.clone()),
            None => resolve_theta_star_seeded(
                spec,
                truth,
                self.cfg.n_total,
                self.cfg.oracle_oversample,
                oracle_seed,
            ),
        }
    }

    fn run_shards(&self, plan: &ShardPlan, template: &TaskTemplate) -> Result<Vec<WorkerReply>> {
        if self.cfg.remote.is_empty() {
            return run_local(plan, template, self.shard_parallelism);
        }
        let outcome = run_remote(plan, template, &self.cfg.remote, &self.cfg.remote_options)?;
        if !outcome.failed.is_empty() {
            eprintln!(
                "warning: m={} shards {:?} failed; averaging the {} survivors",
                plan.m(),
                outcome.failed,
                outcome.replies.len()
            );
        }
        Ok(outcome.surviving())
    }

    fn template(
        &self,
        source: &DataSource,
        solver: &SolverConfig,
        ratio: Option<f64>,
    ) -> TaskTemplate {
        TaskTemplate {
            source: source.clone(),
            model: self.model,
            solver: solver.clone(),
            subsample_ratio: ratio,
        }
    }

    fn repetition(&self, rep: usize) -> Result<Vec<ResultRow>> {
        let cfg = self.cfg;
        let rep_seed = repetition_seed(cfg.base_seed, rep);
        let spec = cfg.gen_spec(rep_seed)?;
        let (truth, source) = match &self.fixed_truth {
            Some(t) => {
                let data = gen_dataset(&spec, t, cfg.n_total)?;
                (t.clone(), DataSource::Dataset(Arc::new(data)))
            }
            None => {
                let mut t = draw_truth(&spec)?;
                self.resolve(&spec, &mut t, tagged_seed(rep_seed, "oracle"))?;
                let data = gen_dataset(&spec, &t, cfg.n_total)?;
                (
                    t,
                    DataSource::Recipe {
                        spec: spec.clone(),
                        cache: Some(Arc::new(data)),
                    },
                )
            }
        };
        let holdout = if cfg
            .metrics
            .iter()
            .any(|m| matches!(m, Metric::Logloss | Metric::Auc))
        {
            let hspec = cfg.gen_spec(tagged_seed(rep_seed, "holdout"))?;
            Some(gen_range(&hspec, &truth, 0, cfg.holdout_size())?)
        } else {
            None
        };
        let mut ctx = RepContext {
            theta_star: truth.theta_star()?.clone(),
            oracle_mse: None,
            holdout,
        };
        let mut rows = Vec::new();
        let mut emit = |ctx: &RepContext,
                        method: Method,
                        m: usize,
                        r: Option<f64>,
                        theta: &ParamVector,
                        ms: Option<f64>|
         -> Result<()> {
            for &metric in &cfg.metrics {
                let value = ctx
                    .score(metric, theta)
                    .map_err(|e| e.context(format!("{method} m={m} repetition {rep}")))?;
                rows.push(ResultRow {
                    method,
                    m,
                    r,
                    repetition: Some(rep),
                    metric,
                    value,
                    stderr: None,
                    wall_ms: ms,
                });
            }
            Ok(())
        };
        let timer = || cfg.record_timing.then(Instant::now);
        let elapsed = |t: Option<Instant>| t.map(|t| t.elapsed().as_secs_f64() * 1e3);

        let base = self.template(&source, &self.solver, None);
        if cfg.methods.contains(&Method::Oracle) || cfg.metrics.contains(&Metric::MseGap) {
            let t0 = timer();
            let plan = make_shard_plan(cfg.n_total, 1, plan_seed(rep_seed, 1))?;
            let theta = execute_task(&base.task_for(&plan, 0, true)?)
                .map_err(|e| e.context(format!("oracle repetition {rep}")))?
                .theta1;
            let ms = elapsed(t0);
            ctx.oracle_mse = Some(metrics::mse(&theta, &ctx.theta_star)?);
            if cfg.methods.contains(&Method::Oracle) {
                emit(&ctx, Method::Oracle, 1, None, &theta, ms)?;
            }
        }

        for &m in &cfg.m_grid {
            let plan = make_shard_plan(cfg.n_total, m, plan_seed(rep_seed, m))?;
            let with_ctx =
                |method: Method, e: Error| e.context(format!("{method} m={m} repetition {rep}"));
            for &method in &cfg.methods {
                match method {
                    Method::Oracle => {}
                    Method::Avgm | Method::SgdAvgm => {
                        let t0 = timer();
                        let (tpl, how) = if method == Method::Avgm {
                            (base.clone(), CombineMethod::Avgm)
                        } else {
                            (
                                self.template(&source, &self.sgd_solver, None),
                                CombineMethod::SgdAvgm,
                            )
                        };
                        let theta = self
                            .run_shards(&plan, &tpl)
                            .and_then(|replies| combine_replies(how, &replies, 0.0))
                            .map_err(|e| with_ctx(method, e))?
                            .theta_final;
                        emit(&ctx, method, m, None, &theta, elapsed(t0))?;
                    }
                    Method::Savgm => {
                        for &r in &cfg.r_grid {
                            let t0 = timer();
                            let tpl = self.template(&source, &self.solver, Some(r));
                            let theta = self
                                .run_shards(&plan, &tpl)
                                .and_then(|replies| {
                                    combine_replies(CombineMethod::Savgm, &replies, r)
                                })
                                .map_err(|e| with_ctx(method, e))?
                                .theta_final;
                            emit(&ctx, method, m, Some(r), &theta, elapsed(t0))?;
                        }
                    }
                    Method::Single => {
                        let t0 = timer();
                        let theta = base
                            .task_for(&plan, 0, true)
                            .and_then(|t| execute_task(&t))
                            .map_err(|e| with_ctx(method, e))?
                            .theta1;
                        emit(&ctx, method, m, None, &theta, elapsed(t0))?;
                    }
                }
            }
        }
        Ok(rows)
    }
}

/// Runs the sweep and, when `cfg.output` is set, writes the CSV.
///
/// Per repetition: draw the truth (unless fixed), generate `N` samples,
/// resolve `θ*`, then score every method at every `m` (and `r` for SAVGM).
/// The oracle solves on all `N` samples once per repetition and is
/// reported with `m = 1`; `single` solves on shard 0 of the `m`-way plan.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let fixed_truth = if cfg.fixed_truth {
        let spec = cfg.gen_spec(tagged_seed(cfg.base_seed, "fixed-truth"))?;
        let mut t = draw_truth(&spec)?;
        if t.theta_star.is_none() {
            resolve_theta_star_seeded(
                &spec,
                &mut t,
                cfg.n_total,
                cfg.oracle_oversample,
                tagged_seed(spec.seed, "oracle"),
            )?;
        }
        Some(t)
    } else {
        None
    };
    let outer = if cfg.remote.is_empty() {
        cfg.parallelism.min(cfg.repetitions)
    } else {
        1
    };
    let runner = Runner {
        cfg,
        model: cfg.loss_model()?,
        solver: cfg.local_solver(),
        sgd_solver: cfg.sgd_solver(),
        shard_parallelism: (cfg.parallelism / outer).max(1),
        fixed_truth,
    };
    let slots: Vec<Mutex<Option<Result<Vec<ResultRow>>>>> =
        (0..cfg.repetitions).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    thread::scope(|scope| {
        for _ in 0..outer {
            scope.spawn(|| loop {
                let rep = next.fetch_add(1, Ordering::Relaxed);
                if rep >= cfg.repetitions {
                    break;
                }
                let out = runner.repetition(rep);
                let failed = out.is_err();
                *slots[rep].lock().unwrap() = Some(out);
                if failed {
                    next.store(cfg.repetitions, Ordering::Relaxed);
                }
            });
        }
    });
    let mut result = ExperimentResult::default();
    for slot in slots {
        match slot.into_inner().unwrap() {
            Some(rows) => result.rows.extend(rows?),
            None => continue,
        }
    }
    result.push_aggregates();
    if let Some(path) = &cfg.output {
        result.write_csv_path(path)?;
    }
    Ok(result)
}
