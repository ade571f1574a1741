//! Local empirical-risk minimizers.
//!
//! - closed-form least squares through the normal equations
//! - damped Newton with Armijo backtracking
//! - one pass of projected SGD
//! - two-stage: a short SGD warm start followed by gradient descent

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;

use crate::dataset::{dot, norm2, Dataset, ParamVector, Sample};
use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::loss::{sigmoid_neg, LossKind, LossModel};
use crate::rng::{rng_from_seed, tagged_seed};

/// Armijo sufficient-decrease constant.
pub const ARMIJO_ALPHA: f64 = 0.3;
/// Backtracking shrink factor.
pub const ARMIJO_BETA: f64 = 0.5;
/// Largest dimension solved with a dense Cholesky factorization; conjugate
/// gradient above.
pub const DENSE_SOLVE_LIMIT: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverMethod {
    ClosedFormLs,
    Newton,
    Sgd,
    TwoStage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepSchedule {
    /// `η_t = c / (λ t)`
    COverLambdaT,
    /// `η_t = d / (10 (d + t))`
    DOver10DPlusT,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radius {
    Unconstrained,
    Ball(f64),
    /// `10 · ‖θ_init‖ + 100`
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgdConfig {
    pub c: f64,
    pub lambda: f64,
    pub radius: Radius,
    pub schedule: StepSchedule,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            lambda: 1.0,
            radius: Radius::Auto,
            schedule: StepSchedule::COverLambdaT,
        }
    }
}

impl SgdConfig {
    pub fn step(&self, t: usize, d: usize) -> f64 {
        match self.schedule {
            StepSchedule::COverLambdaT => self.c / (self.lambda * t as f64),
            StepSchedule::DOver10DPlusT => d as f64 / (10.0 * (d + t) as f64),
        }
    }

    /// Projection radius for a run starting at `theta_init`; `None` means
    /// unconstrained.
    pub fn resolved_radius(&self, theta_init: &[f64]) -> Option<f64> {
        match self.radius {
            Radius::Unconstrained => None,
            Radius::Ball(r) => Some(r),
            Radius::Auto => Some(10.0 * norm2(theta_init) + 100.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: SolverMethod,
    pub grad_tol: f64,
    pub max_iter: usize,
    pub sgd: SgdConfig,
    /// SGD warm-start iterations for the two-stage method. `None` resolves
    /// to `⌈ln²(m·n)⌉` once the number of shards `m` is known (see
    /// [`SolverConfig::resolve_stage1`]); called directly it uses `m = 1`.
    pub stage1_iters: Option<usize>,
    /// Starting point; zero when `None`.
    pub theta_init: Option<Vec<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: SolverMethod::Newton,
            grad_tol: 1e-10,
            max_iter: 200,
            sgd: SgdConfig::default(),
            stage1_iters: None,
            theta_init: None,
        }
    }
}

impl SolverConfig {
    pub fn with_method(method: SolverMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::invalid(format!(
                "grad_tol must be > 0, got {}",
                self.grad_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be positive"));
        }
        if matches!(self.method, SolverMethod::Sgd | SolverMethod::TwoStage)
            && self.sgd.schedule == StepSchedule::COverLambdaT
        {
            if !(self.sgd.c >= 1.0) {
                return Err(Error::invalid(format!(
                    "SGD constant c must be >= 1, got {}",
                    self.sgd.c
                )));
            }
            if !(self.sgd.lambda > 0.0) {
                return Err(Error::invalid(format!(
                    "SGD lambda must be > 0, got {}",
                    self.sgd.lambda
                )));
            }
        }
        if let Radius::Ball(r) = self.sgd.radius {
            if !(r > 0.0) {
                return Err(Error::invalid(format!(
                    "projection radius must be > 0, got {r}"
                )));
            }
        }
        Ok(())
    }

    /// Default warm-start length `⌈ln²(total)⌉` for `total = m·n` samples.
    pub fn default_stage1(total: usize) -> usize {
        let l = (total.max(1) as f64).ln();
        (l * l).ceil() as usize
    }

    /// Fixes `stage1_iters` for a run over `m` shards of about `n` samples.
    pub fn resolve_stage1(&mut self, m: usize, n: usize) {
        if self.stage1_iters.is_none() {
            self.stage1_iters = Some(Self::default_stage1(m * n));
        }
    }

    fn init(&self, d: usize) -> Result<Vec<f64>> {
        match &self.theta_init {
            Some(t) => {
                check_dim(d, t.len())?;
                Ok(t.clone())
            }
            None => Ok(vec![0.0; d]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterReached,
    /// Line search could not make progress before reaching `grad_tol`.
    Stalled,
    /// Fixed-length runs (SGD, closed form).
    Completed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalEstimate {
    pub theta: ParamVector,
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub wall_time: Duration,
    pub status: SolveStatus,
    /// Newton iterations that fell back to a gradient step.
    pub fallback_steps: usize,
}

/// Streaming accumulator for the least-squares normal equations
/// `((1/n) XᵀX + λI) θ = (1/n) Xᵀy`.
#[derive(Debug, Clone)]
pub struct NormalEquations {
    d: usize,
    gram: Vec<f64>,
    rhs: Vec<f64>,
    count: usize,
}

impl NormalEquations {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            gram: vec![0.0; d * d],
            rhs: vec![0.0; d],
            count: 0,
        }
    }

    pub fn add(&mut self, s: &Sample) {
        let d = self.d;
        let gram = &mut self.gram;
        s.features.for_each_nonzero(|i, xi| {
            s.features.for_each_nonzero(|j, xj| {
                if j >= i {
                    gram[i * d + j] += xi * xj;
                }
            });
        });
        s.features.axpy(s.target, &mut self.rhs);
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    fn system(&self, lambda: f64) -> (DMatrix<f64>, Vec<f64>) {
        let d = self.d;
        let inv_n = 1.0 / self.count as f64;
        let a = DMatrix::from_fn(d, d, |i, j| {
            let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
            self.gram[lo * d + hi] * inv_n + if i == j { lambda } else { 0.0 }
        });
        let b = self.rhs.iter().map(|v| v * inv_n).collect();
        (a, b)
    }

    /// Solves the system; a singular system is an error naming its rank.
    pub fn solve(&self, lambda: f64) -> Result<ParamVector> {
        if self.count == 0 {
            return Err(Error::invalid("least squares on an empty dataset"));
        }
        let (a, b) = self.system(lambda);
        if let Some(x) = linalg::cholesky_solve_strict(&a, &b) {
            return ParamVector::new(x);
        }
        let rank = linalg::symmetric_rank(&a);
        if rank < self.d {
            return Err(Error::Singular { rank, dim: self.d });
        }
        linalg::cholesky_solve(&a, &b)
            .ok_or(Error::Singular { rank, dim: self.d })
            .and_then(ParamVector::new)
    }

    /// Minimum-norm solution, defined for singular systems too.
    pub fn solve_min_norm(&self, lambda: f64) -> Result<ParamVector> {
        match self.solve(lambda) {
            Err(Error::Singular { .. }) => {
                let (a, b) = self.system(lambda);
                ParamVector::new(linalg::min_norm_solve(&a, &b))
            }
            other => other,
        }
    }
}

fn ls_grad_norm(data: &Dataset, theta: &[f64], lambda: f64) -> f64 {
    let model = LossModel::least_squares(data.dim());
    let mut g = model.risk_gradient_raw(theta, data);
    for (gi, t) in g.iter_mut().zip(theta) {
        *gi += lambda * t;
    }
    norm2(&g)
}

/// Ridge least squares in closed form. `λ = 0` requires a nonsingular Gram
/// matrix.
pub fn solve_closed_form_ls(data: &Dataset, lambda: f64) -> Result<LocalEstimate> {
    closed_form(data, lambda, false)
}

/// As [`solve_closed_form_ls`], but a singular system yields the
/// minimum-norm minimizer instead of an error.
pub fn solve_closed_form_ls_min_norm(data: &Dataset, lambda: f64) -> Result<LocalEstimate> {
    closed_form(data, lambda, true)
}

fn closed_form(data: &Dataset, lambda: f64, min_norm: bool) -> Result<LocalEstimate> {
    if !(lambda >= 0.0) {
        return Err(Error::invalid(format!("lambda must be >= 0, got {lambda}")));
    }
    if data.dim() > crate::dataset::DENSIFY_LIMIT {
        return Err(Error::invalid(format!(
            "closed-form least squares is limited to d <= {}, got {}",
            crate::dataset::DENSIFY_LIMIT,
            data.dim()
        )));
    }
    let start = Instant::now();
    let mut acc = NormalEquations::new(data.dim());
    for s in data {
        acc.add(s);
    }
    let theta = if min_norm {
        acc.solve_min_norm(lambda)?
    } else {
        acc.solve(lambda)?
    };
    Ok(LocalEstimate {
        final_grad_norm: ls_grad_norm(data, &theta, lambda),
        theta,
        iterations: 1,
        wall_time: start.elapsed(),
        status: SolveStatus::Completed,
        fallback_steps: 0,
    })
}

fn check_inputs(model: &LossModel, data: &Dataset, cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("cannot solve on an empty dataset"));
    }
    model.check_dataset(data)
}

fn risk_checked(model: &LossModel, theta: &[f64], data: &Dataset, iteration: usize) -> Result<f64> {
    let f = model.risk_raw(theta, data);
    if !f.is_finite() {
        return Err(Error::Divergence {
            iteration,
            detail: format!("objective is {f}"),
        });
    }
    Ok(f)
}

struct Accepted {
    theta: Vec<f64>,
    f: f64,
    step: f64,
}

/// Backtracking along `dir` from `theta`. Once the predicted decrease falls
/// below floating-point resolution of `f0`, a step is accepted if it reduces
/// the gradient norm and, unless `monotone`, raises the objective by no more
/// than rounding.
#[allow(clippy::too_many_arguments)]
fn backtrack(
    model: &LossModel,
    data: &Dataset,
    theta: &[f64],
    f0: f64,
    gnorm0: f64,
    dir: &[f64],
    slope: f64,
    initial_step: f64,
    monotone: bool,
) -> Option<Accepted> {
    let mut step = initial_step;
    let noise = 64.0 * f64::EPSILON * f0.abs().max(f64::MIN_POSITIVE);
    let slack = if monotone { 0.0 } else { noise };
    for _ in 0..60 {
        let cand: Vec<f64> = theta.iter().zip(dir).map(|(t, p)| t + step * p).collect();
        let f = model.risk_raw(&cand, data);
        if f.is_finite() {
            if f <= f0 + ARMIJO_ALPHA * step * slope {
                return Some(Accepted {
                    theta: cand,
                    f,
                    step,
                });
            }
            if (ARMIJO_ALPHA * step * slope).abs() <= noise && f <= f0 + slack {
                let g = model.risk_gradient_raw(&cand, data);
                if norm2(&g) < gnorm0 {
                    return Some(Accepted {
                        theta: cand,
                        f,
                        step,
                    });
                }
            }
        }
        step *= ARMIJO_BETA;
    }
    None
}

fn newton_direction(
    model: &LossModel,
    data: &Dataset,
    theta: &[f64],
    g: &[f64],
) -> Option<Vec<f64>> {
    let d = theta.len();
    let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
    if d <= DENSE_SOLVE_LIMIT {
        let h = model.risk_hessian_raw(theta, data);
        linalg::cholesky_solve(&h, &neg_g)
    } else {
        let cg = linalg::conjugate_gradient(
            |v| model.risk_hessian_vec_raw(theta, data, v),
            &neg_g,
            1e-12,
            10 * d,
        );
        // an unconverged CG iterate is still a descent direction when positive curvature held
        (cg.iterations > 0 && cg.x.iter().all(|v| v.is_finite())).then_some(cg.x)
    }
}

/// Damped Newton with Armijo backtracking (α = 0.3, β = 0.5). Falls back to
/// a gradient step when the Newton system cannot be solved or does not give
/// a descent direction.
pub fn solve_newton(
    model: &LossModel,
    data: &Dataset,
    cfg: &SolverConfig,
) -> Result<LocalEstimate> {
    check_inputs(model, data, cfg)?;
    let start = Instant::now();
    let mut theta = cfg.init(model.dim())?;
    let mut f = risk_checked(model, &theta, data, 0)?;
    let mut fallback_steps = 0;
    let mut status = SolveStatus::MaxIterReached;
    let mut iterations = 0;
    let mut g = model.risk_gradient_raw(&theta, data);
    let mut gnorm = norm2(&g);
    while iterations < cfg.max_iter {
        if gnorm <= cfg.grad_tol {
            status = SolveStatus::Converged;
            break;
        }
        let mut dir = newton_direction(model, data, &theta, &g);
        let mut slope = dir.as_ref().map_or(f64::NAN, |p| dot(p, &g));
        if !(slope < 0.0) {
            fallback_steps += 1;
            dir = Some(g.iter().map(|v| -v).collect());
            slope = -gnorm * gnorm;
        }
        let dir = dir.unwrap();
        iterations += 1;
        match backtrack(model, data, &theta, f, gnorm, &dir, slope, 1.0, false) {
            Some(acc) => {
                theta = acc.theta;
                f = acc.f;
            }
            None => {
                status = SolveStatus::Stalled;
                break;
            }
        }
        risk_checked(model, &theta, data, iterations)?;
        g = model.risk_gradient_raw(&theta, data);
        gnorm = norm2(&g);
    }
    if status == SolveStatus::MaxIterReached && gnorm <= cfg.grad_tol {
        status = SolveStatus::Converged;
    }
    Ok(LocalEstimate {
        theta: ParamVector::new(theta)?,
        iterations,
        final_grad_norm: gnorm,
        wall_time: start.elapsed(),
        status,
        fallback_steps,
    })
}

/// In-place `θ ← θ − η ∇f(θ; s)` using the structure of each loss.
#[inline]
fn sgd_update(model: &LossModel, theta: &mut [f64], s: &Sample, eta: f64) {
    match model.kind() {
        LossKind::LeastSquares => {
            let r = s.features.dot(theta) - s.target;
            s.features.axpy(-eta * r, theta);
        }
        LossKind::RidgeLogistic { lambda } => {
            let z = s.target * s.features.dot(theta);
            let coeff = -s.target * sigmoid_neg(z);
            if lambda != 0.0 {
                let shrink = 1.0 - eta * lambda;
                theta.iter_mut().for_each(|t| *t *= shrink);
            }
            s.features.axpy(-eta * coeff, theta);
        }
        LossKind::Pathological => {
            let mut g = [0.0];
            model.add_gradient_raw(theta, s, 1.0, &mut g);
            theta[0] -= eta * g[0];
        }
    }
}

fn project(theta: &mut [f64], radius: Option<f64>) {
    if let Some(r) = radius {
        let n = norm2(theta);
        if n > r {
            theta.iter_mut().for_each(|t| *t = *t * r / n);
        }
    }
}

/// Euclidean projection onto the ball of the given radius (`None` is the
/// identity).
pub fn project_onto_ball(theta: &[f64], radius: Option<f64>) -> Vec<f64> {
    let mut out = theta.to_vec();
    project(&mut out, radius);
    out
}

/// Runs `iterations` projected SGD steps from `theta`, visiting samples in
/// the seeded permutation order (cycling if `iterations > n`).
fn sgd_pass(
    model: &LossModel,
    data: &Dataset,
    sgd: &SgdConfig,
    theta: &mut [f64],
    iterations: usize,
    seed: u64,
) -> Result<()> {
    let radius = sgd.resolved_radius(theta);
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rng_from_seed(tagged_seed(seed, "sgd-order")));
    let d = model.dim();
    let samples = data.samples();
    for t in 1..=iterations {
        let s = &samples[order[(t - 1) % order.len()]];
        sgd_update(model, theta, s, sgd.step(t, d));
        project(theta, radius);
        if !theta.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence {
                iteration: t,
                detail: "non-finite SGD iterate".into(),
            });
        }
    }
    Ok(())
}

/// One pass of projected SGD: exactly `n` iterations over a seeded
/// permutation of the shard.
pub fn solve_sgd(
    model: &LossModel,
    data: &Dataset,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<LocalEstimate> {
    check_inputs(model, data, cfg)?;
    let start = Instant::now();
    let mut theta = cfg.init(model.dim())?;
    sgd_pass(model, data, &cfg.sgd, &mut theta, data.len(), seed)?;
    let gnorm = norm2(&model.risk_gradient_raw(&theta, data));
    Ok(LocalEstimate {
        theta: ParamVector::new(theta)?,
        iterations: data.len(),
        final_grad_norm: gnorm,
        wall_time: start.elapsed(),
        status: SolveStatus::Completed,
        fallback_steps: 0,
    })
}

/// Output of [`gradient_descent`] with the objective after every accepted
/// step (first entry is the starting value).
#[derive(Debug, Clone)]
pub struct DescentRun {
    pub estimate: LocalEstimate,
    pub risk_history: Vec<f64>,
}

/// Gradient descent with Armijo backtracking, run until
/// `‖∇F(θ)‖ ≤ grad_tol` or `max_iter` steps.
pub fn gradient_descent(
    model: &LossModel,
    data: &Dataset,
    theta_init: &[f64],
    cfg: &SolverConfig,
) -> Result<DescentRun> {
    check_inputs(model, data, cfg)?;
    check_dim(model.dim(), theta_init.len())?;
    let start = Instant::now();
    let mut theta = theta_init.to_vec();
    let mut f = risk_checked(model, &theta, data, 0)?;
    let mut history = vec![f];
    let mut g = model.risk_gradient_raw(&theta, data);
    let mut gnorm = norm2(&g);
    let mut step = 1.0;
    let mut iterations = 0;
    let mut status = SolveStatus::MaxIterReached;
    while iterations < cfg.max_iter {
        if gnorm <= cfg.grad_tol {
            status = SolveStatus::Converged;
            break;
        }
        let dir: Vec<f64> = g.iter().map(|v| -v).collect();
        iterations += 1;
        match backtrack(
            model,
            data,
            &theta,
            f,
            gnorm,
            &dir,
            -gnorm * gnorm,
            step * 2.0,
            true,
        ) {
            Some(acc) => {
                theta = acc.theta;
                f = acc.f;
                step = acc.step;
                history.push(f);
            }
            None => {
                status = SolveStatus::Stalled;
                break;
            }
        }
        risk_checked(model, &theta, data, iterations)?;
        g = model.risk_gradient_raw(&theta, data);
        gnorm = norm2(&g);
    }
    if status == SolveStatus::MaxIterReached && gnorm <= cfg.grad_tol {
        status = SolveStatus::Converged;
    }
    Ok(DescentRun {
        estimate: LocalEstimate {
            theta: ParamVector::new(theta)?,
            iterations,
            final_grad_norm: gnorm,
            wall_time: start.elapsed(),
            status,
            fallback_steps: 0,
        },
        risk_history: history,
    })
}

/// SGD warm start (`stage1_iters` steps) followed by gradient descent to
/// `grad_tol`.
pub fn solve_two_stage(
    model: &LossModel,
    data: &Dataset,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<LocalEstimate> {
    Ok(two_stage_run(model, data, cfg, seed)?.estimate)
}

/// [`solve_two_stage`] returning the stage-2 objective trace.
pub fn two_stage_run(
    model: &LossModel,
    data: &Dataset,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<DescentRun> {
    check_inputs(model, data, cfg)?;
    let start = Instant::now();
    let mut theta = cfg.init(model.dim())?;
    let k = cfg
        .stage1_iters
        .unwrap_or_else(|| SolverConfig::default_stage1(data.len()));
    sgd_pass(model, data, &cfg.sgd, &mut theta, k, seed)?;
    let mut run = gradient_descent(model, data, &theta, cfg)?;
    run.estimate.iterations += k;
    run.estimate.wall_time = start.elapsed();
    Ok(run)
}

/// Dispatches on `cfg.method`. `seed` drives the SGD visiting order.
pub fn solve(
    model: &LossModel,
    data: &Dataset,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<LocalEstimate> {
    match cfg.method {
        SolverMethod::ClosedFormLs => {
            if model.kind() != LossKind::LeastSquares {
                return Err(Error::invalid(
                    "closed-form solve requires the least-squares loss",
                ));
            }
            check_dim(model.dim(), data.dim())?;
            solve_closed_form_ls(data, 0.0)
        }
        SolverMethod::Newton => solve_newton(model, data, cfg),
        SolverMethod::Sgd => solve_sgd(model, data, cfg, seed),
        SolverMethod::TwoStage => solve_two_stage(model, data, cfg, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data1(points: &[(f64, f64)]) -> Dataset {
        Dataset::new(
            1,
            points
                .iter()
                .map(|&(x, y)| Sample::dense(vec![x], y))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let est = solve_closed_form_ls(&data1(&[(1.0, 2.0), (2.0, 4.0)]), 0.0).unwrap();
        assert!((est.theta[0] - 2.0).abs() < 1e-14);
        let est = solve_closed_form_ls(&data1(&[(1.0, 1.0)]), 1.0).unwrap();
        assert!((est.theta[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn singular_reports_rank() {
        let data = Dataset::new(
            3,
            vec![
                Sample::dense(vec![1.0, 1.0, 0.0], 1.0),
                Sample::dense(vec![2.0, 2.0, 0.0], 2.0),
            ],
        )
        .unwrap();
        match solve_closed_form_ls(&data, 0.0) {
            Err(Error::Singular { rank, dim }) => assert_eq!((rank, dim), (1, 3)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(solve_closed_form_ls(&data, 0.1).is_ok());
        let mn = solve_closed_form_ls_min_norm(&data, 0.0).unwrap();
        assert!((mn.theta[0] - 0.5).abs() < 1e-10 && (mn.theta[1] - 0.5).abs() < 1e-10);
        assert!(mn.theta[2].abs() < 1e-12);
    }

    #[test]
    fn sgd_running_mean() {
        let model = LossModel::least_squares(1);
        let cfg = SolverConfig {
            method: SolverMethod::Sgd,
            ..SolverConfig::default()
        };
        let est = solve_sgd(&model, &data1(&[(1.0, 1.0), (1.0, 3.0)]), &cfg, 99).unwrap();
        assert!((est.theta[0] - 2.0).abs() < 1e-15);
        assert_eq!(est.iterations, 2);
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_onto_ball(&[3.0, 4.0], Some(1.0)), vec![0.6, 0.8]);
        assert_eq!(project_onto_ball(&[3.0, 4.0], None), vec![3.0, 4.0]);
        assert_eq!(project_onto_ball(&[0.3, 0.4], Some(1.0)), vec![0.3, 0.4]);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolverConfig::with_method(SolverMethod::Sgd);
        cfg.sgd.c = 0.5;
        assert!(cfg.validate().is_err());
        cfg.sgd.schedule = StepSchedule::DOver10DPlusT;
        assert!(cfg.validate().is_ok());
        let cfg = SolverConfig {
            grad_tol: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn default_stage1_is_log_squared() {
        // ln(100000)² = 132.55
        assert_eq!(SolverConfig::default_stage1(100_000), 133);
        let mut cfg = SolverConfig::default();
        cfg.resolve_stage1(8, 12_500);
        assert_eq!(cfg.stage1_iters, Some(133));
    }

    #[test]
    fn newton_on_separable_logistic() {
        let model = LossModel::ridge_logistic(1, 0.1).unwrap();
        let data = data1(&[(1.0, 1.0), (-1.0, -1.0)]);
        let est = solve_newton(&model, &data, &SolverConfig::default()).unwrap();
        assert_eq!(est.status, SolveStatus::Converged);
        assert!(est.final_grad_norm < 1e-10);
    }
}
