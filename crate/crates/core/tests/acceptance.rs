//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits nonzero if any fails.

use std::io::{Read, Write};
use std::net::TcpStream;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use avgm::aggregate::{savgm_combine, CombineMethod};
use avgm::dataset::{Dataset, ParamVector, Sample};
use avgm::gen::{draw_truth, gen_click_dataset, gen_dataset, FeatureStyle, GenModel, GenSpec};
use avgm::harness::{
    auc, logloss, run_experiment, ExperimentConfig, ExperimentResult, Method, Metric,
};
use avgm::loss::LossModel;
use avgm::rng::{derive_seed, rng_from_seed};
use avgm::runtime::wire::{self, FrameType, MAX_PAYLOAD};
use avgm::runtime::{
    combine_replies, make_shard_plan, run_local, run_remote, DataSource, RemoteOptions,
    TaskTemplate, Worker,
};
use avgm::solver::{self, Radius, SgdConfig, SolverConfig, SolverMethod, StepSchedule};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

const MINUTES: Duration = Duration::from_secs(600);

fn centralized_and_avgm1(model: LossModel, data: Dataset, solver: &SolverConfig, seed: u64) -> f64 {
    let direct = solver::solve(&model, &data, solver, seed).unwrap().theta;
    let plan = make_shard_plan(data.len(), 1, seed).unwrap();
    let template = TaskTemplate {
        source: DataSource::Dataset(Arc::new(data)),
        model,
        solver: solver.clone(),
        subsample_ratio: None,
    };
    let replies = run_local(&plan, &template, 1).unwrap();
    let avg = combine_replies(CombineMethod::Avgm, &replies, 0.0)
        .unwrap()
        .theta_final;
    avg.dist2(&direct).unwrap().sqrt()
}

fn c1_m1_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let spec = GenSpec::new(GenModel::Normal, 20, FeatureStyle::Sparse5, seed).unwrap();
        let data = gen_dataset(&spec, &draw_truth(&spec).unwrap(), 2000).unwrap();
        worst = worst.max(centralized_and_avgm1(
            LossModel::least_squares(20),
            data,
            &SolverConfig::with_method(SolverMethod::Newton),
            seed,
        ));

        let (data, _) = gen_click_dataset(50, 5, 2000, seed).unwrap();
        worst = worst.max(centralized_and_avgm1(
            LossModel::ridge_logistic(50, 1e-3).unwrap(),
            data,
            &SolverConfig::with_method(SolverMethod::Newton),
            seed,
        ));

        let spec = GenSpec::new(
            GenModel::BernoulliPathological,
            1,
            FeatureStyle::DenseGaussian,
            seed,
        )
        .unwrap();
        let data = gen_dataset(&spec, &draw_truth(&spec).unwrap(), 1001).unwrap();
        worst = worst.max(centralized_and_avgm1(
            LossModel::pathological(),
            data,
            &SolverConfig::with_method(SolverMethod::Newton),
            seed,
        ));
    }
    outcome(
        worst < 1e-8,
        format!("max ‖Δθ‖ = {worst:.2e} over 3 losses × 10 seeds"),
    )
}

/// Model 12a, d = 20, N = 100000, 20 repetitions, m = 2..128.
fn normal_sweep() -> ExperimentResult {
    let mut cfg = ExperimentConfig::new(GenModel::Normal, 20, 100_000);
    cfg.methods = vec![
        Method::Avgm,
        Method::SgdAvgm,
        Method::Single,
        Method::Oracle,
    ];
    cfg.metrics = vec![Metric::Mse, Metric::MseGap];
    cfg.base_seed = 2013;
    cfg.parallelism = 4;
    run_experiment(&cfg).unwrap()
}

fn c2_normal_sweep(res: &ExperimentResult) -> Outcome {
    let oracle = res.mean(Method::Oracle, 1, None, Metric::Mse).unwrap();
    let mut worst_ratio: f64 = 0.0;
    for m in [2, 4, 8, 16, 32, 64] {
        let avgm = res.mean(Method::Avgm, m, None, Metric::Mse).unwrap();
        worst_ratio = worst_ratio.max(avgm / oracle);
    }
    let single64 = res.mean(Method::Single, 64, None, Metric::Mse).unwrap();
    let avgm64 = res.mean(Method::Avgm, 64, None, Metric::Mse).unwrap();
    outcome(
        worst_ratio <= 2.0 && single64 >= 10.0 * avgm64,
        format!(
            "max AVGM/oracle = {worst_ratio:.3} (≤ 2), single/AVGM at m=64 = {:.1} (≥ 10)",
            single64 / avgm64
        ),
    )
}

fn c3_sgd_gap(res: &ExperimentResult) -> Outcome {
    let grid = [2, 4, 8, 16, 32, 64, 128];
    let gaps: Vec<f64> = grid
        .iter()
        .map(|&m| res.mean(Method::SgdAvgm, m, None, Metric::MseGap).unwrap())
        .collect();
    let inversions = gaps.windows(2).filter(|w| w[1] <= w[0]).count();
    let avgm_gap = res.mean(Method::Avgm, 128, None, Metric::MseGap).unwrap();
    let grows = gaps[6] > gaps[0] && inversions <= 1;
    outcome(
        grows && gaps[6] > avgm_gap,
        format!(
            "SGD-AVGM gap {:.2e} → {:.2e} over m=2..128 ({inversions} inversions), AVGM gap at 128 = {avgm_gap:.2e}",
            gaps[0], gaps[6]
        ),
    )
}

fn c4_heteroskedastic() -> Outcome {
    let mut cfg = ExperimentConfig::new(GenModel::Heteroskedastic, 20, 100_000);
    cfg.methods = vec![Method::Avgm, Method::Savgm];
    cfg.m_grid = vec![16, 128];
    cfg.r_grid = vec![0.005, 0.01, 0.02, 0.04];
    cfg.base_seed = 2013;
    cfg.parallelism = 4;
    let res = run_experiment(&cfg).unwrap();
    let avgm128 = res.mean(Method::Avgm, 128, None, Metric::Mse).unwrap();
    let avgm16 = res.mean(Method::Avgm, 16, None, Metric::Mse).unwrap();
    let best = cfg
        .r_grid
        .iter()
        .map(|&r| {
            (
                r,
                res.mean(Method::Savgm, 128, Some(r), Metric::Mse).unwrap(),
            )
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let beats = best.1 < avgm128;
    let grows = avgm128 >= 4.0 * avgm16;
    outcome(
        beats && grows,
        format!(
            "best SAVGM(r={}) = {:.4e} vs AVGM = {avgm128:.4e} at m=128 [{}]; AVGM(128)/AVGM(16) = {:.3} (≥ 4) [{}]",
            best.0,
            best.1,
            if beats { "ok" } else { "fails" },
            avgm128 / avgm16,
            if grows { "ok" } else { "fails" }
        ),
    )
}

/// Exact moments of the pathological shard minimizer for `n0 ~ Bin(n, ½)`.
fn pathological_moments(n: usize) -> (f64, f64) {
    let mut p = 0.5f64.powi(n as i32);
    let (mut m1, mut m2) = (0.0, 0.0);
    for k in 0..=n {
        let theta = if 2 * k <= n {
            k as f64 / n as f64 - 0.5
        } else {
            1.0 - n as f64 / (2.0 * k as f64)
        };
        m1 += p * theta;
        m2 += p * theta * theta;
        p *= (n - k) as f64 / (k + 1) as f64;
    }
    (m1, m2)
}

fn c5_pathological() -> Outcome {
    let n = 1000;
    let run = |m: usize| {
        let mut cfg = ExperimentConfig::new(GenModel::BernoulliPathological, 1, n * m);
        cfg.methods = vec![Method::Avgm];
        cfg.m_grid = vec![m];
        cfg.repetitions = 100;
        cfg.base_seed = 2013;
        run_experiment(&cfg)
            .unwrap()
            .mean(Method::Avgm, m, None, Metric::Mse)
            .unwrap()
    };
    let (mse1, mse128) = (run(1), run(128));
    let (m1, m2) = pathological_moments(n);
    let exact = ((m2 - m1 * m1) / 128.0 + m1 * m1) / m2;
    let ratio = mse128 / mse1;
    outcome(
        ratio >= 0.05,
        format!("MSE(128)/MSE(1) = {ratio:.4} (≥ 0.05; exact expectation ratio {exact:.4})"),
    )
}

fn c6_sgd_bound() -> Outcome {
    let theta_star = 0.5;
    let (c, lambda) = (1.0, 1.0);
    let g2 = theta_star * theta_star + 1.0 + 1.0;
    let model = LossModel::least_squares(1);
    let cfg = SolverConfig {
        method: SolverMethod::Sgd,
        sgd: SgdConfig {
            c,
            lambda,
            radius: Radius::Auto,
            schedule: StepSchedule::COverLambdaT,
        },
        ..SolverConfig::default()
    };
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for t in [10usize, 100, 1000] {
        let mut total = 0.0;
        for seed in 0..50u64 {
            let mut rng = rng_from_seed(derive_seed(99, seed));
            let samples = (0..t)
                .map(|_| {
                    Sample::dense(vec![1.0], theta_star + rng.sample::<f64, _>(StandardNormal))
                })
                .collect();
            let data = Dataset::new(1, samples).unwrap();
            let est = solver::solve_sgd(&model, &data, &cfg, seed).unwrap();
            total += (est.theta[0] - theta_star).powi(2);
        }
        let mean = total / 50.0;
        let bound = 2.0 * 4.0 * c * c * g2 / (lambda * lambda * t as f64);
        worst = worst.max(mean / bound);
        ok &= mean <= bound;
    }
    outcome(
        ok,
        format!("max mean error / bound = {worst:.3} over t ∈ {{10, 100, 1000}}"),
    )
}

fn c7_savgm_algebra() -> Outcome {
    let mut rng = rng_from_seed(7);
    let mut worst: f64 = 0.0;
    let rel = |a: f64, b: f64| (a - b).abs() / 1f64.max(a.abs()).max(b.abs());
    for _ in 0..1000 {
        let d = rng.random_range(1..10);
        let vec = |rng: &mut _| -> ParamVector {
            ParamVector::new((0..d).map(|_| rng_normal(rng) * 10.0).collect()).unwrap()
        };
        let (t1, t2) = (vec(&mut rng), vec(&mut rng));
        let r = rng.random_range(0.0..0.9);
        let at0 = savgm_combine(&t1, Some(&t2), 0.0).unwrap().theta_final;
        worst = worst.max(at0.dist2(&t1).unwrap().sqrt());
        let fixed = savgm_combine(&t1, Some(&t1), r).unwrap().theta_final;
        for (a, b) in fixed.iter().zip(t1.iter()) {
            worst = worst.max(rel(*a, *b));
        }
        let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let affine =
            |v: &ParamVector| ParamVector::new(v.iter().map(|x| a * x + b).collect()).unwrap();
        let lhs = savgm_combine(&affine(&t1), Some(&affine(&t2)), r)
            .unwrap()
            .theta_final;
        let rhs = affine(&savgm_combine(&t1, Some(&t2), r).unwrap().theta_final);
        for (x, y) in lhs.iter().zip(rhs.iter()) {
            worst = worst.max(rel(*x, *y) / 100.0);
        }
    }
    outcome(
        worst <= 1e-12,
        format!("max deviation {worst:.2e} over 1000 random inputs"),
    )
}

fn rng_normal(rng: &mut avgm::rng::StreamRng) -> f64 {
    rng.sample(StandardNormal)
}

/// Model 12a, d = 5, n = 500, m = 8, fixed truth; returns AVGM and
/// SAVGM(0.04) estimates per repetition plus θ*.
fn small_normal_runs(reps: usize) -> (Vec<ParamVector>, Vec<ParamVector>, ParamVector) {
    let truth_spec = GenSpec::new(GenModel::Normal, 5, FeatureStyle::Sparse5, 11).unwrap();
    let truth = draw_truth(&truth_spec).unwrap();
    let theta_star = truth.theta_star().unwrap().clone();
    let (mut a, mut s) = (Vec::new(), Vec::new());
    for rep in 0..reps as u64 {
        let spec = GenSpec::new(
            GenModel::Normal,
            5,
            FeatureStyle::Sparse5,
            derive_seed(5, rep),
        )
        .unwrap();
        let data = Arc::new(gen_dataset(&spec, &truth, 4000).unwrap());
        let plan = make_shard_plan(4000, 8, derive_seed(6, rep)).unwrap();
        let template = TaskTemplate {
            source: DataSource::Dataset(data),
            model: LossModel::least_squares(5),
            solver: SolverConfig::with_method(SolverMethod::ClosedFormLs),
            subsample_ratio: Some(0.04),
        };
        let replies = run_local(&plan, &template, 1).unwrap();
        a.push(
            combine_replies(CombineMethod::Avgm, &replies, 0.0)
                .unwrap()
                .theta_final,
        );
        s.push(
            combine_replies(CombineMethod::Savgm, &replies, 0.04)
                .unwrap()
                .theta_final,
        );
    }
    (a, s, theta_star)
}

fn coord_stats(v: &[ParamVector]) -> (Vec<f64>, Vec<f64>) {
    let k = v.len() as f64;
    let d = v[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|j| v.iter().map(|x| x[j]).sum::<f64>() / k)
        .collect();
    let var = (0..d)
        .map(|j| v.iter().map(|x| (x[j] - mean[j]).powi(2)).sum::<f64>() / (k - 1.0))
        .collect();
    (mean, var)
}

fn c8_c9_small_normal() -> (Outcome, Outcome) {
    let (avgm, savgm, theta_star) = small_normal_runs(200);
    let (mean, var) = coord_stats(&avgm);
    let dist = mean
        .iter()
        .zip(theta_star.iter())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let se = (var.iter().sum::<f64>() / 200.0).sqrt();
    let c8 = outcome(
        dist <= 3.0 * se,
        format!(
            "‖mean θ̄₁ − θ*‖ = {dist:.3e}, Monte Carlo SE = {se:.3e} (ratio {:.2} ≤ 3)",
            dist / se
        ),
    );
    let (_, svar) = coord_stats(&savgm);
    let inflated = svar
        .iter()
        .zip(&var)
        .filter(|(s, a)| **s >= 0.9 * **a)
        .count();
    let frac = inflated as f64 / var.len() as f64;
    let c9 = outcome(
        frac >= 0.8,
        format!(
            "{inflated}/{} coordinates with var(SAVGM) ≥ 0.9·var(AVGM)",
            var.len()
        ),
    );
    (c8, c9)
}

fn c10_protocol() -> Outcome {
    let handle = Worker::bind("127.0.0.1:0").unwrap().spawn().unwrap();
    let endpoint = handle.addr().to_string();
    let mut rng = rng_from_seed(10);
    let mut equal = 0;
    let configs: [(GenModel, usize, usize, SolverMethod, Option<f64>); 5] = [
        (GenModel::Normal, 20, 4, SolverMethod::ClosedFormLs, None),
        (
            GenModel::Heteroskedastic,
            10,
            3,
            SolverMethod::ClosedFormLs,
            Some(0.1),
        ),
        (GenModel::Cubic, 8, 5, SolverMethod::TwoStage, None),
        (
            GenModel::SparseClick,
            30,
            4,
            SolverMethod::Newton,
            Some(0.2),
        ),
        (
            GenModel::BernoulliPathological,
            1,
            6,
            SolverMethod::Sgd,
            None,
        ),
    ];
    for (model, d, m, method, ratio) in configs {
        let n_total = rng.random_range(600..1200);
        let spec = GenSpec::new(model, d, FeatureStyle::Sparse5, rng.random()).unwrap();
        let truth = draw_truth(&spec).unwrap();
        let loss = match model {
            GenModel::SparseClick => LossModel::ridge_logistic(d, 1e-2).unwrap(),
            GenModel::BernoulliPathological => LossModel::pathological(),
            _ => LossModel::least_squares(d),
        };
        let template = TaskTemplate {
            source: DataSource::Recipe {
                spec: spec.clone(),
                cache: Some(Arc::new(gen_dataset(&spec, &truth, n_total).unwrap())),
            },
            model: loss,
            solver: SolverConfig::with_method(method),
            subsample_ratio: ratio,
        };
        let plan = make_shard_plan(n_total, m, rng.random()).unwrap();
        let local = run_local(&plan, &template, 2).unwrap();
        let remote = run_remote(
            &plan,
            &template,
            std::slice::from_ref(&endpoint),
            &RemoteOptions::default(),
        )
        .unwrap();
        let bitwise = remote.failed.is_empty()
            && remote.replies.len() == local.len()
            && remote.replies.iter().zip(&local).all(|((_, a), b)| {
                a.theta1
                    .iter()
                    .zip(b.theta1.iter())
                    .all(|(x, y)| x.to_bits() == y.to_bits())
                    && a.theta2
                        .as_ref()
                        .map(|v| v.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>())
                        == b.theta2
                            .as_ref()
                            .map(|v| v.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>())
            });
        equal += usize::from(bitwise);
    }

    let (frames, errors, alive) = fuzz_worker(&endpoint, 10_000);
    outcome(
        equal == 5 && errors == frames && alive,
        format!("{equal}/5 loopback runs bitwise equal; {errors}/{frames} malformed frames answered with error frames; worker alive: {alive}"),
    )
}

fn valid_task_payload() -> Vec<u8> {
    let spec = GenSpec::new(GenModel::Normal, 5, FeatureStyle::Sparse5, 3).unwrap();
    let data = gen_dataset(&spec, &draw_truth(&spec).unwrap(), 50).unwrap();
    let template = TaskTemplate {
        source: DataSource::Dataset(Arc::new(data)),
        model: LossModel::least_squares(5),
        solver: SolverConfig::with_method(SolverMethod::Newton),
        subsample_ratio: None,
    };
    let plan = make_shard_plan(50, 1, 0).unwrap();
    wire::encode_task(&template.task_for(&plan, 0, false).unwrap()).unwrap()
}

fn malformed_frame(rng: &mut avgm::rng::StreamRng, valid: &[u8]) -> Vec<u8> {
    let random_bytes = |rng: &mut avgm::rng::StreamRng, n: usize| {
        (0..n).map(|_| rng.random::<u8>()).collect::<Vec<u8>>()
    };
    match rng.random_range(0..7) {
        0 => {
            let len = rng.random_range(0..64);
            let mut f = wire::encode_frame(FrameType::Hello, &random_bytes(rng, len));
            f[rng.random_range(0..4)] ^= rng.random_range(1..=255u8);
            f
        }
        1 => {
            let len = rng.random_range(0..64);
            let mut f = wire::encode_frame(FrameType::Hello, &random_bytes(rng, len));
            f[4] = rng.random_range(5..=255u8);
            f
        }
        2 => {
            let mut f = wire::encode_frame(FrameType::Task, &[]);
            f[5..9].copy_from_slice(&rng.random_range(MAX_PAYLOAD + 1..=u32::MAX).to_le_bytes());
            f
        }
        3 => {
            let len = rng.random_range(0..256);
            wire::encode_frame(FrameType::Task, &random_bytes(rng, len))
        }
        4 => {
            let cut = rng.random_range(0..valid.len());
            wire::encode_frame(FrameType::Task, &valid[..cut])
        }
        5 => {
            let v: u16 = rng.random_range(2..=u16::MAX);
            wire::encode_frame(FrameType::Hello, &v.to_le_bytes())
        }
        _ => {
            let ft = if rng.random() {
                FrameType::Reply
            } else {
                FrameType::Error
            };
            let len = rng.random_range(0..32);
            wire::encode_frame(ft, &random_bytes(rng, len))
        }
    }
}

/// Sends `count` malformed frames after a handshake and counts error
/// replies; then checks a valid task still gets a reply.
fn fuzz_worker(endpoint: &str, count: usize) -> (usize, usize, bool) {
    let mut s = TcpStream::connect(endpoint).unwrap();
    s.set_read_timeout(Some(Duration::from_secs(30))).unwrap();
    wire::write_frame(&mut s, FrameType::Hello, &wire::encode_hello(1)).unwrap();
    let hello_ok = matches!(wire::read_frame(&mut s), Ok(Some((FrameType::Hello, _))));
    let valid = valid_task_payload();
    let mut rng = rng_from_seed(1010);
    let mut errors = 0;
    for _ in 0..count {
        s.write_all(&malformed_frame(&mut rng, &valid)).unwrap();
        if let Ok(Some((FrameType::Error, p))) = wire::read_frame(&mut s) {
            errors += usize::from(wire::decode_error(&p).is_ok());
        }
    }
    wire::write_frame(&mut s, FrameType::Task, &valid).unwrap();
    let alive = hello_ok && matches!(wire::read_frame(&mut s), Ok(Some((FrameType::Reply, _))));
    let _ = wire::write_frame(&mut s, FrameType::Shutdown, &[]);
    let mut rest = Vec::new();
    let _ = s.read_to_end(&mut rest);
    (count, errors, alive && rest.is_empty())
}

fn c11_metrics() -> Outcome {
    let mut rng = rng_from_seed(11);
    let scores: Vec<f64> = (0..10_000).map(|_| rng_normal(&mut rng)).collect();
    let mut labels: Vec<f64> = (0..10_000)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    labels.shuffle(&mut rng);
    let null = auc(&scores, &labels).unwrap();
    let sep_scores: Vec<f64> = (0..100).map(f64::from).collect();
    let sep_labels: Vec<f64> = (0..100).map(|i| if i >= 50 { 1.0 } else { -1.0 }).collect();
    let sep = auc(&sep_scores, &sep_labels).unwrap();
    let (holdout, _) = gen_click_dataset(40, 5, 500, 1).unwrap();
    let ll = logloss(&ParamVector::zeros(40), &holdout).unwrap();
    outcome(
        (null - 0.5).abs() <= 0.02 && sep == 1.0 && ll == std::f64::consts::LN_2,
        format!(
            "null AUC = {null:.4}, separated AUC = {sep}, logloss(0) − ln 2 = {:e}",
            ll - std::f64::consts::LN_2
        ),
    )
}

fn c12_solver_oracle() -> Outcome {
    let mut rng = rng_from_seed(12);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let d = rng.random_range(1..=10);
        let n = rng.random_range(2 * d + 10..=200);
        let samples = (0..n)
            .map(|_| {
                let x: Vec<f64> = (0..d).map(|_| rng_normal(&mut rng)).collect();
                let y = x.iter().sum::<f64>() + rng_normal(&mut rng);
                Sample::dense(x, y)
            })
            .collect();
        let data = Dataset::new(d, samples).unwrap();
        let model = LossModel::least_squares(d);
        let exact = solver::solve_closed_form_ls(&data, 0.0).unwrap().theta;
        for method in [SolverMethod::Newton, SolverMethod::TwoStage] {
            let est = solver::solve(&model, &data, &SolverConfig::with_method(method), 1).unwrap();
            worst = worst.max(est.theta.dist2(&exact).unwrap().sqrt());
        }
    }
    outcome(
        worst <= 1e-6,
        format!("max ‖θ − θ_closed‖ = {worst:.2e} over 20 instances"),
    )
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |id: u32, name: &str, budget: Duration, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = out.pass && in_time;
        failures += usize::from(!pass);
        println!(
            "criterion {id:>2} {}: {name}: {} [{:.1}s{}]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over budget" }
        );
        let _ = std::io::stdout().flush();
    };
    let secs = Duration::from_secs;
    report(1, "m=1 equivalence", secs(10), &mut c1_m1_equivalence);
    let mut sweep = None;
    report(2, "regression sweep, normal model", MINUTES, &mut || {
        let res = sweep.insert(normal_sweep());
        c2_normal_sweep(res)
    });
    let sweep = sweep.expect("sweep ran");
    report(3, "SGD-AVGM gap grows with m", MINUTES, &mut || {
        c3_sgd_gap(&sweep)
    });
    report(
        4,
        "SAVGM on heteroskedastic model",
        MINUTES,
        &mut c4_heteroskedastic,
    );
    report(5, "pathological averaging", secs(60), &mut c5_pathological);
    report(6, "SGD rate bound", secs(10), &mut c6_sgd_bound);
    report(
        7,
        "SAVGM combination algebra",
        secs(1),
        &mut c7_savgm_algebra,
    );
    let mut c9 = None;
    report(8, "unbiasedness", secs(60), &mut || {
        let (a, b) = c8_c9_small_normal();
        c9 = Some(b);
        a
    });
    report(9, "variance inflation", secs(60), &mut || {
        c9.take().expect("computed with criterion 8")
    });
    report(10, "protocol conformance", secs(60), &mut c10_protocol);
    report(11, "metric oracles", secs(10), &mut c11_metrics);
    report(
        12,
        "solver oracle equivalence",
        secs(10),
        &mut c12_solver_oracle,
    );
    if failures == 0 {
        println!("acceptance: all 12 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} of 12 criteria fail");
        ExitCode::FAILURE
    }
}
