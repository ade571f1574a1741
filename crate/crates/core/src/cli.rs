//! Command-line front end. `run` returns the process exit code: 0 on
//! success, 2 for usage errors, 1 for runtime failures.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::aggregate::suggest_ratio;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::gen::{draw_truth, gen_dataset, resolve_theta_star, GenModel, GenSpec, SPARSE_NNZ};
use crate::harness::config::{parse_feature_style, parse_gen_model, parse_solver_method};
use crate::harness::{run_experiment, ExperimentConfig};
use crate::loss::{LossKind, LossModel};
use crate::runtime::Worker;
use crate::solver::{self, SolverConfig};

#[derive(Parser, Debug)]
#[command(
    name = "avgm",
    version,
    about = "One-shot distributed empirical risk minimization"
)]
struct Cli {
    /// Base seed for all randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for in-process runs.
    #[arg(long, global = true, value_parser = positive)]
    parallelism: Option<usize>,
    /// Comma-separated worker endpoints (host:port,...).
    #[arg(long, global = true)]
    remote: Option<String>,
    /// key=value settings file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic dataset in sparse text format.
    Gen(GenArgs),
    /// Run one local solve on a dataset file.
    Solve(SolveArgs),
    /// Run a simulation sweep and write a results CSV.
    Experiment(Box<ExperimentArgs>),
    /// Serve shard tasks over the wire protocol.
    Worker(WorkerArgs),
    /// Print min(C·sqrt(m)/n, 0.5).
    SuggestR(SuggestArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, default_value = "normal")]
    model: String,
    #[arg(long, default_value_t = 20, value_parser = positive)]
    d: usize,
    #[arg(long = "N", alias = "count", value_parser = positive)]
    n: usize,
    #[arg(long, default_value = "sparse5")]
    feature_style: String,
    #[arg(long, default_value_t = SPARSE_NNZ, value_parser = positive)]
    nnz: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Dataset in sparse text format.
    #[arg(long)]
    data: PathBuf,
    /// least_squares, logistic or pathological.
    #[arg(long, default_value = "least_squares")]
    loss: String,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value = "newton")]
    solver: String,
    /// Dimension; inferred from the data when absent.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    grad_tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct ExperimentArgs {
    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_parser = positive)]
    d: Option<usize>,
    #[arg(long = "N", value_parser = positive)]
    n: Option<usize>,
    /// Comma-separated shard counts.
    #[arg(long, value_parser = positive_list)]
    m: Option<String>,
    /// Comma-separated subsampling ratios.
    #[arg(long)]
    r: Option<String>,
    /// Subset of avgm,savgm,sgd_avgm,single,oracle.
    #[arg(long)]
    methods: Option<String>,
    /// Subset of mse,mse_gap,logloss,auc.
    #[arg(long)]
    metrics: Option<String>,
    #[arg(long, value_parser = positive)]
    reps: Option<usize>,
    #[arg(long)]
    feature_style: Option<String>,
    #[arg(long)]
    nnz: Option<usize>,
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    sgd_schedule: Option<String>,
    #[arg(long)]
    sgd_radius: Option<String>,
    #[arg(long)]
    oversample: Option<usize>,
    /// Keep one truth draw across repetitions.
    #[arg(long)]
    fixed_truth: bool,
    /// Fill the wall_ms column.
    #[arg(long)]
    timing: bool,
    /// strict or lenient handling of failed remote shards.
    #[arg(long)]
    policy: Option<String>,
    /// Remote timeout in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Results CSV; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WorkerArgs {
    #[arg(long, default_value = "127.0.0.1:7070")]
    listen: String,
}

#[derive(Args, Debug)]
struct SuggestArgs {
    #[arg(long, value_parser = positive)]
    m: usize,
    #[arg(long, value_parser = positive)]
    n: usize,
    #[arg(long = "C", default_value_t = 1.0)]
    scale: f64,
}

fn positive(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_list(s: &str) -> std::result::Result<String, String> {
    for part in s.split(',') {
        positive(part.trim())?;
    }
    Ok(s.to_string())
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> std::result::Result<(), Failure> {
    match cli.command {
        Command::Gen(a) => cmd_gen(&a, cli.seed.unwrap_or(0)),
        Command::Solve(a) => cmd_solve(&a, cli.seed.unwrap_or(0)),
        Command::Experiment(a) => {
            let cfg = experiment_config(
                &a,
                &cli.config,
                cli.seed,
                cli.parallelism,
                cli.remote.as_deref(),
            )?;
            let result = run_experiment(&cfg)?;
            if cfg.output.is_none() {
                result.write_csv(io::stdout().lock())?;
            }
            Ok(())
        }
        Command::Worker(a) => {
            let worker = Worker::bind(a.listen.as_str())
                .map_err(|e| e.context(format!("binding {}", a.listen)))?;
            eprintln!("listening on {}", worker.local_addr()?);
            worker.serve()?;
            Ok(())
        }
        Command::SuggestR(a) => {
            let r = suggest_ratio(a.m, a.n, a.scale).map_err(usage)?;
            println!("{r}");
            Ok(())
        }
    }
}

fn experiment_config(
    a: &ExperimentArgs,
    config: &Option<PathBuf>,
    seed: Option<u64>,
    parallelism: Option<usize>,
    remote: Option<&str>,
) -> std::result::Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::new(GenModel::Normal, 20, 100_000);
    if let Some(path) = config {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
        cfg.apply_text(&text)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    let seed = seed.map(|s| s.to_string());
    let parallelism = parallelism.map(|p| p.to_string());
    let flags: [(&str, Option<String>); 20] = [
        ("model", a.model.clone()),
        ("d", a.d.map(|v| v.to_string())),
        ("N", a.n.map(|v| v.to_string())),
        ("m", a.m.clone()),
        ("r", a.r.clone()),
        ("methods", a.methods.clone()),
        ("metrics", a.metrics.clone()),
        ("reps", a.reps.map(|v| v.to_string())),
        ("feature_style", a.feature_style.clone()),
        ("nnz", a.nnz.map(|v| v.to_string())),
        ("solver", a.solver.clone()),
        ("lambda", a.lambda.map(|v| v.to_string())),
        ("sgd_schedule", a.sgd_schedule.clone()),
        ("sgd_radius", a.sgd_radius.clone()),
        ("oversample", a.oversample.map(|v| v.to_string())),
        ("policy", a.policy.clone()),
        ("timeout", a.timeout.map(|v| v.to_string())),
        ("seed", seed),
        ("parallelism", parallelism),
        ("remote", remote.map(str::to_string)),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, &v).map_err(usage)?;
        }
    }
    if a.fixed_truth {
        cfg.fixed_truth = true;
    }
    if a.timing {
        cfg.record_timing = true;
    }
    if let Some(p) = &a.output {
        cfg.output = Some(p.clone());
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn cmd_gen(a: &GenArgs, seed: u64) -> std::result::Result<(), Failure> {
    let model = parse_gen_model(&a.model).map_err(usage)?;
    let spec = GenSpec {
        model,
        d: if model == GenModel::BernoulliPathological {
            1
        } else {
            a.d
        },
        feature_style: parse_feature_style(&a.feature_style).map_err(usage)?,
        seed,
        nnz_per_row: a.nnz,
        zero_noise: false,
    };
    spec.validate().map_err(usage)?;
    let mut truth = draw_truth(&spec)?;
    if truth.theta_star.is_none() {
        resolve_theta_star(&spec, &mut truth, a.n, 10)?;
    }
    let data = gen_dataset(&spec, &truth, a.n)?;
    let write = |w: &mut dyn Write| -> Result<()> {
        writeln!(w, "# model={} d={} seed={seed}", a.model, spec.d)?;
        let theta: Vec<String> = truth.theta_star()?.iter().map(|v| v.to_string()).collect();
        writeln!(w, "# theta_star={}", theta.join(","))?;
        data.write_text(&mut *w)?;
        w.flush()?;
        Ok(())
    };
    match &a.out {
        Some(p) => {
            let f = File::create(p)
                .map_err(|e| Error::from(e).context(format!("creating {}", p.display())))?;
            write(&mut BufWriter::new(f))?
        }
        None => write(&mut io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_solve(a: &SolveArgs, seed: u64) -> std::result::Result<(), Failure> {
    let kind = match a.loss.as_str() {
        "least_squares" | "ls" => LossKind::LeastSquares,
        "logistic" | "ridge_logistic" => LossKind::RidgeLogistic { lambda: a.lambda },
        "pathological" => LossKind::Pathological,
        other => return Err(Failure::Usage(format!("unknown loss '{other}'"))),
    };
    let mut cfg = SolverConfig::with_method(parse_solver_method(&a.solver).map_err(usage)?);
    if let Some(t) = a.grad_tol {
        cfg.grad_tol = t;
    }
    if let Some(k) = a.max_iter {
        cfg.max_iter = k;
    }
    cfg.validate().map_err(usage)?;
    let f = File::open(&a.data)
        .map_err(|e| Error::from(e).context(format!("opening {}", a.data.display())))?;
    let data = Dataset::read_text(BufReader::new(f), a.d)
        .map_err(|e| e.context(a.data.display().to_string()))?;
    let model = LossModel::new(kind, data.dim()).map_err(usage)?;
    let est = if cfg.method == solver::SolverMethod::ClosedFormLs {
        if kind != LossKind::LeastSquares {
            return Err(Failure::Usage(
                "closed-form solve requires the least-squares loss".into(),
            ));
        }
        solver::solve_closed_form_ls(&data, a.lambda)?
    } else {
        solver::solve(&model, &data, &cfg, seed)?
    };
    let theta: Vec<String> = est.theta.iter().map(|v| format!("{v:.16e}")).collect();
    println!("{}", theta.join(" "));
    eprintln!(
        "status={:?} iterations={} grad_norm={:.3e} wall_ms={:.3}",
        est.status,
        est.iterations,
        est.final_grad_norm,
        est.wall_time.as_secs_f64() * 1e3
    );
    Ok(())
}
