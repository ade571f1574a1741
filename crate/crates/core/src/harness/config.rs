//! `key=value` experiment configuration.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored.
//! Keys match the long CLI flags (`model`, `d`, `N`, `m`, `r`, `methods`,
//! `reps`, `metrics`, `seed`, ...), and lists are comma separated.

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::gen::{FeatureStyle, GenModel};
use crate::runtime::FailurePolicy;
use crate::solver::{Radius, SolverMethod, StepSchedule};

use super::experiment::ExperimentConfig;

pub fn parse_gen_model(s: &str) -> Result<GenModel> {
    Ok(match s {
        "normal" | "12a" => GenModel::Normal,
        "cubic" | "12b" => GenModel::Cubic,
        "heteroskedastic" | "12c" => GenModel::Heteroskedastic,
        "bernoulli" | "bernoulli_pathological" | "pathological" => GenModel::BernoulliPathological,
        "click" | "sparse_click" => GenModel::SparseClick,
        _ => return Err(Error::invalid(format!("unknown model '{s}'"))),
    })
}

pub fn parse_feature_style(s: &str) -> Result<FeatureStyle> {
    match s {
        "sparse5" => Ok(FeatureStyle::Sparse5),
        "dense" | "dense_gaussian" => Ok(FeatureStyle::DenseGaussian),
        _ => Err(Error::invalid(format!("unknown feature style '{s}'"))),
    }
}

pub fn parse_solver_method(s: &str) -> Result<SolverMethod> {
    Ok(match s {
        "closed_form" | "closed_form_ls" => SolverMethod::ClosedFormLs,
        "newton" => SolverMethod::Newton,
        "sgd" => SolverMethod::Sgd,
        "two_stage" => SolverMethod::TwoStage,
        _ => return Err(Error::invalid(format!("unknown solver '{s}'"))),
    })
}

pub fn parse_schedule(s: &str) -> Result<StepSchedule> {
    match s {
        "c_over_lambda_t" => Ok(StepSchedule::COverLambdaT),
        "d_over_10_d_plus_t" => Ok(StepSchedule::DOver10DPlusT),
        _ => Err(Error::invalid(format!("unknown SGD schedule '{s}'"))),
    }
}

/// `auto`, `none` (unconstrained) or a positive radius.
pub fn parse_radius(s: &str) -> Result<Radius> {
    match s {
        "auto" => Ok(Radius::Auto),
        "none" | "unconstrained" => Ok(Radius::Unconstrained),
        _ => Ok(Radius::Ball(parse_num(s)?)),
    }
}

fn parse_num<T: FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim()
        .parse()
        .map_err(|e| Error::invalid(format!("cannot parse '{s}': {e}")))
}

pub fn parse_list<T, F: Fn(&str) -> Result<T>>(s: &str, f: F) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(f)
        .collect()
}

pub fn parse_bool(s: &str) -> Result<bool> {
    match s {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::invalid(format!("expected a boolean, got '{s}'"))),
    }
}

/// Parses config text into `(line, key, value)` triples.
pub fn parse_config(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("expected key=value, got '{line}'"),
        })?;
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl ExperimentConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "model" => self.model = parse_gen_model(value)?,
            "d" => self.d = parse_num(value)?,
            "feature_style" => self.feature_style = parse_feature_style(value)?,
            "nnz" => self.nnz_per_row = parse_num(value)?,
            "N" => self.n_total = parse_num(value)?,
            "m" => self.m_grid = parse_list(value, parse_num)?,
            "r" => self.r_grid = parse_list(value, parse_num)?,
            "methods" => self.methods = parse_list(value, str::parse)?,
            "metrics" => self.metrics = parse_list(value, str::parse)?,
            "reps" => self.repetitions = parse_num(value)?,
            "solver" => self.solver_method = Some(parse_solver_method(value)?),
            "grad_tol" => self.solver.grad_tol = parse_num(value)?,
            "max_iter" => self.solver.max_iter = parse_num(value)?,
            "stage1_iters" => self.solver.stage1_iters = Some(parse_num(value)?),
            "sgd_c" => self.sgd.c = parse_num(value)?,
            "sgd_lambda" => self.sgd.lambda = parse_num(value)?,
            "sgd_radius" => self.sgd.radius = parse_radius(value)?,
            "sgd_schedule" => self.sgd.schedule = parse_schedule(value)?,
            "lambda" => self.lambda = parse_num(value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            "seed" => self.base_seed = parse_num(value)?,
            "fixed_truth" => self.fixed_truth = parse_bool(value)?,
            "oversample" => self.oracle_oversample = parse_num(value)?,
            "parallelism" => self.parallelism = parse_num(value)?,
            "remote" => self.remote = parse_list(value, |s| Ok(s.to_string()))?,
            "policy" => {
                self.remote_options.policy = match value {
                    "strict" => FailurePolicy::Strict,
                    "lenient" => FailurePolicy::Lenient,
                    _ => return Err(Error::invalid(format!("unknown failure policy '{value}'"))),
                }
            }
            "timeout" => self.remote_options.timeout = Duration::from_secs_f64(parse_num(value)?),
            "timing" => self.record_timing = parse_bool(value)?,
            _ => return Err(Error::invalid(format!("unknown setting '{key}'"))),
        }
        Ok(())
    }

    /// Applies every assignment of a config file's text.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (line, k, v) in parse_config(text)? {
            self.set(&k, &v).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::results::Method;

    #[test]
    fn config_text() {
        let mut cfg = ExperimentConfig::new(GenModel::Normal, 20, 1000);
        cfg.apply_text(
            "# sweep\nmodel = 12c\nm=2, 4 # grid\n\nmethods=avgm,savgm\nr=0.01\nsolver=newton\n",
        )
        .unwrap();
        assert_eq!(cfg.model, GenModel::Heteroskedastic);
        assert_eq!(cfg.m_grid, vec![2, 4]);
        assert_eq!(cfg.methods, vec![Method::Avgm, Method::Savgm]);
        assert_eq!(cfg.local_solver().method, SolverMethod::Newton);
        match cfg.apply_text("d=20\nbogus=1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(cfg.apply_text("no equals sign").is_err());
    }
}
