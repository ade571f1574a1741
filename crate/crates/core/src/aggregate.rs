//! One-shot combiners.
//!
//! AVGM averages the shard minimizers. SAVGM additionally has every shard
//! solve on a `⌈r·n⌉` subsample drawn without replacement and returns
//! `(θ̄₁ − r·θ̄₂) / (1 − r)`, which cancels the leading `O(1/n)` bias term.

use crate::dataset::{Dataset, ParamVector};
use crate::error::{check_dim, Error, Result};
use crate::rng::rng_from_seed;

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CombineMethod {
    Avgm,
    Savgm,
    SgdAvgm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsampleSpec {
    ratio: f64,
    pub seed: u64,
}

impl SubsampleSpec {
    pub fn new(ratio: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&ratio) {
            return Err(Error::invalid(format!(
                "subsampling ratio must be in [0, 1), got {ratio}"
            )));
        }
        Ok(Self { ratio, seed })
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// `⌈r·n⌉`
    pub fn size(&self, n: usize) -> usize {
        ((self.ratio * n as f64).ceil() as usize).min(n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombineResult {
    pub theta1_bar: ParamVector,
    pub theta2_bar: Option<ParamVector>,
    pub theta_final: ParamVector,
    pub method: CombineMethod,
}

fn mean(estimates: &[&[f64]]) -> Result<ParamVector> {
    let first = estimates
        .first()
        .ok_or_else(|| Error::invalid("cannot average an empty list of estimates"))?;
    let d = first.len();
    let mut acc = vec![0.0; d];
    for e in estimates {
        check_dim(d, e.len())?;
        for (a, v) in acc.iter_mut().zip(e.iter()) {
            *a += v;
        }
    }
    let m = estimates.len() as f64;
    ParamVector::new(acc.into_iter().map(|a| a / m).collect())
}

/// Componentwise mean of the shard estimates.
pub fn avgm_combine(estimates: &[ParamVector]) -> Result<CombineResult> {
    let views: Vec<&[f64]> = estimates.iter().map(|e| e.as_slice()).collect();
    let theta1_bar = mean(&views)?;
    Ok(CombineResult {
        theta_final: theta1_bar.clone(),
        theta1_bar,
        theta2_bar: None,
        method: CombineMethod::Avgm,
    })
}

/// Same arithmetic as [`avgm_combine`], tagged as an SGD-based average.
pub fn sgd_avgm_combine(estimates: &[ParamVector]) -> Result<CombineResult> {
    let mut out = avgm_combine(estimates)?;
    out.method = CombineMethod::SgdAvgm;
    Ok(out)
}

/// `(θ̄₁ − r·θ̄₂) / (1 − r)`. At `r = 0` the result is `θ̄₁` and `θ̄₂` is
/// not consulted.
pub fn savgm_combine(
    theta1_bar: &ParamVector,
    theta2_bar: Option<&ParamVector>,
    r: f64,
) -> Result<CombineResult> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::invalid(format!(
            "subsampling ratio must be in [0, 1), got {r}"
        )));
    }
    if r == 0.0 {
        return Ok(CombineResult {
            theta1_bar: theta1_bar.clone(),
            theta2_bar: theta2_bar.cloned(),
            theta_final: theta1_bar.clone(),
            method: CombineMethod::Savgm,
        });
    }
    let t2 =
        theta2_bar.ok_or_else(|| Error::invalid("SAVGM with r > 0 needs the subsample average"))?;
    check_dim(theta1_bar.len(), t2.len())?;
    let fin = theta1_bar
        .iter()
        .zip(t2.iter())
        .map(|(a, b)| (a - r * b) / (1.0 - r))
        .collect();
    Ok(CombineResult {
        theta1_bar: theta1_bar.clone(),
        theta2_bar: Some(t2.clone()),
        theta_final: ParamVector::new(fin)?,
        method: CombineMethod::Savgm,
    })
}

/// Averages both levels of shard estimates and applies the SAVGM weighting.
pub fn savgm_from_shards(
    theta1: &[ParamVector],
    theta2: &[ParamVector],
    r: f64,
) -> Result<CombineResult> {
    let t1 = avgm_combine(theta1)?.theta1_bar;
    let t2 = if r == 0.0 {
        None
    } else {
        Some(avgm_combine(theta2)?.theta1_bar)
    };
    savgm_combine(&t1, t2.as_ref(), r)
}

/// Indices of a uniform without-replacement subsample of size `⌈r·n⌉`,
/// from a seeded partial Fisher–Yates shuffle.
pub fn subsample_indices(n: usize, spec: &SubsampleSpec) -> Vec<usize> {
    let k = spec.size(n);
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = rng_from_seed(spec.seed);
    for i in 0..k {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

pub fn subsample_without_replacement(shard: &Dataset, spec: &SubsampleSpec) -> Dataset {
    shard.select(&subsample_indices(shard.len(), spec))
}

/// `min(C·√m / n, 0.5)`
pub fn suggest_ratio(m: usize, n: usize, scale: f64) -> Result<f64> {
    if m == 0 || n == 0 || !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::invalid(format!(
            "suggest_ratio needs positive inputs, got m={m} n={n} C={scale}"
        )));
    }
    Ok((scale * (m as f64).sqrt() / n as f64).min(0.5))
}
