//! Synthetic data sources.
//!
//! Regression models (all with `ε ~ N(0,1)`):
//!
//! - normal:          `y = ⟨u,x⟩ + ε`
//! - cubic:           `y = ⟨u,x⟩ + Σ v_j x_j³ + ε`
//! - heteroskedastic: `y = ⟨u,x⟩ + h(x)·|ε|`, `h(x) = Σ (x_j/2)³`
//!
//! plus a Bernoulli(½) source for the pathological loss and a sparse binary
//! logistic "click" source. Sample `i` of a dataset is drawn from its own
//! counter-addressed stream, so any index range can be regenerated on its own.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::{Dataset, Features, ParamVector, Sample};
use crate::error::{Error, Result};
use crate::loss::sigmoid_neg;
use crate::rng::{rng_from_seed, tagged_seed, StreamFamily, StreamRng};
use crate::solver::NormalEquations;

/// Nonzeros per row for the sparse regression design.
pub const SPARSE_NNZ: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GenModel {
    Normal,
    Cubic,
    Heteroskedastic,
    BernoulliPathological,
    SparseClick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureStyle {
    /// Five distinct uniformly chosen coordinates, each `N(0,1)`; rest zero.
    Sparse5,
    /// All `d` coordinates `N(0,1)`.
    DenseGaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub model: GenModel,
    pub d: usize,
    pub feature_style: FeatureStyle,
    pub seed: u64,
    /// Ones per row for [`GenModel::SparseClick`]; ignored otherwise.
    pub nnz_per_row: usize,
    /// Testing hook: force `ε = 0` in the regression models.
    pub zero_noise: bool,
}

impl GenSpec {
    pub fn new(model: GenModel, d: usize, feature_style: FeatureStyle, seed: u64) -> Result<Self> {
        let spec = Self {
            model,
            d,
            feature_style,
            seed,
            nnz_per_row: SPARSE_NNZ,
            zero_noise: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        match self.model {
            GenModel::BernoulliPathological if self.d != 1 => {
                Err(Error::invalid("bernoulli source is one-dimensional"))
            }
            GenModel::SparseClick if self.nnz_per_row == 0 || self.nnz_per_row > self.d => {
                Err(Error::invalid(format!(
                    "nnz_per_row {} not in 1..={}",
                    self.nnz_per_row, self.d
                )))
            }
            GenModel::Normal | GenModel::Cubic | GenModel::Heteroskedastic
                if self.feature_style == FeatureStyle::Sparse5 && self.d < SPARSE_NNZ =>
            {
                Err(Error::invalid(format!(
                    "sparse5 features need d >= 5, got {}",
                    self.d
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn is_regression(&self) -> bool {
        matches!(
            self.model,
            GenModel::Normal | GenModel::Cubic | GenModel::Heteroskedastic
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruthSource {
    ClosedForm,
    OracleFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthRecord {
    pub u: ParamVector,
    /// Cubic coefficients; present only for [`GenModel::Cubic`].
    pub v: Option<ParamVector>,
    /// `None` until resolved when `source` is `OracleFit`.
    pub theta_star: Option<ParamVector>,
    pub source: TruthSource,
}

impl TruthRecord {
    pub fn theta_star(&self) -> Result<&ParamVector> {
        self.theta_star
            .as_ref()
            .ok_or_else(|| Error::invalid("population minimizer not resolved yet"))
    }
}

fn uniform_vec(rng: &mut StreamRng, d: usize) -> ParamVector {
    ParamVector::new((0..d).map(|_| rng.random::<f64>()).collect()).unwrap()
}

pub fn draw_truth(spec: &GenSpec) -> Result<TruthRecord> {
    spec.validate()?;
    let mut rng = rng_from_seed(tagged_seed(spec.seed, "truth"));
    let d = spec.d;
    let rec = match spec.model {
        GenModel::Normal => {
            let u = uniform_vec(&mut rng, d);
            TruthRecord {
                theta_star: Some(u.clone()),
                u,
                v: None,
                source: TruthSource::ClosedForm,
            }
        }
        GenModel::Cubic => {
            let u = uniform_vec(&mut rng, d);
            let v = uniform_vec(&mut rng, d);
            // E[x x³] = 3 only for the dense standard-normal design
            let (theta_star, source) = match spec.feature_style {
                FeatureStyle::DenseGaussian => {
                    let t = u.iter().zip(v.iter()).map(|(a, b)| a + 3.0 * b).collect();
                    (Some(ParamVector::new(t)?), TruthSource::ClosedForm)
                }
                FeatureStyle::Sparse5 => (None, TruthSource::OracleFit),
            };
            TruthRecord {
                u,
                v: Some(v),
                theta_star,
                source,
            }
        }
        GenModel::Heteroskedastic => TruthRecord {
            u: uniform_vec(&mut rng, d),
            v: None,
            theta_star: None,
            source: TruthSource::OracleFit,
        },
        GenModel::BernoulliPathological => TruthRecord {
            u: ParamVector::zeros(1),
            v: None,
            theta_star: Some(ParamVector::zeros(1)),
            source: TruthSource::ClosedForm,
        },
        GenModel::SparseClick => {
            // θ* = 2u − 1, entries uniform in [−1, 1]
            let u = uniform_vec(&mut rng, d);
            let t = u.iter().map(|x| 2.0 * x - 1.0).collect();
            TruthRecord {
                u,
                v: None,
                theta_star: Some(ParamVector::new(t)?),
                source: TruthSource::ClosedForm,
            }
        }
    };
    Ok(rec)
}

fn check_truth(spec: &GenSpec, truth: &TruthRecord) -> Result<()> {
    if truth.u.len() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            actual: truth.u.len(),
        });
    }
    if spec.model == GenModel::Cubic && truth.v.is_none() {
        return Err(Error::invalid("cubic model needs v in the truth record"));
    }
    if spec.model == GenModel::SparseClick && truth.theta_star.is_none() {
        return Err(Error::invalid(
            "click model needs theta_star in the truth record",
        ));
    }
    Ok(())
}

fn regression_features(spec: &GenSpec, rng: &mut StreamRng) -> Features {
    match spec.feature_style {
        FeatureStyle::DenseGaussian => {
            let x: Vec<f64> = (0..spec.d).map(|_| rng.sample(StandardNormal)).collect();
            if spec.d <= crate::dataset::DENSIFY_LIMIT {
                Features::Dense(x)
            } else {
                let pairs: Vec<(u32, f64)> = x
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| (i as u32, v))
                    .collect();
                Features::from_pairs(spec.d, &pairs).unwrap()
            }
        }
        FeatureStyle::Sparse5 => {
            let idx = index::sample(rng, spec.d, SPARSE_NNZ);
            let pairs: Vec<(u32, f64)> = idx
                .iter()
                .map(|i| (i as u32, rng.sample::<f64, _>(StandardNormal)))
                .collect();
            Features::from_pairs(spec.d, &pairs).unwrap()
        }
    }
}

fn draw_sample(spec: &GenSpec, truth: &TruthRecord, rng: &mut StreamRng) -> Sample {
    match spec.model {
        GenModel::BernoulliPathological => {
            let x = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
            Sample::dense(vec![x], 0.0)
        }
        GenModel::SparseClick => {
            let idx = index::sample(rng, spec.d, spec.nnz_per_row);
            let pairs: Vec<(u32, f64)> = idx.iter().map(|i| (i as u32, 1.0)).collect();
            let features = Features::from_pairs(spec.d, &pairs).unwrap();
            let theta = truth.theta_star.as_ref().unwrap();
            let p = sigmoid_neg(-features.dot(theta));
            let target = if rng.random::<f64>() < p { 1.0 } else { -1.0 };
            Sample { features, target }
        }
        _ => {
            let features = regression_features(spec, rng);
            let eps: f64 = if spec.zero_noise {
                0.0
            } else {
                rng.sample(StandardNormal)
            };
            let mut y = features.dot(&truth.u);
            match spec.model {
                GenModel::Normal => y += eps,
                GenModel::Cubic => {
                    let v = truth.v.as_ref().unwrap();
                    features.for_each_nonzero(|j, x| y += v[j] * x * x * x);
                    y += eps;
                }
                GenModel::Heteroskedastic => {
                    let mut h = 0.0;
                    features.for_each_nonzero(|_, x| {
                        let half = x / 2.0;
                        h += half * half * half;
                    });
                    y += h * eps.abs();
                }
                _ => unreachable!(),
            }
            Sample {
                features,
                target: y,
            }
        }
    }
}

/// Samples `start..start + len` of the dataset defined by `(spec, truth)`.
pub fn gen_range(spec: &GenSpec, truth: &TruthRecord, start: u64, len: usize) -> Result<Dataset> {
    spec.validate()?;
    check_truth(spec, truth)?;
    let family = StreamFamily::new(tagged_seed(spec.seed, "data"));
    let samples = (0..len as u64)
        .map(|k| draw_sample(spec, truth, &mut family.stream(start + k)))
        .collect();
    Dataset::new(spec.d, samples)
}

pub fn gen_dataset(spec: &GenSpec, truth: &TruthRecord, count: usize) -> Result<Dataset> {
    if count == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    gen_range(spec, truth, 0, count)
}

/// Resolves `θ*` for truth records that need an oracle fit: least squares
/// on `oversample · base_count` fresh samples, independent of the data stream.
pub fn resolve_theta_star(
    spec: &GenSpec,
    truth: &mut TruthRecord,
    base_count: usize,
    oversample: usize,
) -> Result<ParamVector> {
    resolve_theta_star_seeded(
        spec,
        truth,
        base_count,
        oversample,
        tagged_seed(spec.seed, "oracle"),
    )
}

pub fn resolve_theta_star_seeded(
    spec: &GenSpec,
    truth: &mut TruthRecord,
    base_count: usize,
    oversample: usize,
    oracle_seed: u64,
) -> Result<ParamVector> {
    if let Some(t) = &truth.theta_star {
        return Ok(t.clone());
    }
    if !spec.is_regression() {
        return Err(Error::invalid(
            "oracle fit is defined for regression models only",
        ));
    }
    check_truth(spec, truth)?;
    let total = base_count
        .checked_mul(oversample)
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::invalid("oracle sample count must be positive"))?;
    let family = StreamFamily::new(oracle_seed);
    let mut acc = NormalEquations::new(spec.d);
    for k in 0..total as u64 {
        acc.add(&draw_sample(spec, truth, &mut family.stream(k)));
    }
    let theta = acc.solve(0.0)?;
    truth.theta_star = Some(theta.clone());
    Ok(theta)
}

/// Sparse binary logistic data: each row has exactly `nnz_per_row` ones and
/// `P(y = +1 | x) = σ(⟨θ*, x⟩)` with `θ*` uniform in `[−1, 1]^d`.
pub fn gen_click_dataset(
    d: usize,
    nnz_per_row: usize,
    count: usize,
    seed: u64,
) -> Result<(Dataset, TruthRecord)> {
    let spec = click_spec(d, nnz_per_row, seed)?;
    let truth = draw_truth(&spec)?;
    let data = gen_dataset(&spec, &truth, count)?;
    Ok((data, truth))
}

pub fn click_spec(d: usize, nnz_per_row: usize, seed: u64) -> Result<GenSpec> {
    let spec = GenSpec {
        model: GenModel::SparseClick,
        d,
        feature_style: FeatureStyle::Sparse5,
        seed,
        nnz_per_row,
        zero_noise: false,
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(model: GenModel, d: usize, style: FeatureStyle) -> GenSpec {
        GenSpec::new(model, d, style, 11).unwrap()
    }

    #[test]
    fn truth_sources() {
        let t = draw_truth(&spec(GenModel::Normal, 20, FeatureStyle::Sparse5)).unwrap();
        assert_eq!(t.source, TruthSource::ClosedForm);
        assert_eq!(t.theta_star.as_ref().unwrap(), &t.u);
        assert!(t.u.iter().all(|x| (0.0..=1.0).contains(x)));

        let t = draw_truth(&spec(GenModel::Cubic, 8, FeatureStyle::DenseGaussian)).unwrap();
        let v = t.v.as_ref().unwrap();
        for j in 0..8 {
            assert_eq!(t.theta_star.as_ref().unwrap()[j], t.u[j] + 3.0 * v[j]);
        }
        let t = draw_truth(&spec(GenModel::Cubic, 8, FeatureStyle::Sparse5)).unwrap();
        assert_eq!(t.source, TruthSource::OracleFit);

        let t = draw_truth(&spec(GenModel::Heteroskedastic, 20, FeatureStyle::Sparse5)).unwrap();
        assert_eq!(t.source, TruthSource::OracleFit);
        assert!(t.theta_star.is_none());
    }

    #[test]
    fn spec_validation() {
        assert!(GenSpec::new(GenModel::Normal, 4, FeatureStyle::Sparse5, 0).is_err());
        assert!(GenSpec::new(GenModel::Normal, 4, FeatureStyle::DenseGaussian, 0).is_ok());
        assert!(
            GenSpec::new(GenModel::BernoulliPathological, 2, FeatureStyle::Sparse5, 0).is_err()
        );
        assert!(click_spec(3, 4, 0).is_err());
    }

    #[test]
    fn zero_count_rejected() {
        let s = spec(GenModel::Normal, 5, FeatureStyle::Sparse5);
        let t = draw_truth(&s).unwrap();
        assert!(gen_dataset(&s, &t, 0).is_err());
    }

    #[test]
    fn ranges_agree_with_full_generation() {
        let s = spec(GenModel::Heteroskedastic, 10, FeatureStyle::Sparse5);
        let t = draw_truth(&s).unwrap();
        let all = gen_dataset(&s, &t, 50).unwrap();
        let part = gen_range(&s, &t, 20, 10).unwrap();
        assert_eq!(part, all.slice(20..30));
    }

    #[test]
    fn closed_form_truth_is_returned_unchanged() {
        let s = spec(GenModel::Normal, 6, FeatureStyle::Sparse5);
        let mut t = draw_truth(&s).unwrap();
        let before = t.theta_star.clone().unwrap();
        assert_eq!(resolve_theta_star(&s, &mut t, 100, 10).unwrap(), before);
    }

    #[test]
    fn click_rows_have_fixed_support() {
        let (data, truth) = gen_click_dataset(50, 7, 300, 3).unwrap();
        assert!(truth
            .theta_star
            .as_ref()
            .unwrap()
            .iter()
            .all(|x| (-1.0..=1.0).contains(x)));
        for s in &data {
            assert_eq!(s.features.to_dense().iter().sum::<f64>(), 7.0);
            assert!(s.features.to_dense().iter().all(|&x| x == 0.0 || x == 1.0));
            assert!(s.target == 1.0 || s.target == -1.0);
        }
        let (again, _) = gen_click_dataset(50, 7, 300, 3).unwrap();
        assert_eq!(data, again);
    }
}
