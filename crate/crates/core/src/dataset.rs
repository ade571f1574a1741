//! Samples, feature vectors, datasets and the sparse text format.
//!
//! Text format: one sample per line, `target idx:val idx:val ...`, with
//! zero-based feature indices. Blank lines and lines starting with `#` are
//! skipped.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::ops::Deref;

use crate::error::{check_dim, Error, Result};

/// Above this dimension sparse inputs stay sparse; at or below it they are
/// densified.
pub const DENSIFY_LIMIT: usize = 4096;

/// Model parameters. Entries are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(i) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "parameter coordinate {i} is not finite ({})",
                coords[i]
            )));
        }
        Ok(Self(coords))
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.0)
    }

    /// Squared Euclidean distance to `other`.
    pub fn dist2(&self, other: &ParamVector) -> Result<f64> {
        check_dim(self.len(), other.len())?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum())
    }
}

impl Deref for ParamVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for ParamVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ParamVector::new(v)
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Features {
    Dense(Vec<f64>),
    /// Strictly increasing indices below `dim`.
    Sparse {
        dim: usize,
        idx: Vec<u32>,
        val: Vec<f64>,
    },
}

impl Features {
    /// Builds a feature vector from (index, value) pairs, densifying when
    /// `dim <= DENSIFY_LIMIT`. Pairs may come in any order; duplicates and
    /// out-of-range indices are rejected.
    pub fn from_pairs(dim: usize, pairs: &[(u32, f64)]) -> Result<Self> {
        let mut pairs = pairs.to_vec();
        pairs.sort_by_key(|p| p.0);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidSample(format!("duplicate index {}", w[0].0)));
            }
        }
        if let Some(&(i, _)) = pairs.last() {
            if i as usize >= dim {
                return Err(Error::InvalidSample(format!(
                    "index {i} out of range for dimension {dim}"
                )));
            }
        }
        if let Some(&(i, v)) = pairs.iter().find(|p| !p.1.is_finite()) {
            return Err(Error::InvalidSample(format!(
                "non-finite value {v} at index {i}"
            )));
        }
        if dim <= DENSIFY_LIMIT {
            let mut dense = vec![0.0; dim];
            for &(i, v) in &pairs {
                dense[i as usize] = v;
            }
            Ok(Features::Dense(dense))
        } else {
            let (idx, val) = pairs.into_iter().unzip();
            Ok(Features::Sparse { dim, idx, val })
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Features::Dense(v) => v.len(),
            Features::Sparse { dim, .. } => *dim,
        }
    }

    pub fn dot(&self, theta: &[f64]) -> f64 {
        match self {
            Features::Dense(v) => dot(v, theta),
            Features::Sparse { idx, val, .. } => idx
                .iter()
                .zip(val)
                .map(|(&i, &v)| v * theta[i as usize])
                .sum(),
        }
    }

    /// Calls `f(index, value)` for every nonzero coordinate in increasing
    /// index order.
    #[inline]
    pub fn for_each_nonzero(&self, mut f: impl FnMut(usize, f64)) {
        match self {
            Features::Dense(v) => {
                for (i, &x) in v.iter().enumerate() {
                    if x != 0.0 {
                        f(i, x);
                    }
                }
            }
            Features::Sparse { idx, val, .. } => {
                for (&i, &x) in idx.iter().zip(val) {
                    f(i as usize, x);
                }
            }
        }
    }

    /// `out += scale * x`
    #[inline]
    pub fn axpy(&self, scale: f64, out: &mut [f64]) {
        match self {
            Features::Dense(v) => {
                for (o, &x) in out.iter_mut().zip(v) {
                    *o += scale * x;
                }
            }
            Features::Sparse { idx, val, .. } => {
                for (&i, &x) in idx.iter().zip(val) {
                    out[i as usize] += scale * x;
                }
            }
        }
    }

    pub fn nonzeros(&self) -> Vec<(u32, f64)> {
        let mut out = Vec::new();
        self.for_each_nonzero(|i, v| out.push((i as u32, v)));
        out
    }

    pub fn nnz(&self) -> usize {
        let mut n = 0;
        self.for_each_nonzero(|_, _| n += 1);
        n
    }

    pub fn get(&self, j: usize) -> f64 {
        match self {
            Features::Dense(v) => v[j],
            Features::Sparse { idx, val, .. } => match idx.binary_search(&(j as u32)) {
                Ok(p) => val[p],
                Err(_) => 0.0,
            },
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            Features::Dense(v) => v.clone(),
            Features::Sparse { dim, .. } => {
                let mut out = vec![0.0; *dim];
                self.axpy(1.0, &mut out);
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Features,
    pub target: f64,
}

impl Sample {
    pub fn dense(features: Vec<f64>, target: f64) -> Self {
        Self {
            features: Features::Dense(features),
            target,
        }
    }
}

/// Ordered samples sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(dim: usize, samples: Vec<Sample>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dataset dimension must be positive"));
        }
        for s in &samples {
            check_dim(dim, s.features.dim())?;
            if !s.target.is_finite() {
                return Err(Error::InvalidSample(format!(
                    "non-finite target {}",
                    s.target
                )));
            }
        }
        Ok(Self { dim, samples })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            samples: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sample> {
        self.samples.iter()
    }

    /// New dataset holding the samples at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            dim: self.dim,
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
        }
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Dataset {
        Dataset {
            dim: self.dim,
            samples: self.samples[range].to_vec(),
        }
    }

    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        check_dim(self.dim, other.dim)?;
        let mut samples = self.samples.clone();
        samples.extend_from_slice(&other.samples);
        Ok(Dataset {
            dim: self.dim,
            samples,
        })
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let mut line = String::new();
        for s in &self.samples {
            line.clear();
            write!(line, "{}", s.target).unwrap();
            s.features.for_each_nonzero(|i, v| {
                write!(line, " {i}:{v}").unwrap();
            });
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    /// Reads the sparse text format. When `dim` is `None` the dimension is
    /// one past the largest index seen.
    pub fn read_text<R: BufRead>(r: R, dim: Option<usize>) -> Result<Dataset> {
        let mut rows: Vec<(f64, Vec<(u32, f64)>)> = Vec::new();
        let mut max_idx: Option<u32> = None;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| Error::Parse {
                line: lineno + 1,
                message,
            };
            let mut parts = line.split_whitespace();
            let target: f64 = parts
                .next()
                .unwrap()
                .parse()
                .map_err(|e| bad(format!("bad target: {e}")))?;
            let mut pairs = Vec::new();
            for tok in parts {
                let (i, v) = tok
                    .split_once(':')
                    .ok_or_else(|| bad(format!("expected idx:val, got {tok:?}")))?;
                let i: u32 = i
                    .parse()
                    .map_err(|e| bad(format!("bad index {i:?}: {e}")))?;
                let v: f64 = v
                    .parse()
                    .map_err(|e| bad(format!("bad value {v:?}: {e}")))?;
                max_idx = Some(max_idx.map_or(i, |m| m.max(i)));
                pairs.push((i, v));
            }
            rows.push((target, pairs));
        }
        let dim = match dim {
            Some(d) => d,
            None => max_idx.map_or(1, |m| m as usize + 1),
        };
        let mut samples = Vec::with_capacity(rows.len());
        for (target, pairs) in rows {
            samples.push(Sample {
                features: Features::from_pairs(dim, &pairs)?,
                target,
            });
        }
        Dataset::new(dim, samples)
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a Sample;
    type IntoIter = std::slice::Iter<'a, Sample>;
    fn into_iter(self) -> Self::IntoIter {
        self.samples.iter()
    }
}
