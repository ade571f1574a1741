//! Loss families: least squares, ridge-regularized logistic regression, and a
//! one-dimensional piecewise-quadratic loss whose Hessian jumps at zero.

use nalgebra::DMatrix;

use crate::dataset::{dot, Dataset, ParamVector, Sample};
use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossKind {
    /// `½(⟨θ,x⟩ − y)²`
    LeastSquares,
    /// `log(1 + exp(−y⟨θ,x⟩)) + (λ/2)‖θ‖²`, labels in {−1, +1}.
    RidgeLogistic { lambda: f64 },
    /// With `x ∈ {0,1}`: `θ² − θ` when `x = 0`, `θ²·1{θ≤0} + θ` when `x = 1`.
    /// Strongly convex and smooth in value, discontinuous second derivative.
    Pathological,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossModel {
    kind: LossKind,
    dim: usize,
}

/// `log(1 + exp(−z))` without overflow.
#[inline]
pub(crate) fn log1p_exp_neg(z: f64) -> f64 {
    (-z).max(0.0) + (-z.abs()).exp().ln_1p()
}

/// `1 / (1 + exp(z))`, i.e. σ(−z).
#[inline]
pub(crate) fn sigmoid_neg(z: f64) -> f64 {
    if z >= 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

impl LossModel {
    pub fn new(kind: LossKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("model dimension must be positive"));
        }
        match kind {
            LossKind::RidgeLogistic { lambda } if !(lambda >= 0.0 && lambda.is_finite()) => {
                return Err(Error::invalid(format!(
                    "ridge lambda must be >= 0, got {lambda}"
                )));
            }
            LossKind::Pathological if dim != 1 => {
                return Err(Error::invalid("pathological loss is one-dimensional"));
            }
            _ => {}
        }
        Ok(Self { kind, dim })
    }

    pub fn least_squares(dim: usize) -> Self {
        Self::new(LossKind::LeastSquares, dim).expect("positive dimension")
    }

    pub fn ridge_logistic(dim: usize, lambda: f64) -> Result<Self> {
        Self::new(LossKind::RidgeLogistic { lambda }, dim)
    }

    pub fn pathological() -> Self {
        Self {
            kind: LossKind::Pathological,
            dim: 1,
        }
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Ridge weight added to every per-sample Hessian.
    pub fn ridge(&self) -> f64 {
        match self.kind {
            LossKind::RidgeLogistic { lambda } => lambda,
            _ => 0.0,
        }
    }

    pub fn check_sample(&self, s: &Sample) -> Result<()> {
        check_dim(self.dim, s.features.dim())?;
        match self.kind {
            LossKind::LeastSquares => {}
            LossKind::RidgeLogistic { .. } => {
                if s.target != 1.0 && s.target != -1.0 {
                    return Err(Error::InvalidSample(format!(
                        "logistic target must be +1 or -1, got {}",
                        s.target
                    )));
                }
            }
            LossKind::Pathological => {
                let x = s.features.get(0);
                if x != 0.0 && x != 1.0 {
                    return Err(Error::InvalidSample(format!(
                        "pathological feature must be 0 or 1, got {x}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn check_dataset(&self, data: &Dataset) -> Result<()> {
        check_dim(self.dim, data.dim())?;
        data.iter().try_for_each(|s| self.check_sample(s))
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        check_dim(self.dim, theta.len())
    }

    // Unchecked per-sample kernels. Callers validate dimensions and targets.

    #[inline]
    pub(crate) fn value_raw(&self, theta: &[f64], s: &Sample) -> f64 {
        match self.kind {
            LossKind::LeastSquares => {
                let r = s.features.dot(theta) - s.target;
                0.5 * r * r
            }
            LossKind::RidgeLogistic { lambda } => {
                let z = s.target * s.features.dot(theta);
                log1p_exp_neg(z) + 0.5 * lambda * dot(theta, theta)
            }
            LossKind::Pathological => {
                let t = theta[0];
                if s.features.get(0) == 0.0 {
                    t * t - t
                } else if t <= 0.0 {
                    t * t + t
                } else {
                    t
                }
            }
        }
    }

    /// `out += scale · ∇f(θ; s)`
    #[inline]
    pub(crate) fn add_gradient_raw(&self, theta: &[f64], s: &Sample, scale: f64, out: &mut [f64]) {
        match self.kind {
            LossKind::LeastSquares => {
                let r = s.features.dot(theta) - s.target;
                s.features.axpy(scale * r, out);
            }
            LossKind::RidgeLogistic { lambda } => {
                let z = s.target * s.features.dot(theta);
                s.features.axpy(-scale * s.target * sigmoid_neg(z), out);
                if lambda != 0.0 {
                    for (o, t) in out.iter_mut().zip(theta) {
                        *o += scale * lambda * t;
                    }
                }
            }
            LossKind::Pathological => {
                let t = theta[0];
                let g = if s.features.get(0) == 0.0 {
                    2.0 * t - 1.0
                } else if t <= 0.0 {
                    2.0 * t + 1.0
                } else {
                    // right derivative at the kink
                    1.0
                };
                out[0] += scale * g;
            }
        }
    }

    /// Scalar `w` with `∇²f(θ; s) = w·x xᵀ + ridge·I` for the linear-model
    /// kinds. For the pathological loss it is the 1×1 Hessian itself.
    #[inline]
    pub(crate) fn curvature_raw(&self, theta: &[f64], s: &Sample) -> f64 {
        match self.kind {
            LossKind::LeastSquares => 1.0,
            LossKind::RidgeLogistic { .. } => {
                let z = s.features.dot(theta);
                let p = sigmoid_neg(-z);
                p * (1.0 - p)
            }
            LossKind::Pathological => {
                if s.features.get(0) == 0.0 || theta[0] <= 0.0 {
                    2.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn loss_value(&self, theta: &ParamVector, s: &Sample) -> Result<f64> {
        self.check_theta(theta)?;
        self.check_sample(s)?;
        Ok(self.value_raw(theta, s))
    }

    pub fn loss_gradient(&self, theta: &ParamVector, s: &Sample) -> Result<ParamVector> {
        self.check_theta(theta)?;
        self.check_sample(s)?;
        let mut g = vec![0.0; self.dim];
        self.add_gradient_raw(theta, s, 1.0, &mut g);
        ParamVector::new(g)
    }

    pub fn loss_hessian(&self, theta: &ParamVector, s: &Sample) -> Result<DMatrix<f64>> {
        self.check_theta(theta)?;
        self.check_sample(s)?;
        let mut h = DMatrix::zeros(self.dim, self.dim);
        self.add_hessian_raw(theta, s, 1.0, &mut h);
        for i in 0..self.dim {
            h[(i, i)] += self.ridge();
        }
        Ok(h)
    }

    /// `h += scale · (∇²f(θ; s) − ridge·I)`
    fn add_hessian_raw(&self, theta: &[f64], s: &Sample, scale: f64, h: &mut DMatrix<f64>) {
        let w = scale * self.curvature_raw(theta, s);
        if w == 0.0 {
            return;
        }
        if self.kind == LossKind::Pathological {
            h[(0, 0)] += w;
            return;
        }
        s.features.for_each_nonzero(|i, xi| {
            s.features.for_each_nonzero(|j, xj| {
                h[(i, j)] += w * (xi * xj);
            });
        });
    }

    pub fn empirical_risk(&self, theta: &ParamVector, data: &Dataset) -> Result<f64> {
        self.check_theta(theta)?;
        self.check_nonempty(data)?;
        self.check_dataset(data)?;
        Ok(self.risk_raw(theta, data))
    }

    pub fn empirical_gradient(&self, theta: &ParamVector, data: &Dataset) -> Result<ParamVector> {
        self.check_theta(theta)?;
        self.check_nonempty(data)?;
        self.check_dataset(data)?;
        ParamVector::new(self.risk_gradient_raw(theta, data))
    }

    pub fn empirical_hessian(&self, theta: &ParamVector, data: &Dataset) -> Result<DMatrix<f64>> {
        self.check_theta(theta)?;
        self.check_nonempty(data)?;
        self.check_dataset(data)?;
        Ok(self.risk_hessian_raw(theta, data))
    }

    fn check_nonempty(&self, data: &Dataset) -> Result<()> {
        if data.is_empty() {
            return Err(Error::invalid("empirical risk of an empty dataset"));
        }
        Ok(())
    }

    pub(crate) fn risk_raw(&self, theta: &[f64], data: &Dataset) -> f64 {
        match self.kind {
            // hoist the ridge term out of the per-sample sum
            LossKind::RidgeLogistic { lambda } => {
                let sum: f64 = data
                    .iter()
                    .map(|s| log1p_exp_neg(s.target * s.features.dot(theta)))
                    .sum();
                sum / data.len() as f64 + 0.5 * lambda * dot(theta, theta)
            }
            _ => data.iter().map(|s| self.value_raw(theta, s)).sum::<f64>() / data.len() as f64,
        }
    }

    pub(crate) fn risk_gradient_raw(&self, theta: &[f64], data: &Dataset) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        let inv_n = 1.0 / data.len() as f64;
        match self.kind {
            LossKind::RidgeLogistic { lambda } => {
                for s in data {
                    let z = s.target * s.features.dot(theta);
                    s.features.axpy(-inv_n * s.target * sigmoid_neg(z), &mut g);
                }
                for (o, t) in g.iter_mut().zip(theta) {
                    *o += lambda * t;
                }
            }
            _ => {
                for s in data {
                    self.add_gradient_raw(theta, s, inv_n, &mut g);
                }
            }
        }
        g
    }

    pub(crate) fn risk_hessian_raw(&self, theta: &[f64], data: &Dataset) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        let inv_n = 1.0 / data.len() as f64;
        for s in data {
            self.add_hessian_raw(theta, s, inv_n, &mut h);
        }
        for i in 0..self.dim {
            h[(i, i)] += self.ridge();
        }
        h
    }

    /// Empirical Hessian-vector product without forming the matrix.
    pub(crate) fn risk_hessian_vec_raw(
        &self,
        theta: &[f64],
        data: &Dataset,
        v: &[f64],
    ) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let inv_n = 1.0 / data.len() as f64;
        for s in data {
            let w = self.curvature_raw(theta, s);
            if w == 0.0 {
                continue;
            }
            if self.kind == LossKind::Pathological {
                out[0] += inv_n * w * v[0];
            } else {
                s.features.axpy(inv_n * w * s.features.dot(v), &mut out);
            }
        }
        let ridge = self.ridge();
        for (o, x) in out.iter_mut().zip(v) {
            *o += ridge * x;
        }
        out
    }
}
