//! Small dense and matrix-free linear solves.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Diagonal jitter retried when a Cholesky factorization fails.
pub const CHOLESKY_JITTER: f64 = 1e-12;

/// Solves `a x = b` for symmetric positive definite `a`. Returns `None`
/// when the factorization fails or a pivot is negligible relative to the
/// largest one.
pub fn cholesky_solve_strict(a: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let chol = a.clone().cholesky()?;
    let l = chol.l_dirty();
    let diag = l.diagonal();
    let max = diag.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let min = diag.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    // pivots of L are square roots of the Gram pivots
    if !(min > 0.0) || (min / max).powi(2) < 1e-14 {
        return None;
    }
    let x = chol.solve(&DVector::from_column_slice(b));
    x.iter()
        .all(|v| v.is_finite())
        .then(|| x.as_slice().to_vec())
}

/// [`cholesky_solve_strict`], retried once with `CHOLESKY_JITTER · I` added
/// to the diagonal.
pub fn cholesky_solve(a: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    cholesky_solve_strict(a, b).or_else(|| {
        let n = a.nrows();
        cholesky_solve_strict(&(a + DMatrix::identity(n, n) * CHOLESKY_JITTER), b)
    })
}

fn eigen_tolerance(eig: &SymmetricEigen<f64, nalgebra::Dyn>) -> f64 {
    let max = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    max * eig.eigenvalues.len() as f64 * 1e-12
}

/// Numerical rank of a symmetric matrix.
pub fn symmetric_rank(a: &DMatrix<f64>) -> usize {
    let eig = a.clone().symmetric_eigen();
    let tol = eigen_tolerance(&eig);
    eig.eigenvalues.iter().filter(|v| **v > tol).count()
}

/// Minimum-norm solution of `a x = b` for symmetric positive semidefinite
/// `a` (pseudo-inverse over the numerically nonzero spectrum).
pub fn min_norm_solve(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let eig = a.clone().symmetric_eigen();
    let tol = eigen_tolerance(&eig);
    let rhs = DVector::from_column_slice(b);
    let mut x = DVector::zeros(b.len());
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > tol {
            let v = eig.eigenvectors.column(k);
            x += v * (v.dot(&rhs) / lam);
        }
    }
    x.as_slice().to_vec()
}

pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Conjugate gradient for `A x = b` with `A` given as a matvec. Stops when
/// `‖r‖ ≤ tol · ‖b‖`.
pub fn conjugate_gradient(
    matvec: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> CgOutcome {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    let target = tol * rr.sqrt();
    if rr.sqrt() <= target || rr == 0.0 {
        return CgOutcome {
            x,
            iterations: 0,
            converged: true,
        };
    }
    for it in 1..=max_iter {
        let ap = matvec(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            return CgOutcome {
                x,
                iterations: it,
                converged: false,
            };
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        if rr_new.sqrt() <= target {
            return CgOutcome {
                x,
                iterations: it,
                converged: true,
            };
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    CgOutcome {
        x,
        iterations: max_iter,
        converged: false,
    }
}
