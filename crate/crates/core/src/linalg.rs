//! Symmetric positive definite solves for the Newton steps.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) enum NewtonMatrix {
    Dense(Mat<f64>),
    /// `diag[k]` on the diagonal, `lower[k]` couples rows `k` and `k + 1`.
    Tridiagonal {
        diag: Vec<f64>,
        lower: Vec<f64>,
    },
}

impl NewtonMatrix {
    pub(crate) fn dense(mat: Mat<f64>) -> Self {
        NewtonMatrix::Dense(mat)
    }

    pub(crate) fn tridiagonal(diag: Vec<f64>, lower: Vec<f64>) -> Self {
        debug_assert_eq!(lower.len() + 1, diag.len().max(1));
        NewtonMatrix::Tridiagonal { diag, lower }
    }

    pub(crate) fn dim(&self) -> usize {
        match self {
            NewtonMatrix::Dense(m) => m.nrows(),
            NewtonMatrix::Tridiagonal { diag, .. } => diag.len(),
        }
    }

    fn max_diag(&self) -> f64 {
        match self {
            NewtonMatrix::Dense(m) => (0..m.nrows()).fold(0.0, |a, k| a.max(m[(k, k)].abs())),
            NewtonMatrix::Tridiagonal { diag, .. } => diag.iter().fold(0.0, |a, v| a.max(v.abs())),
        }
    }

    fn shift(&mut self, mu: f64) {
        match self {
            NewtonMatrix::Dense(m) => {
                for k in 0..m.nrows() {
                    m[(k, k)] += mu;
                }
            }
            NewtonMatrix::Tridiagonal { diag, .. } => diag.iter_mut().for_each(|d| *d += mu),
        }
    }

    /// Solves `M x = rhs`. A tiny diagonal shift is added first; if the
    /// factorization still fails the shift is increased a few times.
    pub(crate) fn solve(mut self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if n == 0 {
            return Ok(Vec::new());
        }
        let scale = self.max_diag().max(f64::MIN_POSITIVE);
        let mut mu = 1e-13 * scale;
        self.shift(mu);
        for _ in 0..6 {
            if let Some(x) = self.try_solve(rhs) {
                return Ok(x);
            }
            self.shift(99.0 * mu);
            mu *= 100.0;
        }
        Err(Error::Domain("Newton matrix is not positive definite".into()))
    }

    fn try_solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        match self {
            NewtonMatrix::Dense(m) => {
                let llt = m.llt(Side::Lower).ok()?;
                let mut b = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
                llt.solve_in_place(&mut b);
                let x: Vec<f64> = (0..rhs.len()).map(|i| b[(i, 0)]).collect();
                x.iter().all(|v| v.is_finite()).then_some(x)
            }
            NewtonMatrix::Tridiagonal { diag, lower } => thomas(diag, lower, rhs),
        }
    }
}

/// Symmetric tridiagonal solve without pivoting; `None` if a pivot is not
/// positive.
fn thomas(diag: &[f64], lower: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut piv = diag[0];
    if !(piv > 0.0) {
        return None;
    }
    x[0] = rhs[0] / piv;
    for k in 1..n {
        c[k - 1] = lower[k - 1] / piv;
        piv = diag[k] - lower[k - 1] * c[k - 1];
        if !(piv > 0.0) {
            return None;
        }
        x[k] = (rhs[k] - lower[k - 1] * x[k - 1]) / piv;
    }
    for k in (0..n - 1).rev() {
        x[k] -= c[k] * x[k + 1];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
