//! Mean-variance weights in closed form.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Fully invested weights with their in-sample risk and return.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortfolioWeights {
    pub weights: Vec<f64>,
    /// `w' S w` with the unregularized covariance.
    pub risk: f64,
    /// `R' w`, per period.
    pub expected_return: f64,
    /// Ridge added to the covariance diagonal; zero when none was needed.
    pub ridge: f64,
    /// Lagrange multiplier of the budget constraint.
    pub lambda: f64,
}

/// Sample covariance (divisor `n - 1`) and mean of scenario rows.
pub fn sample_moments(scenarios: &[Vec<f64>]) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = scenarios.len();
    let m = scenarios.first().map_or(0, Vec::len);
    if n < 2 || m == 0 {
        return Err(Error::Size(format!("moments need at least 2 periods of at least 1 asset, got {n}x{m}")));
    }
    let mut mean = DVector::zeros(m);
    for row in scenarios {
        if row.len() != m {
            return Err(Error::Usage("ragged scenario rows".into()));
        }
        mean += DVector::from_column_slice(row);
    }
    mean /= n as f64;
    let mut cov = DMatrix::zeros(m, m);
    for row in scenarios {
        let d = DVector::from_column_slice(row) - &mean;
        cov.ger(1.0, &d, &d, 1.0);
    }
    Ok((cov / (n - 1) as f64, mean))
}

/// Minimizes `w' S w - q R' w` subject to `sum w = 1`, shorting allowed.
///
/// Stationarity gives `w = S^-1 (q R + lambda 1) / 2` with `lambda` fixed by
/// the budget. A covariance that is not positive definite is replaced by
/// `S + eps I`, `eps = 1e-10 trace(S) / N`, and `eps` is reported.
pub fn mv_optimize(cov: &DMatrix<f64>, mean: &DVector<f64>, q: f64) -> Result<PortfolioWeights> {
    let n = mean.len();
    if n == 0 || cov.nrows() != n || cov.ncols() != n {
        return Err(Error::Usage(format!("covariance {}x{} does not match {n} means", cov.nrows(), cov.ncols())));
    }
    if !(q.is_finite() && q >= 0.0) {
        return Err(Error::Usage(format!("risk tolerance must be finite and non-negative, got {q}")));
    }
    if cov.iter().chain(mean.iter()).any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite covariance or mean".into()));
    }
    let scale = cov.amax().max(f64::MIN_POSITIVE);
    if (cov - cov.transpose()).amax() > 1e-12 * scale {
        return Err(Error::Usage("covariance is not symmetric".into()));
    }

    let mut ridge = 0.0;
    let chol = match cov.clone().cholesky() {
        Some(c) => c,
        None => {
            ridge = 1e-10 * cov.trace() / n as f64;
            if ridge <= 0.0 {
                return Err(Error::Numerical("covariance has zero trace; no ridge can regularize it".into()));
            }
            let shifted = cov + DMatrix::identity(n, n) * ridge;
            shifted.cholesky().ok_or_else(|| {
                Error::Numerical(format!("covariance is not positive semi-definite (ridge {ridge:e} insufficient)"))
            })?
        }
    };
    let ones = DVector::from_element(n, 1.0);
    let inv_ones = chol.solve(&ones);
    let inv_mean = chol.solve(mean);
    let denom = ones.dot(&inv_ones);
    let lambda = (2.0 - q * ones.dot(&inv_mean)) / denom;
    let w = (inv_mean * q + inv_ones * lambda) / 2.0;
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("mean-variance solution is not finite".into()));
    }
    Ok(PortfolioWeights {
        risk: (cov * &w).dot(&w),
        expected_return: mean.dot(&w),
        weights: w.iter().copied().collect(),
        ridge,
        lambda,
    })
}
