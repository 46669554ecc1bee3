use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Dataset, LinearModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OlsConfig {
    /// Fall back to normal equations with a 1e−10 ridge when the design is
    /// rank deficient instead of failing.
    #[serde(default)]
    pub ridge_jitter: bool,
}

const RIDGE: f64 = 1e-10;

/// Least-squares solution of `x b ≈ y` via Householder QR. Rank deficiency
/// is detected from the diagonal of R.
pub fn solve_least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let (n, k) = x.shape();
    if n < k {
        return Err(Error::InsufficientData {
            what: "least-squares rows".into(),
            needed: k,
            got: n,
        });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let diag_max = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let tol = diag_max * f64::EPSILON * n.max(k) as f64;
    if diag_max == 0.0 || (0..k).any(|i| r[(i, i)].abs() <= tol) {
        return Err(Error::Singular(format!(
            "design matrix ({n} x {k}) is rank deficient"
        )));
    }
    let qty = qr.q().transpose() * y;
    r.solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))
}

fn solve_ridge(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let k = x.ncols();
    let xtx = x.transpose() * x + DMatrix::identity(k, k) * RIDGE;
    let xty = x.transpose() * y;
    xtx.cholesky()
        .map(|c| c.solve(&xty))
        .ok_or_else(|| Error::Singular("jittered normal equations not positive definite".into()))
}

pub fn fit_ols(data: &Dataset, config: &OlsConfig) -> Result<LinearModel> {
    let n = data.n_rows();
    let p = data.n_features();
    if n <= p {
        return Err(Error::InsufficientData {
            what: "least-squares rows".into(),
            needed: p + 1,
            got: n,
        });
    }
    let x = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { data.value(i, j - 1) });
    let y = DVector::from_column_slice(data.targets());
    let b = match solve_least_squares(&x, &y) {
        Ok(b) => b,
        Err(Error::Singular(msg)) if config.ridge_jitter => {
            log::warn!("{msg}; using jittered normal equations");
            solve_ridge(&x, &y)?
        }
        Err(e) => return Err(e),
    };
    let coefficients: Vec<f64> = b.iter().skip(1).copied().collect();
    Ok(LinearModel {
        intercept: b[0],
        penalized_coefficients: coefficients.clone(),
        coefficients,
        converged: true,
        sweeps: 0,
        objective_trace: Vec::new(),
    })
}
