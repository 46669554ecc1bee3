use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::solve_least_squares;

/// Heteroskedasticity-consistent covariance flavour.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceType {
    /// White's sandwich `(XᵀX)⁻¹ Xᵀ diag(e²) X (XᵀX)⁻¹`.
    #[default]
    Hc0,
    /// HC0 scaled by `n / (n − k)`.
    Hc1,
}

/// Least-squares fit with robust standard errors. Coefficient 0 is the
/// intercept.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionFit {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub r_squared: f64,
    pub n_obs: usize,
    pub residuals: Vec<f64>,
}

impl RegressionFit {
    pub fn alpha(&self) -> f64 {
        self.coefficients[0]
    }

    /// Intercept ×12.
    pub fn alpha_annual(&self) -> f64 {
        12.0 * self.coefficients[0]
    }

    /// Intercept standard error ×12.
    pub fn alpha_se_annual(&self) -> f64 {
        12.0 * self.std_errors[0]
    }

    pub fn beta(&self) -> f64 {
        self.coefficients[1]
    }

    /// Coefficient on the timing term of an HM or TM regression.
    pub fn gamma(&self) -> Option<f64> {
        self.coefficients.get(2).copied()
    }

    pub fn gamma_t(&self) -> Option<f64> {
        self.t_stats.get(2).copied()
    }
}

/// Regresses `y` on an intercept plus `regressors` (each a full column).
pub fn robust_ols(
    y: &[f64],
    regressors: &[(&str, Vec<f64>)],
    covariance: CovarianceType,
) -> Result<RegressionFit> {
    let n = y.len();
    let k = regressors.len() + 1;
    if regressors.iter().any(|(_, c)| c.len() != n) {
        return Err(Error::Alignment("regressor length differs from response".into()));
    }
    if n <= k {
        return Err(Error::InsufficientData {
            what: "regression observations".into(),
            needed: k + 1,
            got: n,
        });
    }
    let x = DMatrix::from_fn(n, k, |i, j| if j == 0 { 1.0 } else { regressors[j - 1].1[i] });
    let yv = DVector::from_column_slice(y);
    let b = solve_least_squares(&x, &yv)?;
    let resid = &yv - &x * &b;

    let xtx_inv = (x.transpose() * &x)
        .try_inverse()
        .ok_or_else(|| Error::Singular("XᵀX is not invertible".into()))?;
    let mut meat = DMatrix::zeros(k, k);
    for i in 0..n {
        let xi = x.row(i);
        meat += xi.transpose() * xi * (resid[i] * resid[i]);
    }
    let mut cov = &xtx_inv * meat * &xtx_inv;
    if covariance == CovarianceType::Hc1 {
        cov *= n as f64 / (n - k) as f64;
    }
    let std_errors: Vec<f64> = (0..k).map(|j| cov[(j, j)].max(0.0).sqrt()).collect();
    let coefficients: Vec<f64> = b.iter().copied().collect();
    let t_stats = coefficients.iter().zip(&std_errors).map(|(c, s)| c / s).collect();

    let y_mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    let sse: f64 = resid.iter().map(|e| e * e).sum();
    let r_squared = if sst > 0.0 { 1.0 - sse / sst } else { f64::NAN };

    let mut names = vec!["intercept".to_string()];
    names.extend(regressors.iter().map(|(n, _)| n.to_string()));
    Ok(RegressionFit {
        names,
        coefficients,
        std_errors,
        t_stats,
        r_squared,
        n_obs: n,
        residuals: resid.iter().copied().collect(),
    })
}

fn check_pair(fa: &[f64], fb: &[f64]) -> Result<()> {
    if fa.len() != fb.len() {
        return Err(Error::Alignment(format!(
            "strategy has {} months, benchmark {}",
            fa.len(),
            fb.len()
        )));
    }
    Ok(())
}

/// `f_a = α + β f_b + ε`.
pub fn alpha_regression(fa: &[f64], fb: &[f64], covariance: CovarianceType) -> Result<RegressionFit> {
    check_pair(fa, fb)?;
    robust_ols(fa, &[("beta", fb.to_vec())], covariance)
}

/// Henriksson–Merton: `f_a = α + β f_b + γ max(0, f_b) + ε`.
pub fn hm_test(fa: &[f64], fb: &[f64], covariance: CovarianceType) -> Result<RegressionFit> {
    check_pair(fa, fb)?;
    let up = fb.iter().map(|v| v.max(0.0)).collect();
    robust_ols(fa, &[("beta", fb.to_vec()), ("gamma", up)], covariance)
}

/// Treynor–Mazuy: `f_a = α + β f_b + γ f_b² + ε`.
pub fn tm_test(fa: &[f64], fb: &[f64], covariance: CovarianceType) -> Result<RegressionFit> {
    check_pair(fa, fb)?;
    let sq = fb.iter().map(|v| v * v).collect();
    robust_ols(fa, &[("beta", fb.to_vec()), ("gamma", sq)], covariance)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn market() -> Vec<f64> {
        (0..30).map(|i| ((i * 17) % 13) as f64 * 0.01 - 0.06).collect()
    }

    #[test]
    fn identical_series() {
        let fb = market();
        let fit = alpha_regression(&fb, &fb, CovarianceType::Hc0).unwrap();
        assert!(fit.alpha().abs() < 1e-15);
        assert!((fit.beta() - 1.0).abs() < 1e-13);
        assert!((fit.r_squared - 1.0).abs() < 1e-13);
    }

    #[test]
    fn exact_linear_fit() {
        let fb = market();
        let fa: Vec<f64> = fb.iter().map(|v| 0.001 + 0.5 * v).collect();
        let fit = alpha_regression(&fa, &fb, CovarianceType::Hc0).unwrap();
        assert!((fit.alpha_annual() - 0.012).abs() < 1e-12);
        assert!((fit.beta() - 0.5).abs() < 1e-12);
        assert!(fit.std_errors.iter().all(|s| *s < 1e-12));
    }

    #[test]
    fn timing_fixtures() {
        let fb = market();
        let fa: Vec<f64> = fb.iter().map(|v| 0.5 * v.max(0.0)).collect();
        let hm = hm_test(&fa, &fb, CovarianceType::Hc0).unwrap();
        assert!(hm.beta().abs() < 1e-10);
        assert!((hm.gamma().unwrap() - 0.5).abs() < 1e-10);

        let fa: Vec<f64> = fb.iter().map(|v| v * v).collect();
        let tm = tm_test(&fa, &fb, CovarianceType::Hc0).unwrap();
        assert!(tm.beta().abs() < 1e-10);
        assert!((tm.gamma().unwrap() - 1.0).abs() < 1e-10);

        let hm = hm_test(&fb, &fb, CovarianceType::Hc0).unwrap();
        assert!(hm.gamma().unwrap().abs() < 1e-10);
    }

    #[test]
    fn degenerate_designs_are_singular() {
        let fb = vec![0.01; 20];
        let fa = market()[..20].to_vec();
        assert!(matches!(alpha_regression(&fa, &fb, CovarianceType::Hc0), Err(Error::Singular(_))));
        let positive: Vec<f64> = market()[..20].iter().map(|v| v.abs() + 0.01).collect();
        assert!(matches!(hm_test(&fa, &positive, CovarianceType::Hc0), Err(Error::Singular(_))));
    }

    #[test]
    fn residuals_orthogonal_to_regressors() {
        let fb = market();
        let fa: Vec<f64> = fb.iter().enumerate().map(|(i, v)| 0.3 * v + ((i * 7) % 5) as f64 * 0.002).collect();
        let fit = alpha_regression(&fa, &fb, CovarianceType::Hc0).unwrap();
        let s0: f64 = fit.residuals.iter().sum();
        let s1: f64 = fit.residuals.iter().zip(&fb).map(|(e, x)| e * x).sum();
        assert!(s0.abs() < 1e-8 && s1.abs() < 1e-8);
        let hc1 = alpha_regression(&fa, &fb, CovarianceType::Hc1).unwrap();
        let scale = (30.0f64 / 28.0).sqrt();
        assert!((hc1.std_errors[1] - fit.std_errors[1] * scale).abs() < 1e-15);
    }
}
