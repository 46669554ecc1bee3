use super::PredictorPanel;
use crate::error::{Error, Result};

/// Linearly interpolated quantile (the common "type 7" definition) of the
/// absolute values.
pub fn abs_quantile_cutoff(values: &[f64], quantile: f64) -> Result<f64> {
    if !(quantile > 0.0 && quantile <= 1.0) {
        return Err(Error::Config(format!("trim quantile {quantile} outside (0, 1]")));
    }
    if values.is_empty() {
        return Err(Error::InsufficientData {
            what: "trim cutoff".into(),
            needed: 1,
            got: 0,
        });
    }
    let mut abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let h = (abs.len() - 1) as f64 * quantile;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(abs[lo] + (h - lo as f64) * (abs[hi] - abs[lo]))
}

/// Keep-mask dropping values whose magnitude exceeds the cutoff. Values tied
/// with the cutoff are kept.
pub fn trim_mask(values: &[f64], quantile: f64) -> Result<Vec<bool>> {
    if quantile == 1.0 {
        return Ok(vec![true; values.len()]);
    }
    let cutoff = abs_quantile_cutoff(values, quantile)?;
    Ok(values.iter().map(|v| v.abs() <= cutoff).collect())
}

/// Removes the largest-magnitude excess-return rows from a training window.
///
/// Only ever applied to the rows offered to a learner for fitting; the
/// cutoff is recomputed from whatever window is passed in.
pub fn trim_outliers(panel: &PredictorPanel, quantile: f64) -> Result<PredictorPanel> {
    let keep = trim_mask(panel.excess_returns(), quantile)?;
    Ok(panel.filter_rows(&keep))
}
