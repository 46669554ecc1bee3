//! C ABI for the `rewardrisk` engine.
//!
//! Conventions:
//! - Every fallible function returns an [`RrStatus`]; results go through
//!   out-pointers that are written only on success.
//! - Objects are opaque handles created by `rr_*_new` / `rr_fit_*` /
//!   `rr_panel_read_csv` and released with the matching `rr_*_free`.
//! - On failure, [`rr_last_error`] returns a description owned by the
//!   library and valid until the next call on the same thread.
//! - Panics never cross the boundary; they are reported as
//!   [`RrStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use rewardrisk::allocation::{optimal_weight, WeightBounds};
use rewardrisk::explain::{explain, shap_kernel_weight};
use rewardrisk::learners::{
    fit_elastic_net, fit_forest, fit_ols, Dataset, ElasticNetConfig, FittedModel, ForestConfig,
    OlsConfig,
};
use rewardrisk::market_data::{realized_variance, PredictorPanel};
use rewardrisk::Error;

/// Outcome of a library call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RrStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Invalid configuration, schema or argument.
    InvalidArgument = 2,
    /// Input data could not be read or is inconsistent.
    DataError = 3,
    /// Numerical failure: singular system, undefined statistic, domain error.
    NumericalError = 4,
    /// An internal panic was caught.
    Panic = 5,
}

/// Opaque predictor panel.
pub struct RrPanel(PredictorPanel);

/// Opaque training set.
pub struct RrDataset(Dataset);

/// Opaque fitted model.
pub struct RrModel(FittedModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> RrStatus {
    match err.exit_code() {
        2 => RrStatus::InvalidArgument,
        3 => RrStatus::DataError,
        _ => RrStatus::NumericalError,
    }
}

/// Runs `f`, converting errors and panics into a status plus message.
fn guard(f: impl FnOnce() -> Result<(), (RrStatus, String)>) -> RrStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RrStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {message}"));
            RrStatus::Panic
        }
    }
}

fn lib<T>(r: rewardrisk::Result<T>) -> Result<T, (RrStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (RrStatus, String) {
    (RrStatus::NullPointer, format!("{what} is null"))
}

fn invalid(message: impl Into<String>) -> (RrStatus, String) {
    (RrStatus::InvalidArgument, message.into())
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (RrStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn reference_to<'a, T>(p: *const T, what: &str) -> Result<&'a T, (RrStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), (RrStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Description of the last failure on this thread, or null if the last
/// call succeeded.
#[no_mangle]
pub extern "C" fn rr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Reads a predictor panel written by `rewardrisk ingest`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rr_panel_read_csv(path: *const c_char, out: *mut *mut RrPanel) -> RrStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path).to_str().map_err(|_| invalid("path is not UTF-8"))?;
        let panel = lib(PredictorPanel::read_csv(Path::new(path)))?;
        write(out, Box::into_raw(Box::new(RrPanel(panel))), "out")
    })
}

/// # Safety
/// `panel` must come from [`rr_panel_read_csv`] or be null.
#[no_mangle]
pub unsafe extern "C" fn rr_panel_free(panel: *mut RrPanel) {
    if !panel.is_null() {
        drop(Box::from_raw(panel));
    }
}

/// Number of rows and features in a panel.
///
/// # Safety
/// `panel` must be a live handle; out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn rr_panel_shape(
    panel: *const RrPanel,
    rows: *mut usize,
    features: *mut usize,
) -> RrStatus {
    guard(|| {
        let p = &reference_to(panel, "panel")?.0;
        write(rows, p.len(), "rows")?;
        write(features, p.n_features(), "features")
    })
}

/// Training set made of panel rows `[start, end)`.
///
/// # Safety
/// `panel` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rr_panel_dataset(
    panel: *const RrPanel,
    start: usize,
    end: usize,
    out: *mut *mut RrDataset,
) -> RrStatus {
    guard(|| {
        let p = &reference_to(panel, "panel")?.0;
        if start >= end || end > p.len() {
            return Err(invalid(format!("row range [{start}, {end}) outside panel of {} rows", p.len())));
        }
        let data = lib(p.dataset_range(start, end))?;
        write(out, Box::into_raw(Box::new(RrDataset(data))), "out")
    })
}

/// Training set from a row-major `n_rows × n_features` matrix and targets.
///
/// # Safety
/// `features` must hold `n_rows * n_features` values and `targets`
/// `n_rows`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rr_dataset_new(
    features: *const f64,
    n_rows: usize,
    n_features: usize,
    targets: *const f64,
    out: *mut *mut RrDataset,
) -> RrStatus {
    guard(|| {
        let cells = n_rows
            .checked_mul(n_features)
            .ok_or_else(|| invalid("dataset dimensions overflow"))?;
        let x = slice(features, cells, "features")?.to_vec();
        let y = slice(targets, n_rows, "targets")?.to_vec();
        let names = (0..n_features).map(|j| format!("x{j}")).collect();
        let data = lib(Dataset::new(x, y, names))?;
        write(out, Box::into_raw(Box::new(RrDataset(data))), "out")
    })
}

/// # Safety
/// `data` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rr_dataset_free(data: *mut RrDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

fn fit_into(
    data: *const RrDataset,
    out: *mut *mut RrModel,
    fit: impl FnOnce(&Dataset) -> rewardrisk::Result<FittedModel>,
) -> RrStatus {
    guard(|| {
        // SAFETY: callers pass a live handle or null, per the public contracts.
        let d = unsafe { &reference_to(data, "data")?.0 };
        let model = lib(fit(d))?;
        unsafe { write(out, Box::into_raw(Box::new(RrModel(model))), "out") }
    })
}

/// Random forest with bootstrap resampling, seeded per tree.
///
/// # Safety
/// `data` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rr_fit_forest(
    data: *const RrDataset,
    n_trees: usize,
    m_try: usize,
    min_node_fraction: f64,
    max_terminal_nodes: usize,
    seed: u64,
    out: *mut *mut RrModel,
) -> RrStatus {
    let config = ForestConfig {
        n_trees,
        m_try,
        min_node_fraction,
        max_terminal_nodes,
        bootstrap: true,
        seed,
    };
    fit_into(data, out, |d| fit_forest(d, &config).map(FittedModel::Forest))
}

/// Elastic net on standardized features with penalty
/// `lambda * (alpha * |b|_1 + (1 - alpha) / 2 * |b|^2)`.
///
/// # Safety
/// `data` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rr_fit_elastic_net(
    data: *const RrDataset,
    lambda: f64,
    alpha: f64,
    out: *mut *mut RrModel,
) -> RrStatus {
    let config = ElasticNetConfig::new(lambda, alpha);
    fit_into(data, out, |d| fit_elastic_net(d, &config).map(FittedModel::Linear))
}

/// Ordinary least squares with intercept.
///
/// # Safety
/// `data` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rr_fit_ols(data: *const RrDataset, out: *mut *mut RrModel) -> RrStatus {
    fit_into(data, out, |d| fit_ols(d, &OlsConfig::default()).map(FittedModel::Linear))
}

/// # Safety
/// `model` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rr_model_free(model: *mut RrModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Prediction for one feature vector of length `n_features`.
///
/// # Safety
/// `model` must be a live handle, `x` must hold `n_features` values and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rr_model_predict(
    model: *const RrModel,
    x: *const f64,
    n_features: usize,
    out: *mut f64,
) -> RrStatus {
    guard(|| {
        let m = &reference_to(model, "model")?.0;
        let x = slice(x, n_features, "x")?;
        write(out, m.predict(x), "out")
    })
}

/// Intercept and slopes of a linear model; `coefficients` must have room
/// for `n_features` values. Forests report `InvalidArgument`.
///
/// # Safety
/// `model` must be a live handle and the out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn rr_model_coefficients(
    model: *const RrModel,
    intercept: *mut f64,
    coefficients: *mut f64,
    n_features: usize,
) -> RrStatus {
    guard(|| {
        let m = &reference_to(model, "model")?.0;
        let lin = m.as_linear().ok_or_else(|| invalid("model is not linear"))?;
        if lin.coefficients.len() != n_features {
            return Err(invalid(format!(
                "model has {} coefficients, buffer holds {n_features}",
                lin.coefficients.len()
            )));
        }
        if coefficients.is_null() && n_features > 0 {
            return Err(null("coefficients"));
        }
        write(intercept, lin.intercept, "intercept")?;
        if n_features > 0 {
            std::slice::from_raw_parts_mut(coefficients, n_features).copy_from_slice(&lin.coefficients);
        }
        Ok(())
    })
}

/// Kernel SHAP values of `model` at `query` against the reference point
/// `reference` (both of length `n_features`). Writes `n_features`
/// attributions to `phi` and the base value `f(reference)` to `phi_0`.
///
/// # Safety
/// Buffers must hold `n_features` values; out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn rr_shap_explain(
    model: *const RrModel,
    query: *const f64,
    reference: *const f64,
    n_features: usize,
    samples: usize,
    seed: u64,
    phi: *mut f64,
    phi_0: *mut f64,
) -> RrStatus {
    guard(|| {
        let m = &reference_to(model, "model")?.0;
        let q = slice(query, n_features, "query")?;
        let r = slice(reference, n_features, "reference")?;
        let e = lib(explain(m, q, r, samples, seed))?;
        if phi.is_null() {
            return Err(null("phi"));
        }
        write(phi_0, e.phi_0, "phi_0")?;
        std::slice::from_raw_parts_mut(phi, n_features).copy_from_slice(&e.phi);
        Ok(())
    })
}

/// `clip(reward / (gamma * variance), low, high)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rr_optimal_weight(
    reward: f64,
    variance: f64,
    gamma: f64,
    low: f64,
    high: f64,
    out: *mut f64,
) -> RrStatus {
    guard(|| {
        let bounds = WeightBounds { low, high };
        lib(bounds.validate())?;
        write(out, lib(optimal_weight(reward, variance, gamma, bounds))?, "out")
    })
}

/// Sum of squared deviations of daily returns from their mean.
///
/// # Safety
/// `daily` must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rr_realized_variance(daily: *const f64, n: usize, out: *mut f64) -> RrStatus {
    guard(|| {
        let d = slice(daily, n, "daily")?;
        write(out, lib(realized_variance(d))?, "out")
    })
}

/// Shapley kernel weight of a coalition of `size` among `m` features.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rr_shap_kernel_weight(m: usize, size: usize, out: *mut f64) -> RrStatus {
    guard(|| write(out, lib(shap_kernel_weight(m, size))?, "out"))
}
