#ifndef REWARDRISK_H
#define REWARDRISK_H

#include <stddef.h>
#include <stdint.h>

/**
 * Outcome of a library call.
 */
typedef enum RrStatus {
  RR_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  RR_STATUS_NULL_POINTER = 1,
  /**
   * Invalid configuration, schema or argument.
   */
  RR_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Input data could not be read or is inconsistent.
   */
  RR_STATUS_DATA_ERROR = 3,
  /**
   * Numerical failure: singular system, undefined statistic, domain error.
   */
  RR_STATUS_NUMERICAL_ERROR = 4,
  /**
   * An internal panic was caught.
   */
  RR_STATUS_PANIC = 5,
} RrStatus;

/**
 * Opaque training set.
 */
typedef struct RrDataset RrDataset;

/**
 * Opaque fitted model.
 */
typedef struct RrModel RrModel;

/**
 * Opaque predictor panel.
 */
typedef struct RrPanel RrPanel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Description of the last failure on this thread, or null if the last
 * call succeeded.
 */
const char *rr_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rr_version(void);

/**
 * Reads a predictor panel written by `rewardrisk ingest`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum RrStatus rr_panel_read_csv(const char *path, struct RrPanel **out);

/**
 * # Safety
 * `panel` must come from [`rr_panel_read_csv`] or be null.
 */
void rr_panel_free(struct RrPanel *panel);

/**
 * Number of rows and features in a panel.
 *
 * # Safety
 * `panel` must be a live handle; out-pointers must be writable.
 */
enum RrStatus rr_panel_shape(const struct RrPanel *panel, size_t *rows, size_t *features);

/**
 * Training set made of panel rows `[start, end)`.
 *
 * # Safety
 * `panel` must be a live handle; `out` must be writable.
 */
enum RrStatus rr_panel_dataset(const struct RrPanel *panel,
                               size_t start,
                               size_t end,
                               struct RrDataset **out);

/**
 * Training set from a row-major `n_rows × n_features` matrix and targets.
 *
 * # Safety
 * `features` must hold `n_rows * n_features` values and `targets`
 * `n_rows`; `out` must be writable.
 */
enum RrStatus rr_dataset_new(const double *features,
                             size_t n_rows,
                             size_t n_features,
                             const double *targets,
                             struct RrDataset **out);

/**
 * # Safety
 * `data` must come from this library or be null.
 */
void rr_dataset_free(struct RrDataset *data);

/**
 * Random forest with bootstrap resampling, seeded per tree.
 *
 * # Safety
 * `data` must be a live handle; `out` must be writable.
 */
enum RrStatus rr_fit_forest(const struct RrDataset *data,
                            size_t n_trees,
                            size_t m_try,
                            double min_node_fraction,
                            size_t max_terminal_nodes,
                            uint64_t seed,
                            struct RrModel **out);

/**
 * Elastic net on standardized features with penalty
 * `lambda * (alpha * |b|_1 + (1 - alpha) / 2 * |b|^2)`.
 *
 * # Safety
 * `data` must be a live handle; `out` must be writable.
 */
enum RrStatus rr_fit_elastic_net(const struct RrDataset *data,
                                 double lambda,
                                 double alpha,
                                 struct RrModel **out);

/**
 * Ordinary least squares with intercept.
 *
 * # Safety
 * `data` must be a live handle; `out` must be writable.
 */
enum RrStatus rr_fit_ols(const struct RrDataset *data, struct RrModel **out);

/**
 * # Safety
 * `model` must come from this library or be null.
 */
void rr_model_free(struct RrModel *model);

/**
 * Prediction for one feature vector of length `n_features`.
 *
 * # Safety
 * `model` must be a live handle, `x` must hold `n_features` values and
 * `out` must be writable.
 */
enum RrStatus rr_model_predict(const struct RrModel *model,
                               const double *x,
                               size_t n_features,
                               double *out);

/**
 * Intercept and slopes of a linear model; `coefficients` must have room
 * for `n_features` values. Forests report `InvalidArgument`.
 *
 * # Safety
 * `model` must be a live handle and the out-pointers writable.
 */
enum RrStatus rr_model_coefficients(const struct RrModel *model,
                                    double *intercept,
                                    double *coefficients,
                                    size_t n_features);

/**
 * Kernel SHAP values of `model` at `query` against the reference point
 * `reference` (both of length `n_features`). Writes `n_features`
 * attributions to `phi` and the base value `f(reference)` to `phi_0`.
 *
 * # Safety
 * Buffers must hold `n_features` values; out-pointers must be writable.
 */
enum RrStatus rr_shap_explain(const struct RrModel *model,
                              const double *query,
                              const double *reference,
                              size_t n_features,
                              size_t samples,
                              uint64_t seed,
                              double *phi,
                              double *phi_0);

/**
 * `clip(reward / (gamma * variance), low, high)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum RrStatus rr_optimal_weight(double reward,
                                double variance,
                                double gamma,
                                double low,
                                double high,
                                double *out);

/**
 * Sum of squared deviations of daily returns from their mean.
 *
 * # Safety
 * `daily` must hold `n` values; `out` must be writable.
 */
enum RrStatus rr_realized_variance(const double *daily, size_t n, double *out);

/**
 * Shapley kernel weight of a coalition of `size` among `m` features.
 *
 * # Safety
 * `out` must be writable.
 */
enum RrStatus rr_shap_kernel_weight(size_t m, size_t size, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REWARDRISK_H */
