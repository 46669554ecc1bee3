/* Fits least squares and a small forest through the C ABI. */
#include <stdio.h>
#include <math.h>
#include "rewardrisk.h"

static int check(enum RrStatus s, const char *what) {
    if (s != RR_STATUS_OK) {
        const char *msg = rr_last_error();
        fprintf(stderr, "%s failed (%d): %s\n", what, (int)s, msg ? msg : "");
        return 1;
    }
    return 0;
}

int main(void) {
    enum { N = 50, P = 2 };
    double x[N * P], y[N];
    for (int i = 0; i < N; i++) {
        x[2 * i] = sin(0.37 * i);
        x[2 * i + 1] = cos(1.13 * i);
        y[i] = 1.0 + 2.0 * x[2 * i] - 0.5 * x[2 * i + 1];
    }
    RrDataset *data = NULL;
    RrModel *ols = NULL, *forest = NULL;
    if (check(rr_dataset_new(x, N, P, y, &data), "dataset")) return 1;
    if (check(rr_fit_ols(data, &ols), "ols")) return 1;
    if (check(rr_fit_forest(data, 50, 1, 0.05, 8, 42, &forest), "forest")) return 1;

    double q[P] = {0.5, -1.0}, p_ols = 0.0, p_forest = 0.0, w = 0.0;
    if (check(rr_model_predict(ols, q, P, &p_ols), "predict")) return 1;
    if (check(rr_model_predict(forest, q, P, &p_forest), "predict")) return 1;
    if (check(rr_optimal_weight(0.006, 0.002, 4.0, 0.0, 1.5, &w), "weight")) return 1;
    printf("ols %.6f forest %.6f weight %.6f\n", p_ols, p_forest, w);

    rr_model_free(forest);
    rr_model_free(ols);
    rr_dataset_free(data);
    return fabs(p_ols - 2.5) < 1e-9 ? 0 : 1;
}
