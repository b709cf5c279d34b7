#include "qsm/kernels.hpp"

#include <cmath>

// Reference implementations. Strictly ordered accumulation; no FMA (this
// translation unit is built without -mfma so results are reproducible and
// serve as the equivalence baseline for the SIMD variants).

namespace qsm::kern::scalar {

void add(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale(const double* a, double s, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sumsq(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
    return acc;
}

double sum(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

void lrelu_fwd(const double* x, double* y, double slope, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : slope * x[i];
}

void lrelu_bwd(const double* y_post, const double* gy, double* gx, double slope,
               std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) gx[i] = gy[i] * (y_post[i] > 0.0 ? 1.0 : slope);
}

void adam_step(double* theta, double* m, double* v, const double* g, double alpha,
               double beta1, double beta2, double eps, double corr1, double corr2,
               std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = m[i] / corr1;
        const double vhat = v[i] / corr2;
        theta[i] -= alpha * mhat / (std::sqrt(vhat) + eps);
    }
}

void conv3_row_acc(const double* src, double* dst, double w0, double w1, double w2,
                   std::size_t n) {
    if (n == 0) return;
    if (n == 1) {
        dst[0] += w1 * src[0];
        return;
    }
    dst[0] += w1 * src[0] + w2 * src[1];
    for (std::size_t i = 1; i + 1 < n; ++i)
        dst[i] += w0 * src[i - 1] + w1 * src[i] + w2 * src[i + 1];
    dst[n - 1] += w0 * src[n - 2] + w1 * src[n - 1];
}

void dot3_shift_acc(const double* g, const double* src, double out3[3], std::size_t n) {
    if (n == 0) return;
    double a0 = 0.0, a1 = 0.0, a2 = 0.0;
    if (n == 1) {
        out3[1] += g[0] * src[0];
        return;
    }
    a1 += g[0] * src[0];
    a2 += g[0] * src[1];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        a0 += g[i] * src[i - 1];
        a1 += g[i] * src[i];
        a2 += g[i] * src[i + 1];
    }
    a0 += g[n - 1] * src[n - 2];
    a1 += g[n - 1] * src[n - 1];
    out3[0] += a0;
    out3[1] += a1;
    out3[2] += a2;
}

} // namespace qsm::kern::scalar
