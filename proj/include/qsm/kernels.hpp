#pragma once

#include <cstddef>

// Data-parallel inner-loop primitives. Every operation has a scalar
// reference implementation (kern::scalar) and may have SIMD variants
// (kern::avx2). The unqualified entry points dispatch at runtime based on
// CPU capability; set QSM_SIMD=scalar in the environment to force the
// reference path. SIMD and scalar variants are equivalence-tested against
// each other; they may differ by rounding (FMA, lane reduction order) but
// never beyond a few ulps.

namespace qsm::kern {

#define QSM_KERNEL_DECLS                                                          \
    void add(const double* a, const double* b, double* out, std::size_t n);       \
    void sub(const double* a, const double* b, double* out, std::size_t n);       \
    void mul(const double* a, const double* b, double* out, std::size_t n);       \
    void scale(const double* a, double s, double* out, std::size_t n);            \
    /* y += a*x */                                                                \
    void axpy(double a, const double* x, double* y, std::size_t n);               \
    double dot(const double* a, const double* b, std::size_t n);                  \
    double sumsq(const double* a, std::size_t n);                                 \
    double sum(const double* a, std::size_t n);                                   \
    void lrelu_fwd(const double* x, double* y, double slope, std::size_t n);      \
    /* gx = gy * (y_post > 0 ? 1 : slope); works off the cached post-activation */\
    void lrelu_bwd(const double* y_post, const double* gy, double* gx,            \
                   double slope, std::size_t n);                                  \
    /* bias-corrected ADAM: m,v updated in place, theta -= alpha*mhat/(sqrt(vhat)+eps) */ \
    void adam_step(double* theta, double* m, double* v, const double* g,          \
                   double alpha, double beta1, double beta2, double eps,          \
                   double corr1, double corr2, std::size_t n);                    \
    /* dst[i] += w0*src[i-1] + w1*src[i] + w2*src[i+1], zero outside [0,n) */     \
    void conv3_row_acc(const double* src, double* dst, double w0, double w1,      \
                       double w2, std::size_t n);                                 \
    /* out3[j] += sum_i g[i]*src[i+j-1], src read as zero outside [0,n) */        \
    void dot3_shift_acc(const double* g, const double* src, double out3[3],       \
                        std::size_t n);

QSM_KERNEL_DECLS

namespace scalar {
QSM_KERNEL_DECLS
}

// Defined for every build; forwards to scalar when AVX2 is not compiled in.
namespace avx2 {
QSM_KERNEL_DECLS
}

#undef QSM_KERNEL_DECLS

// True when AVX2+FMA variants are compiled in and the CPU supports them.
bool avx2_available();

// Backend the unqualified entry points resolve to: "avx2" or "scalar".
const char* active_backend();

} // namespace qsm::kern
