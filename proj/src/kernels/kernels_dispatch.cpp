// Runtime dispatch between the scalar reference kernels and the SIMD
// variants. No intrinsics in this file.

#include "qsm/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace qsm::kern {

namespace {

bool detect_avx2() {
#if !defined(QSM_HAVE_AVX2)
    return false;
#elif defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

bool choose_avx2() {
    if (const char* env = std::getenv("QSM_SIMD"); env && std::strcmp(env, "scalar") == 0)
        return false;
    return detect_avx2();
}

// Resolved once per process; every call in a run takes the same path.
const bool g_use_avx2 = choose_avx2();

} // namespace

bool avx2_available() { return detect_avx2(); }

const char* active_backend() { return g_use_avx2 ? "avx2" : "scalar"; }

#if !defined(QSM_HAVE_AVX2)
// Non-x86 builds: keep the avx2 namespace linkable by forwarding to scalar.
namespace avx2 {
void add(const double* a, const double* b, double* out, std::size_t n) { scalar::add(a, b, out, n); }
void sub(const double* a, const double* b, double* out, std::size_t n) { scalar::sub(a, b, out, n); }
void mul(const double* a, const double* b, double* out, std::size_t n) { scalar::mul(a, b, out, n); }
void scale(const double* a, double s, double* out, std::size_t n) { scalar::scale(a, s, out, n); }
void axpy(double a, const double* x, double* y, std::size_t n) { scalar::axpy(a, x, y, n); }
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
double sumsq(const double* a, std::size_t n) { return scalar::sumsq(a, n); }
double sum(const double* a, std::size_t n) { return scalar::sum(a, n); }
void lrelu_fwd(const double* x, double* y, double slope, std::size_t n) { scalar::lrelu_fwd(x, y, slope, n); }
void lrelu_bwd(const double* y_post, const double* gy, double* gx, double slope, std::size_t n) { scalar::lrelu_bwd(y_post, gy, gx, slope, n); }
void adam_step(double* theta, double* m, double* v, const double* g, double alpha, double beta1, double beta2, double eps, double corr1, double corr2, std::size_t n) { scalar::adam_step(theta, m, v, g, alpha, beta1, beta2, eps, corr1, corr2, n); }
void conv3_row_acc(const double* src, double* dst, double w0, double w1, double w2, std::size_t n) { scalar::conv3_row_acc(src, dst, w0, w1, w2, n); }
void dot3_shift_acc(const double* g, const double* src, double out3[3], std::size_t n) { scalar::dot3_shift_acc(g, src, out3, n); }
} // namespace avx2
#endif

#define QSM_DISPATCH(fn, ...) \
    return g_use_avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__)

void add(const double* a, const double* b, double* out, std::size_t n) { QSM_DISPATCH(add, a, b, out, n); }
void sub(const double* a, const double* b, double* out, std::size_t n) { QSM_DISPATCH(sub, a, b, out, n); }
void mul(const double* a, const double* b, double* out, std::size_t n) { QSM_DISPATCH(mul, a, b, out, n); }
void scale(const double* a, double s, double* out, std::size_t n) { QSM_DISPATCH(scale, a, s, out, n); }
void axpy(double a, const double* x, double* y, std::size_t n) { QSM_DISPATCH(axpy, a, x, y, n); }
double dot(const double* a, const double* b, std::size_t n) { QSM_DISPATCH(dot, a, b, n); }
double sumsq(const double* a, std::size_t n) { QSM_DISPATCH(sumsq, a, n); }
double sum(const double* a, std::size_t n) { QSM_DISPATCH(sum, a, n); }
void lrelu_fwd(const double* x, double* y, double slope, std::size_t n) { QSM_DISPATCH(lrelu_fwd, x, y, slope, n); }
void lrelu_bwd(const double* y_post, const double* gy, double* gx, double slope, std::size_t n) { QSM_DISPATCH(lrelu_bwd, y_post, gy, gx, slope, n); }
void adam_step(double* theta, double* m, double* v, const double* g, double alpha, double beta1, double beta2, double eps, double corr1, double corr2, std::size_t n) { QSM_DISPATCH(adam_step, theta, m, v, g, alpha, beta1, beta2, eps, corr1, corr2, n); }
void conv3_row_acc(const double* src, double* dst, double w0, double w1, double w2, std::size_t n) { QSM_DISPATCH(conv3_row_acc, src, dst, w0, w1, w2, n); }
void dot3_shift_acc(const double* g, const double* src, double out3[3], std::size_t n) { QSM_DISPATCH(dot3_shift_acc, g, src, out3, n); }

#undef QSM_DISPATCH

} // namespace qsm::kern
