// AVX2+FMA kernel variants. This file is compiled with -mavx2 -mfma on
// x86-64 targets only; callers must check kern::avx2_available() first.

#if defined(__AVX2__) && defined(__FMA__)

#include "qsm/kernels.hpp"

#include <immintrin.h>

namespace qsm::kern::avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

} // namespace

void add(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void scale(const double* a, double s, double* out, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), vs));
    for (; i < n; ++i) out[i] = a[i] * s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double r = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) r += a[i] * b[i];
    return r;
}

double sumsq(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(a + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double r = hsum(acc);
    for (; i < n; ++i) r += a[i] * a[i];
    return r;
}

double sum(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double r = hsum(acc);
    for (; i < n; ++i) r += a[i];
    return r;
}

void lrelu_fwd(const double* x, double* y, double slope, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(slope);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        const __m256d neg = _mm256_mul_pd(v, vs);
        const __m256d mask = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
        _mm256_storeu_pd(y + i, _mm256_blendv_pd(neg, v, mask));
    }
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : slope * x[i];
}

void lrelu_bwd(const double* y_post, const double* gy, double* gx, double slope,
               std::size_t n) {
    const __m256d vs = _mm256_set1_pd(slope);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(y_post + i), zero, _CMP_GT_OQ);
        const __m256d w = _mm256_blendv_pd(vs, one, mask);
        _mm256_storeu_pd(gx + i, _mm256_mul_pd(_mm256_loadu_pd(gy + i), w));
    }
    for (; i < n; ++i) gx[i] = gy[i] * (y_post[i] > 0.0 ? 1.0 : slope);
}

void adam_step(double* theta, double* m, double* v, const double* g, double alpha,
               double beta1, double beta2, double eps, double corr1, double corr2,
               std::size_t n) {
    const __m256d vb1 = _mm256_set1_pd(beta1);
    const __m256d vb2 = _mm256_set1_pd(beta2);
    const __m256d vc1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d vc2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d valpha = _mm256_set1_pd(alpha);
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d icorr1 = _mm256_set1_pd(1.0 / corr1);
    const __m256d icorr2 = _mm256_set1_pd(1.0 / corr2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vg = _mm256_loadu_pd(g + i);
        __m256d vm = _mm256_fmadd_pd(vb1, _mm256_loadu_pd(m + i), _mm256_mul_pd(vc1, vg));
        __m256d vv = _mm256_fmadd_pd(vb2, _mm256_loadu_pd(v + i),
                                     _mm256_mul_pd(vc2, _mm256_mul_pd(vg, vg)));
        _mm256_storeu_pd(m + i, vm);
        _mm256_storeu_pd(v + i, vv);
        const __m256d mhat = _mm256_mul_pd(vm, icorr1);
        const __m256d vhat = _mm256_mul_pd(vv, icorr2);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
        const __m256d upd = _mm256_div_pd(_mm256_mul_pd(valpha, mhat), denom);
        _mm256_storeu_pd(theta + i, _mm256_sub_pd(_mm256_loadu_pd(theta + i), upd));
    }
    if (i < n) scalar::adam_step(theta + i, m + i, v + i, g + i, alpha, beta1, beta2,
                                 eps, corr1, corr2, n - i);
}

void conv3_row_acc(const double* src, double* dst, double w0, double w1, double w2,
                   std::size_t n) {
    if (n < 6) {
        scalar::conv3_row_acc(src, dst, w0, w1, w2, n);
        return;
    }
    dst[0] += w1 * src[0] + w2 * src[1];
    const __m256d vw0 = _mm256_set1_pd(w0);
    const __m256d vw1 = _mm256_set1_pd(w1);
    const __m256d vw2 = _mm256_set1_pd(w2);
    std::size_t i = 1;
    for (; i + 4 <= n - 1; i += 4) {
        __m256d acc = _mm256_loadu_pd(dst + i);
        acc = _mm256_fmadd_pd(vw0, _mm256_loadu_pd(src + i - 1), acc);
        acc = _mm256_fmadd_pd(vw1, _mm256_loadu_pd(src + i), acc);
        acc = _mm256_fmadd_pd(vw2, _mm256_loadu_pd(src + i + 1), acc);
        _mm256_storeu_pd(dst + i, acc);
    }
    for (; i + 1 < n; ++i)
        dst[i] += w0 * src[i - 1] + w1 * src[i] + w2 * src[i + 1];
    dst[n - 1] += w0 * src[n - 2] + w1 * src[n - 1];
}

void dot3_shift_acc(const double* g, const double* src, double out3[3], std::size_t n) {
    if (n < 6) {
        scalar::dot3_shift_acc(g, src, out3, n);
        return;
    }
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    std::size_t i = 1;
    for (; i + 4 <= n - 1; i += 4) {
        const __m256d vg = _mm256_loadu_pd(g + i);
        acc0 = _mm256_fmadd_pd(vg, _mm256_loadu_pd(src + i - 1), acc0);
        acc1 = _mm256_fmadd_pd(vg, _mm256_loadu_pd(src + i), acc1);
        acc2 = _mm256_fmadd_pd(vg, _mm256_loadu_pd(src + i + 1), acc2);
    }
    double a0 = hsum(acc0), a1 = hsum(acc1), a2 = hsum(acc2);
    for (; i + 1 < n; ++i) {
        a0 += g[i] * src[i - 1];
        a1 += g[i] * src[i];
        a2 += g[i] * src[i + 1];
    }
    a1 += g[0] * src[0];
    a2 += g[0] * src[1];
    a0 += g[n - 1] * src[n - 2];
    a1 += g[n - 1] * src[n - 1];
    out3[0] += a0;
    out3[1] += a1;
    out3[2] += a2;
}

} // namespace qsm::kern::avx2

#endif // __AVX2__ && __FMA__
