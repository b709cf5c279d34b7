#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "qsm/kernels.hpp"
#include "qsm/rng.hpp"

using namespace qsm;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

// Sizes chosen to hit the SIMD main loop, the tails, and the tiny-n paths.
const std::size_t kSizes[] = {1, 2, 3, 4, 5, 7, 8, 13, 16, 31, 64, 257};

} // namespace

TEST_CASE("scalar elementwise ops match direct evaluation") {
    Rng rng(7);
    for (const auto n : kSizes) {
        const auto a = random_vec(n, rng);
        const auto b = random_vec(n, rng);
        std::vector<double> out(n);
        kern::scalar::add(a.data(), b.data(), out.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == a[i] + b[i]);
        kern::scalar::mul(a.data(), b.data(), out.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == a[i] * b[i]);
    }
}

TEST_CASE("avx2 variants agree with the scalar reference") {
    if (!kern::avx2_available()) {
        MESSAGE("AVX2 not available, skipping equivalence checks");
        return;
    }
    Rng rng(11);
    for (const auto n : kSizes) {
        const auto a = random_vec(n, rng);
        const auto b = random_vec(n, rng);
        std::vector<double> s(n), v(n);

        kern::scalar::add(a.data(), b.data(), s.data(), n);
        kern::avx2::add(a.data(), b.data(), v.data(), n);
        CHECK(s == v); // identical IEEE ops, bitwise equal

        kern::scalar::sub(a.data(), b.data(), s.data(), n);
        kern::avx2::sub(a.data(), b.data(), v.data(), n);
        CHECK(s == v);

        kern::scalar::mul(a.data(), b.data(), s.data(), n);
        kern::avx2::mul(a.data(), b.data(), v.data(), n);
        CHECK(s == v);

        kern::scalar::scale(a.data(), 1.7, s.data(), n);
        kern::avx2::scale(a.data(), 1.7, v.data(), n);
        CHECK(s == v);

        // FMA and lane reordering allow rounding-level differences.
        s = b;
        v = b;
        kern::scalar::axpy(0.37, a.data(), s.data(), n);
        kern::avx2::axpy(0.37, a.data(), v.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(s[i] - v[i]) <= 1e-14 * (std::abs(s[i]) + 1.0));

        CHECK(kern::avx2::dot(a.data(), b.data(), n) ==
              doctest::Approx(kern::scalar::dot(a.data(), b.data(), n)).epsilon(1e-12));
        CHECK(kern::avx2::sumsq(a.data(), n) ==
              doctest::Approx(kern::scalar::sumsq(a.data(), n)).epsilon(1e-12));
        CHECK(kern::avx2::sum(a.data(), n) ==
              doctest::Approx(kern::scalar::sum(a.data(), n)).epsilon(5e-12));

        kern::scalar::lrelu_fwd(a.data(), s.data(), 0.1, n);
        kern::avx2::lrelu_fwd(a.data(), v.data(), 0.1, n);
        CHECK(s == v);

        kern::scalar::lrelu_bwd(a.data(), b.data(), s.data(), 0.1, n);
        kern::avx2::lrelu_bwd(a.data(), b.data(), v.data(), 0.1, n);
        CHECK(s == v);
    }
}

TEST_CASE("conv3_row_acc equals the stencil definition with zero boundary") {
    Rng rng(3);
    for (const auto n : kSizes) {
        const auto src = random_vec(n, rng);
        const double w0 = -0.4, w1 = 0.9, w2 = 0.25;
        std::vector<double> expected(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = w1 * src[i];
            if (i > 0) acc += w0 * src[i - 1];
            if (i + 1 < n) acc += w2 * src[i + 1];
            expected[i] = acc;
        }
        std::vector<double> got(n, 0.0);
        kern::conv3_row_acc(src.data(), got.data(), w0, w1, w2, n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-13));

        if (kern::avx2_available()) {
            std::vector<double> sgot(n, 0.0), vgot(n, 0.0);
            kern::scalar::conv3_row_acc(src.data(), sgot.data(), w0, w1, w2, n);
            kern::avx2::conv3_row_acc(src.data(), vgot.data(), w0, w1, w2, n);
            for (std::size_t i = 0; i < n; ++i)
                CHECK(std::abs(sgot[i] - vgot[i]) <= 1e-14 * (std::abs(sgot[i]) + 1.0));
        }
    }
}

TEST_CASE("dot3_shift_acc equals shifted dot products") {
    Rng rng(5);
    for (const auto n : kSizes) {
        const auto g = random_vec(n, rng);
        const auto src = random_vec(n, rng);
        double expected[3] = {0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i)
            for (int j = 0; j < 3; ++j) {
                const long long k = static_cast<long long>(i) + j - 1;
                if (k >= 0 && k < static_cast<long long>(n)) expected[j] += g[i] * src[k];
            }
        double got[3] = {0.0, 0.0, 0.0};
        kern::dot3_shift_acc(g.data(), src.data(), got, n);
        for (int j = 0; j < 3; ++j)
            CHECK(got[j] == doctest::Approx(expected[j]).epsilon(1e-12));
    }
}

TEST_CASE("adam_step first update with unit gradient moves by -lr") {
    // bias-corrected first step: mhat = g, vhat = g^2, so dtheta = -lr/(1+eps)
    const std::size_t n = 6;
    std::vector<double> theta(n, 0.5), m(n, 0.0), v(n, 0.0), g(n, 1.0);
    const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    kern::adam_step(theta.data(), m.data(), v.data(), g.data(), lr, b1, b2, eps,
                    1.0 - b1, 1.0 - b2, n);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(theta[i] == doctest::Approx(0.5 - lr / (1.0 + eps)).epsilon(1e-12));
}

TEST_CASE("adam_step scalar and avx2 agree") {
    if (!kern::avx2_available()) return;
    Rng rng(17);
    for (const auto sz : kSizes) {
        auto ts = random_vec(sz, rng);
        auto ms = random_vec(sz, rng);
        auto vs = random_vec(sz, rng);
        for (auto& x : vs) x = std::abs(x);
        const auto gr = random_vec(sz, rng);
        auto tv = ts, mv = ms, vv = vs;
        kern::scalar::adam_step(ts.data(), ms.data(), vs.data(), gr.data(), 0.01, 0.9,
                                0.999, 1e-8, 0.1, 0.001, sz);
        kern::avx2::adam_step(tv.data(), mv.data(), vv.data(), gr.data(), 0.01, 0.9,
                              0.999, 1e-8, 0.1, 0.001, sz);
        for (std::size_t i = 0; i < sz; ++i) {
            CHECK(std::abs(ts[i] - tv[i]) <= 1e-12 * (std::abs(ts[i]) + 1.0));
            CHECK(std::abs(vs[i] - vv[i]) <= 1e-12 * (std::abs(vs[i]) + 1.0));
        }
    }
}

TEST_CASE("dispatch reports a backend") {
    const std::string backend = kern::active_backend();
    CHECK((backend == "avx2" || backend == "scalar"));
}
