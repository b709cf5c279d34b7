#include "qsm/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qsm {

Fft1d::Fft1d(std::size_t n) : n_(n) {
    if (n == 0) throw std::invalid_argument("FFT length must be positive");
    std::size_t rem = n;
    for (std::size_t f = 2; f * f <= rem;) {
        if (rem % f == 0) {
            factors_.push_back(f);
            rem /= f;
        } else {
            ++f;
        }
    }
    if (rem > 1) factors_.push_back(rem);
    for (const auto f : factors_) max_factor_ = std::max(max_factor_, f);

    roots_.resize(n);
    for (std::size_t a = 0; a < n; ++a) {
        const double phi = -2.0 * std::numbers::pi * static_cast<double>(a) / static_cast<double>(n);
        roots_[a] = {std::cos(phi), std::sin(phi)};
    }
}

void Fft1d::execute(const std::complex<double>* in, std::size_t in_stride,
                    std::complex<double>* out, std::complex<double>* work, int sign) const {
    (void)work; // combines run in place per output column
    std::vector<std::complex<double>> butterfly(max_factor_);
    recurse(in, in_stride, n_, out, nullptr, butterfly.data(), sign, 0);
}

void Fft1d::recurse(const std::complex<double>* in, std::size_t stride, std::size_t n,
                    std::complex<double>* out, std::complex<double>* work,
                    std::complex<double>* butterfly, int sign, std::size_t factor_idx) const {
    if (n == 1) {
        out[0] = in[0];
        return;
    }
    const std::size_t r = factors_[factor_idx];
    const std::size_t m = n / r;
    for (std::size_t j = 0; j < r; ++j)
        recurse(in + j * stride, stride * r, m, out + j * m, work, butterfly, sign,
                factor_idx + 1);

    // Twiddles for the current sub-length come from the global root table:
    // W_n[a] = roots_[a * (n_/n)], conjugated for the inverse transform.
    const std::size_t scale = n_ / n;
    auto w = [&](std::size_t a) {
        const std::complex<double> v = roots_[a * scale];
        return sign < 0 ? v : std::conj(v);
    };

    // Each output column {out[v*m + u], v = 0..r-1} only depends on the
    // same column of the children, so the combine runs in place.
    if (r == 2) {
        for (std::size_t u = 0; u < m; ++u) {
            const std::complex<double> t = out[m + u] * w(u);
            out[m + u] = out[u] - t;
            out[u] += t;
        }
        return;
    }
    for (std::size_t u = 0; u < m; ++u) {
        for (std::size_t j = 0; j < r; ++j) butterfly[j] = out[j * m + u] * w(j * u);
        for (std::size_t v = 0; v < r; ++v) {
            std::complex<double> acc = butterfly[0];
            for (std::size_t j = 1; j < r; ++j) acc += butterfly[j] * w(((j * v) % r) * m);
            out[v * m + u] = acc;
        }
    }
}

} // namespace qsm
