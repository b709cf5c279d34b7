#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace qsm {

// Mixed-radix complex FFT plan for a fixed length n. Works for any n by
// recursing on the smallest prime factor; a prime length degenerates to the
// O(p^2) DFT at that level, which is exact and fast enough for the grid
// sizes this library targets (factors 2/3/5 dominate).
//
// Forward (sign = -1) uses e^{-2*pi*i*jk/n}; inverse (sign = +1) is
// unscaled here -- 3D wrappers apply the single 1/N factor.
//
// Plans are immutable after construction and safe to share across threads;
// callers own the scratch buffers.
class Fft1d {
public:
    explicit Fft1d(std::size_t n);

    std::size_t size() const { return n_; }

    // Reads n elements from `in` at `in_stride`, writes the transform to
    // `out` (contiguous). `work` must hold n elements; `out` and `work`
    // must not alias `in` or each other.
    void execute(const std::complex<double>* in, std::size_t in_stride,
                 std::complex<double>* out, std::complex<double>* work, int sign) const;

private:
    void recurse(const std::complex<double>* in, std::size_t stride, std::size_t n,
                 std::complex<double>* out, std::complex<double>* work,
                 std::complex<double>* butterfly, int sign, std::size_t factor_idx) const;

    std::size_t n_ = 0;
    std::size_t max_factor_ = 1;
    std::vector<std::size_t> factors_;
    std::vector<std::complex<double>> roots_; // roots_[a] = exp(-2*pi*i*a/n)
};

} // namespace qsm
