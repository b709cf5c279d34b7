#include <doctest.h>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "qsm/rng.hpp"
#include "qsm/spectral.hpp"

using namespace qsm;

namespace {

Volume random_volume(Dims d, std::uint64_t seed) {
    Rng rng(seed);
    Volume v = Volume::zeros(d);
    for (auto& x : v.data) x = rng.uniform(-1.0, 1.0);
    return v;
}

double spec_rel_err(const std::vector<std::complex<double>>& got,
                    const std::vector<std::complex<double>>& want) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num += std::norm(got[i] - want[i]);
        den += std::norm(want[i]);
    }
    return std::sqrt(num / den);
}

} // namespace

TEST_CASE("dft3 of a delta at the origin is a flat spectrum of ones") {
    Volume v = Volume::zeros({4, 4, 4});
    v.data[0] = 1.0;
    const Spectrum s = dft3(v);
    for (const auto& c : s.data) {
        CHECK(c.real() == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(std::abs(c.imag()) < 1e-13);
    }
}

TEST_CASE("dft3 of a constant concentrates at DC") {
    const double c = 2.75;
    Volume v = Volume::zeros({4, 4, 4});
    for (auto& x : v.data) x = c;
    const Spectrum s = dft3(v);
    CHECK(s.data[0].real() == doctest::Approx(c * 64).epsilon(1e-13));
    for (std::size_t i = 1; i < s.data.size(); ++i) CHECK(std::abs(s.data[i]) < 1e-10);
}

TEST_CASE("dft3 matches the naive O(N^2) DFT oracle on random fields") {
    for (const Dims d : {Dims{8, 8, 8}, Dims{6, 5, 7}, Dims{4, 9, 2}}) {
        const Volume v = random_volume(d, 123 + d.x);
        const Spectrum got = dft3(v);
        const auto want = oracle::naive_dft3(oracle::to_complex(v.data), d, -1);
        double max_diff = 0.0;
        for (std::size_t i = 0; i < want.size(); ++i)
            max_diff = std::max(max_diff, std::abs(got.data[i] - want[i]));
        CHECK(max_diff <= 1e-10);
    }
}

TEST_CASE("idft3(dft3(v)) recovers v to 1e-12 and Parseval holds") {
    for (const Dims d : {Dims{8, 8, 8}, Dims{12, 10, 6}, Dims{5, 5, 5}}) {
        const Volume v = random_volume(d, 7);
        const Spectrum s = dft3(v);
        const Spectrum back = idft3(s);
        double num = 0.0, den = 0.0, im = 0.0;
        for (std::size_t i = 0; i < v.data.size(); ++i) {
            num += std::norm(back.data[i] - std::complex<double>{v.data[i], 0.0});
            den += v.data[i] * v.data[i];
            im = std::max(im, std::abs(back.data[i].imag()));
        }
        CHECK(std::sqrt(num / den) <= 1e-12);

        double spec_sq = 0.0;
        for (const auto& c : s.data) spec_sq += std::norm(c);
        CHECK(spec_sq == doctest::Approx(den * static_cast<double>(d.count())).epsilon(1e-12));
    }
}

TEST_CASE("dipole kernel closed-form values and bounds") {
    const DipoleKernel k = build_dipole_kernel({8, 8, 8}, {1.0, 1.0, 1.0});
    const Volume kv = dipole_to_volume(k);

    CHECK(kv.at(0, 0, 0) == 0.0);                                   // DC convention
    CHECK(kv.at(0, 0, 1) == doctest::Approx(-2.0 / 3.0).epsilon(1e-15)); // pure kz
    CHECK(kv.at(0, 0, 3) == doctest::Approx(-2.0 / 3.0).epsilon(1e-15));
    CHECK(kv.at(1, 0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15)); // kz = 0
    CHECK(kv.at(0, 2, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(kv.at(1, 1, 1) == doctest::Approx(0.0));                  // magic angle, exact

    for (const double d : k.d) {
        CHECK(d <= 1.0 / 3.0 + 1e-15);
        CHECK(d >= -2.0 / 3.0 - 1e-15);
    }

    // even symmetry under k -> -k
    for (int z = 0; z < 8; ++z)
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x)
                CHECK(kv.at(x, y, z) ==
                      doctest::Approx(kv.at((8 - x) % 8, (8 - y) % 8, (8 - z) % 8))
                          .epsilon(1e-15));
}

TEST_CASE("near-magic-angle population matches a brute-force loop oracle") {
    const Dims d{16, 16, 16};
    const DipoleKernel k = build_dipole_kernel(d, {1.0, 1.0, 1.0});
    std::size_t got = 0;
    for (const double v : k.d)
        if (std::abs(v) < 0.1) ++got;

    // independent loop over signed integer frequencies
    std::size_t want = 0;
    for (int nz = -8; nz < 8; ++nz)
        for (int ny = -8; ny < 8; ++ny)
            for (int nx = -8; nx < 8; ++nx) {
                const double k2 = static_cast<double>(nx) * nx + static_cast<double>(ny) * ny +
                                  static_cast<double>(nz) * nz;
                const double val = k2 == 0.0 ? 0.0 : 1.0 / 3.0 - nz * nz / k2;
                if (std::abs(val) < 0.1) ++want;
            }
    CHECK(got == want);
}

TEST_CASE("anisotropic spacing changes the kernel through physical frequencies") {
    const DipoleKernel k = build_dipole_kernel({8, 8, 8}, {1.0, 1.0, 2.0});
    const Volume kv = dipole_to_volume(k);
    // frequency (1,0,1): kx = 1/8, kz = 1/16 -> d = 1/3 - (1/256)/(1/64 + 1/256)
    const double kx = 1.0 / 8.0, kz = 1.0 / 16.0;
    CHECK(kv.at(1, 0, 1) ==
          doctest::Approx(1.0 / 3.0 - kz * kz / (kx * kx + kz * kz)).epsilon(1e-14));
}

TEST_CASE("forward_field: zero and constant inputs map to zero") {
    const Dims d{8, 8, 8};
    const DipoleKernel k = build_dipole_kernel(d, {1.0, 1.0, 1.0});
    const Volume zero = Volume::zeros(d);
    CHECK(oracle::max_abs_diff(forward_field(zero, k).data, zero.data) == 0.0);

    Volume c = Volume::zeros(d);
    for (auto& x : c.data) x = 3.14;
    CHECK(oracle::max_abs_diff(forward_field(c, k).data, zero.data) <= 1e-12);
}

TEST_CASE("forward_field matches the naive DFT oracle") {
    const Dims d{8, 8, 8};
    const DipoleKernel k = build_dipole_kernel(d, {1.0, 1.0, 1.0});
    const Volume chi = random_volume(d, 99);
    const Volume got = forward_field(chi, k);
    const auto want = oracle::naive_forward_field(chi.data, d, k.d);
    CHECK(oracle::rel_err(got.data, want) <= 1e-10);
}

TEST_CASE("imaginary residual of the forward field is negligible") {
    const Dims d{8, 8, 8};
    const DipoleKernel k = build_dipole_kernel(d, {1.0, 1.0, 1.0});
    const Volume chi = random_volume(d, 5);
    Spectrum s = dft3(chi);
    for (std::size_t i = 0; i < s.data.size(); ++i) s.data[i] *= k.d[i];
    const Spectrum back = idft3(s);
    double re = 0.0, im = 0.0;
    for (const auto& c : back.data) {
        re += c.real() * c.real();
        im += c.imag() * c.imag();
    }
    CHECK(std::sqrt(im) <= 1e-10 * std::sqrt(re));
}

TEST_CASE("adjoint identity <Ax,y> = <x,A*y> on random pairs") {
    const Dims d{8, 8, 8};
    const DipoleKernel k = build_dipole_kernel(d, {1.0, 1.0, 1.0});
    for (int trial = 0; trial < 20; ++trial) {
        const Volume x = random_volume(d, 1000 + trial);
        const Volume y = random_volume(d, 2000 + trial);
        const Volume ax = forward_field(x, k);
        const Volume aty = adjoint_field(y, k);
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            lhs += ax.data[i] * y.data[i];
            rhs += x.data[i] * aty.data[i];
        }
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(std::abs(lhs), 1.0));
    }

    // adjoint equals forward (d real and even); y = 0 maps to 0
    const Volume x = random_volume(d, 3);
    CHECK(oracle::rel_err(adjoint_field(x, k).data, forward_field(x, k).data) <= 1e-14);
    CHECK(oracle::max_abs_diff(adjoint_field(Volume::zeros(d), k).data,
                               Volume::zeros(d).data) == 0.0);
}

TEST_CASE("forward operator is linear") {
    const Dims d{6, 6, 6};
    const DipoleKernel k = build_dipole_kernel(d, {1.0, 1.0, 1.0});
    const Volume x = random_volume(d, 11);
    const Volume y = random_volume(d, 12);
    const double a = 1.3, b = -0.7;
    Volume combo = Volume::zeros(d);
    for (std::size_t i = 0; i < combo.data.size(); ++i)
        combo.data[i] = a * x.data[i] + b * y.data[i];
    const Volume lhs = forward_field(combo, k);
    const Volume ax = forward_field(x, k);
    const Volume by = forward_field(y, k);
    std::vector<double> rhs(lhs.data.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = a * ax.data[i] + b * by.data[i];
    CHECK(oracle::rel_err(lhs.data, rhs) <= 1e-12);
}
