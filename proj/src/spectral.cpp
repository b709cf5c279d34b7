#include "qsm/spectral.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

#include "qsm/fft.hpp"
#include "qsm/parallel.hpp"

namespace qsm {

namespace {

void require_same_dims(Dims a, Dims b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string("dims mismatch in ") + what);
}

// In-place 1D transforms along one axis of a 3D complex field. Lines are
// independent; they are statically partitioned across worker threads.
void transform_axis(std::vector<std::complex<double>>& a, Dims d, Axis axis, int sign) {
    const std::size_t sx = 1;
    const std::size_t sy = static_cast<std::size_t>(d.x);
    const std::size_t sz = sy * static_cast<std::size_t>(d.y);

    std::size_t n = 0, stride = 0;
    switch (axis) {
        case Axis::x: n = d.x; stride = sx; break;
        case Axis::y: n = d.y; stride = sy; break;
        case Axis::z: n = d.z; stride = sz; break;
    }
    const Fft1d plan(n);

    std::vector<std::size_t> bases;
    switch (axis) {
        case Axis::x:
            for (int z = 0; z < d.z; ++z)
                for (int y = 0; y < d.y; ++y) bases.push_back(sy * y + sz * z);
            break;
        case Axis::y:
            for (int z = 0; z < d.z; ++z)
                for (int x = 0; x < d.x; ++x) bases.push_back(sx * x + sz * z);
            break;
        case Axis::z:
            for (int y = 0; y < d.y; ++y)
                for (int x = 0; x < d.x; ++x) bases.push_back(sx * x + sy * y);
            break;
    }

    const int workers = std::min(qsm::detail::thread_count(),
                                 static_cast<int>(bases.size()));
    const std::size_t chunk = (bases.size() + workers - 1) / workers;
    auto run_range = [&](std::size_t lo, std::size_t hi) {
        std::vector<std::complex<double>> out(n), work(n);
        for (std::size_t i = lo; i < hi; ++i) {
            const std::size_t base = bases[i];
            plan.execute(&a[base], stride, out.data(), work.data(), sign);
            for (std::size_t j = 0; j < n; ++j) a[base + j * stride] = out[j];
        }
    };
    if (workers <= 1) {
        run_range(0, bases.size());
        return;
    }
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(bases.size(), lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(run_range, lo, hi);
    }
    run_range(0, std::min(chunk, bases.size()));
    for (auto& t : pool) t.join();
}

Spectrum transform_3d(Spectrum s, int sign) {
    transform_axis(s.data, s.dims, Axis::x, sign);
    transform_axis(s.data, s.dims, Axis::y, sign);
    transform_axis(s.data, s.dims, Axis::z, sign);
    return s;
}

} // namespace

Spectrum Spectrum::zeros(Dims d) {
    Spectrum s;
    s.dims = d;
    s.data.assign(d.count(), {0.0, 0.0});
    return s;
}

Spectrum dft3(const Volume& v) {
    Spectrum s = Spectrum::zeros(v.dims);
    for (std::size_t i = 0; i < v.data.size(); ++i) s.data[i] = {v.data[i], 0.0};
    return transform_3d(std::move(s), -1);
}

Spectrum dft3(const Spectrum& s) { return transform_3d(s, -1); }

Spectrum idft3(const Spectrum& s) {
    Spectrum r = transform_3d(s, +1);
    const double inv_n = 1.0 / static_cast<double>(r.dims.count());
    for (auto& c : r.data) c *= inv_n;
    return r;
}

Volume real_part(const Spectrum& s, std::array<double, 3> spacing) {
    Volume v = Volume::zeros(s.dims, spacing);
    for (std::size_t i = 0; i < s.data.size(); ++i) v.data[i] = s.data[i].real();
    return v;
}

DipoleKernel build_dipole_kernel(Dims dims, std::array<double, 3> spacing) {
    if (dims.x < 2 || dims.y < 2 || dims.z < 2)
        throw std::invalid_argument("dipole kernel requires dims >= 2 per axis");

    DipoleKernel k;
    k.dims = dims;
    k.spacing = spacing;
    k.d.assign(dims.count(), 0.0);

    auto signed_freq = [](int i, int n) { return i <= n / 2 ? i : i - n; };

    std::size_t idx = 0;
    for (int z = 0; z < dims.z; ++z) {
        const double kz = signed_freq(z, dims.z) / (dims.z * spacing[2]);
        for (int y = 0; y < dims.y; ++y) {
            const double ky = signed_freq(y, dims.y) / (dims.y * spacing[1]);
            for (int x = 0; x < dims.x; ++x, ++idx) {
                const double kx = signed_freq(x, dims.x) / (dims.x * spacing[0]);
                const double k2 = kx * kx + ky * ky + kz * kz;
                k.d[idx] = k2 == 0.0 ? 0.0 : 1.0 / 3.0 - (kz * kz) / k2;
            }
        }
    }
    return k;
}

Volume dipole_to_volume(const DipoleKernel& k) {
    Volume v = Volume::zeros(k.dims, k.spacing);
    v.data = k.d;
    return v;
}

Volume forward_field(const Volume& chi, const DipoleKernel& k) {
    require_same_dims(chi.dims, k.dims, "forward_field");
    Spectrum s = dft3(chi);
    for (std::size_t i = 0; i < s.data.size(); ++i) s.data[i] *= k.d[i];
    return real_part(idft3(s), chi.spacing);
}

Volume adjoint_field(const Volume& y, const DipoleKernel& k) {
    require_same_dims(y.dims, k.dims, "adjoint_field");
    // d is real and even, hence self-adjoint.
    return forward_field(y, k);
}

} // namespace qsm
