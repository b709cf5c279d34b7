#include "qsm/gradops.hpp"

#include <stdexcept>

namespace qsm {

namespace {

struct Strides {
    std::size_t sx, sy, sz;
    int nx, ny, nz;
};

Strides strides_of(Dims d) {
    return {1, static_cast<std::size_t>(d.x),
            static_cast<std::size_t>(d.x) * static_cast<std::size_t>(d.y), d.x, d.y, d.z};
}

// out[i] = u[i + step] - u[i] on interior, 0 at the last plane.
void diff_axis(const std::vector<double>& u, Dims d, int axis, std::vector<double>& out) {
    const auto s = strides_of(d);
    out.assign(u.size(), 0.0);
    const std::size_t step = axis == 0 ? s.sx : axis == 1 ? s.sy : s.sz;
    std::size_t i = 0;
    for (int z = 0; z < s.nz; ++z)
        for (int y = 0; y < s.ny; ++y)
            for (int x = 0; x < s.nx; ++x, ++i) {
                const int c = axis == 0 ? x : axis == 1 ? y : z;
                const int n = axis == 0 ? s.nx : axis == 1 ? s.ny : s.nz;
                if (c < n - 1) out[i] = u[i + step] - u[i];
            }
}

// out[i] += p[i]*[c < n-1] - p[i - step]*[c > 0]  (negative adjoint of diff_axis)
void div_axis_acc(const std::vector<double>& p, Dims d, int axis, std::vector<double>& out) {
    const auto s = strides_of(d);
    const std::size_t step = axis == 0 ? s.sx : axis == 1 ? s.sy : s.sz;
    std::size_t i = 0;
    for (int z = 0; z < s.nz; ++z)
        for (int y = 0; y < s.ny; ++y)
            for (int x = 0; x < s.nx; ++x, ++i) {
                const int c = axis == 0 ? x : axis == 1 ? y : z;
                const int n = axis == 0 ? s.nx : axis == 1 ? s.ny : s.nz;
                double v = 0.0;
                if (c < n - 1) v += p[i];
                if (c > 0) v -= p[i - step];
                out[i] += v;
            }
}

} // namespace

VecField VecField::zeros(Dims d) {
    VecField f;
    f.dims = d;
    f.x.assign(d.count(), 0.0);
    f.y.assign(d.count(), 0.0);
    f.z.assign(d.count(), 0.0);
    return f;
}

SymField SymField::zeros(Dims d) {
    SymField f;
    f.dims = d;
    const std::size_t n = d.count();
    f.xx.assign(n, 0.0);
    f.yy.assign(n, 0.0);
    f.zz.assign(n, 0.0);
    f.xy.assign(n, 0.0);
    f.xz.assign(n, 0.0);
    f.yz.assign(n, 0.0);
    return f;
}

VecField grad3(const std::vector<double>& u, Dims dims) {
    if (u.size() != dims.count()) throw std::invalid_argument("grad3: size mismatch");
    VecField g;
    g.dims = dims;
    diff_axis(u, dims, 0, g.x);
    diff_axis(u, dims, 1, g.y);
    diff_axis(u, dims, 2, g.z);
    return g;
}

std::vector<double> div3(const VecField& p) {
    std::vector<double> out(p.dims.count(), 0.0);
    div_axis_acc(p.x, p.dims, 0, out);
    div_axis_acc(p.y, p.dims, 1, out);
    div_axis_acc(p.z, p.dims, 2, out);
    return out;
}

SymField sym_grad(const VecField& w) {
    const Dims d = w.dims;
    SymField e;
    e.dims = d;
    std::vector<double> t1, t2;
    diff_axis(w.x, d, 0, e.xx);
    diff_axis(w.y, d, 1, e.yy);
    diff_axis(w.z, d, 2, e.zz);
    const std::size_t n = d.count();
    diff_axis(w.x, d, 1, t1);
    diff_axis(w.y, d, 0, t2);
    e.xy.resize(n);
    for (std::size_t i = 0; i < n; ++i) e.xy[i] = 0.5 * (t1[i] + t2[i]);
    diff_axis(w.x, d, 2, t1);
    diff_axis(w.z, d, 0, t2);
    e.xz.resize(n);
    for (std::size_t i = 0; i < n; ++i) e.xz[i] = 0.5 * (t1[i] + t2[i]);
    diff_axis(w.y, d, 2, t1);
    diff_axis(w.z, d, 1, t2);
    e.yz.resize(n);
    for (std::size_t i = 0; i < n; ++i) e.yz[i] = 0.5 * (t1[i] + t2[i]);
    return e;
}

VecField sym_div(const SymField& q) {
    const Dims d = q.dims;
    VecField out = VecField::zeros(d);
    div_axis_acc(q.xx, d, 0, out.x);
    div_axis_acc(q.xy, d, 1, out.x);
    div_axis_acc(q.xz, d, 2, out.x);
    div_axis_acc(q.xy, d, 0, out.y);
    div_axis_acc(q.yy, d, 1, out.y);
    div_axis_acc(q.yz, d, 2, out.y);
    div_axis_acc(q.xz, d, 0, out.z);
    div_axis_acc(q.yz, d, 1, out.z);
    div_axis_acc(q.zz, d, 2, out.z);
    return out;
}

} // namespace qsm
