#include "qsm/phantom.hpp"

#include <cmath>
#include <stdexcept>

#include "qsm/rng.hpp"

namespace qsm {

namespace {

void validate(const PhantomSpec& spec) {
    if (spec.dims.x <= 0 || spec.dims.y <= 0 || spec.dims.z <= 0)
        throw std::invalid_argument("phantom dims must be positive");
    for (const auto& sh : spec.shapes) {
        if (const auto* s = std::get_if<Sphere>(&sh)) {
            if (!(s->radius > 0.0)) throw std::invalid_argument("sphere radius must be positive");
        } else if (const auto* c = std::get_if<Cuboid>(&sh)) {
            if (!(c->size[0] > 0.0 && c->size[1] > 0.0 && c->size[2] > 0.0))
                throw std::invalid_argument("cuboid size must be positive");
        }
    }
}

bool contains(const Shape& sh, const std::array<double, 3>& p) {
    if (const auto* s = std::get_if<Sphere>(&sh)) {
        const double dx = p[0] - s->center[0];
        const double dy = p[1] - s->center[1];
        const double dz = p[2] - s->center[2];
        return dx * dx + dy * dy + dz * dz <= s->radius * s->radius;
    }
    const auto& c = std::get<Cuboid>(sh);
    for (int i = 0; i < 3; ++i)
        if (p[i] < c.corner[i] || p[i] > c.corner[i] + c.size[i]) return false;
    return true;
}

double shape_value(const Shape& sh) {
    if (const auto* s = std::get_if<Sphere>(&sh)) return s->delta_chi;
    return std::get<Cuboid>(sh).delta_chi;
}

template <typename Visit>
void for_each_voxel_center(const PhantomSpec& spec, Visit&& visit) {
    std::size_t idx = 0;
    for (int z = 0; z < spec.dims.z; ++z) {
        const double pz = (z + 0.5) * spec.spacing[2];
        for (int y = 0; y < spec.dims.y; ++y) {
            const double py = (y + 0.5) * spec.spacing[1];
            for (int x = 0; x < spec.dims.x; ++x, ++idx) {
                visit(idx, std::array<double, 3>{(x + 0.5) * spec.spacing[0], py, pz});
            }
        }
    }
}

} // namespace

Volume rasterize(const PhantomSpec& spec) {
    validate(spec);
    Volume v = Volume::zeros(spec.dims, spec.spacing);
    for_each_voxel_center(spec, [&](std::size_t idx, const std::array<double, 3>& p) {
        double val = spec.background;
        for (const auto& sh : spec.shapes)
            if (contains(sh, p)) val = shape_value(sh);
        v.data[idx] = val;
    });
    return v;
}

Mask shape_mask(const PhantomSpec& spec) {
    validate(spec);
    Mask m;
    m.dims = spec.dims;
    m.data.assign(spec.dims.count(), 0);
    for_each_voxel_center(spec, [&](std::size_t idx, const std::array<double, 3>& p) {
        for (const auto& sh : spec.shapes)
            if (contains(sh, p)) {
                m.data[idx] = 1;
                break;
            }
    });
    return m;
}

double analytic_sphere_field(const std::array<double, 3>& center, double radius,
                             double delta_chi, const std::array<double, 3>& query) {
    const double dx = query[0] - center[0];
    const double dy = query[1] - center[1];
    const double dz = query[2] - center[2];
    const double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 == 0.0) throw std::domain_error("analytic sphere field undefined at the center");
    if (r2 < radius * radius) return 0.0;
    const double r = std::sqrt(r2);
    const double cos_theta = dz / r;
    const double rr = radius / r;
    return (delta_chi / 3.0) * rr * rr * rr * (3.0 * cos_theta * cos_theta - 1.0);
}

Volume add_noise(const Volume& phi, const NoiseSpec& n) {
    if (n.sigma < 0.0) throw std::invalid_argument("noise sigma must be >= 0");
    if (n.sigma == 0.0) return phi;
    Volume out = phi;
    Rng rng(n.seed);
    for (auto& v : out.data) v += n.sigma * rng.gaussian();
    return out;
}

} // namespace qsm
