#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "qsm/volume.hpp"

namespace qsm {

// Geometric primitives in millimeters; delta_chi in ppm. Later shapes
// overwrite earlier ones where they overlap.
struct Sphere {
    std::array<double, 3> center{};
    double radius = 0.0;
    double delta_chi = 0.0;
};

struct Cuboid {
    std::array<double, 3> corner{};
    std::array<double, 3> size{};
    double delta_chi = 0.0;
};

using Shape = std::variant<Sphere, Cuboid>;

struct PhantomSpec {
    Dims dims;
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    double background = 0.0;
    std::vector<Shape> shapes;
};

struct NoiseSpec {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

// Voxel value = delta_chi of the last shape containing the voxel center
// (cell-centered: voxel (x,y,z) sits at ((x+0.5)dx, (y+0.5)dy, (z+0.5)dz)),
// else background.
Volume rasterize(const PhantomSpec& spec);

// Mask of voxels covered by any shape; the CLI's "shapes" mask option.
Mask shape_mask(const PhantomSpec& spec);

// Closed-form field of a uniformly magnetized sphere, dipole axis z:
// outside (r >= R): (delta_chi/3) (R/r)^3 (3 cos^2 theta - 1); inside: 0
// (Lorentz-corrected convention, matching the DC-free dipole kernel).
// Throws std::domain_error for a query at the exact center.
double analytic_sphere_field(const std::array<double, 3>& center, double radius,
                             double delta_chi, const std::array<double, 3>& query);

// Adds i.i.d. zero-mean Gaussian noise of std sigma; deterministic per seed.
Volume add_noise(const Volume& phi, const NoiseSpec& n);

} // namespace qsm
