#pragma once

#include <array>
#include <vector>

#include "qsm/volume.hpp"

namespace qsm {

// Patch plan over a volume: every patch lies fully inside the volume and
// every voxel is covered at least once. Origins step by the stride; when
// the last regular origin falls short of dims-p, one extra origin clamped
// to dims-p is appended per axis (shift-to-fit). Patch order is
// lexicographic in (z,y,x) origin, fixed so per-patch noise inputs are
// reproducible.
struct PatchGrid {
    Dims vol_dims;
    std::array<int, 3> patch{};  // (px, py, pz)
    std::array<int, 3> stride{};
    std::array<std::vector<int>, 3> axis_origins; // per axis: x, y, z
    std::vector<std::array<int, 3>> origins;      // (ox, oy, oz) per patch

    std::size_t patch_count() const { return origins.size(); }
    std::size_t patch_len() const {
        return static_cast<std::size_t>(patch[0]) * patch[1] * patch[2];
    }
};

// Per-voxel coverage c(v) >= 1 and weight w(v) = 1/sqrt(c(v)), so that the
// squared weights of all covering patches sum to one at every voxel.
struct WeightField {
    Dims dims;
    std::vector<double> coverage;
    std::vector<double> weight;
};

using PatchSet = std::vector<std::vector<double>>;

PatchGrid plan_patches(Dims dims, std::array<int, 3> patch, std::array<int, 3> stride);

// Patch b at origin o satisfies b[q] = chi[o+q]; x-fastest within the patch.
PatchSet extract(const Volume& chi, const PatchGrid& g);

WeightField coverage(const PatchGrid& g);

// Weighted overlap-add: out(v) = sum over covering patches of w(v)^2 * value,
// i.e. the plain average of covering patch values. aggregate(extract(chi))
// reproduces chi exactly. Accumulation order is fixed (patch order, then
// x-fastest) so results are bit-reproducible.
Volume aggregate(const PatchSet& patches, const PatchGrid& g, const WeightField& wf,
                 std::array<double, 3> spacing = {1.0, 1.0, 1.0});

} // namespace qsm
