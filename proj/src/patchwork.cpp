#include "qsm/patchwork.hpp"

#include <cmath>
#include <stdexcept>

namespace qsm {

namespace {

std::vector<int> axis_origins(int dim, int p, int s) {
    std::vector<int> origins;
    for (int o = 0; o + p <= dim; o += s) origins.push_back(o);
    if (origins.back() != dim - p) origins.push_back(dim - p);
    return origins;
}

} // namespace

PatchGrid plan_patches(Dims dims, std::array<int, 3> patch, std::array<int, 3> stride) {
    const int dim_per_axis[3] = {dims.x, dims.y, dims.z};
    for (int a = 0; a < 3; ++a) {
        if (patch[a] <= 0 || stride[a] <= 0)
            throw std::invalid_argument("patch size and stride must be positive");
        if (patch[a] > dim_per_axis[a])
            throw std::invalid_argument("patch larger than volume");
    }

    PatchGrid g;
    g.vol_dims = dims;
    g.patch = patch;
    g.stride = stride;
    for (int a = 0; a < 3; ++a)
        g.axis_origins[a] = axis_origins(dim_per_axis[a], patch[a], stride[a]);

    for (const int oz : g.axis_origins[2])
        for (const int oy : g.axis_origins[1])
            for (const int ox : g.axis_origins[0]) g.origins.push_back({ox, oy, oz});
    return g;
}

PatchSet extract(const Volume& chi, const PatchGrid& g) {
    if (!(chi.dims == g.vol_dims)) throw std::invalid_argument("dims mismatch in extract");
    PatchSet patches(g.patch_count());
    const auto [px, py, pz] = g.patch;
    for (std::size_t p = 0; p < g.origins.size(); ++p) {
        auto& b = patches[p];
        b.resize(g.patch_len());
        const auto [ox, oy, oz] = g.origins[p];
        std::size_t q = 0;
        for (int z = 0; z < pz; ++z)
            for (int y = 0; y < py; ++y) {
                const std::size_t base = chi.index(ox, oy + y, oz + z);
                for (int x = 0; x < px; ++x, ++q) b[q] = chi.data[base + x];
            }
    }
    return patches;
}

WeightField coverage(const PatchGrid& g) {
    WeightField wf;
    wf.dims = g.vol_dims;
    wf.coverage.assign(g.vol_dims.count(), 0.0);
    const auto [px, py, pz] = g.patch;
    for (const auto& [ox, oy, oz] : g.origins) {
        for (int z = 0; z < pz; ++z)
            for (int y = 0; y < py; ++y) {
                double* row = wf.coverage.data() +
                              (static_cast<std::size_t>(ox) +
                               static_cast<std::size_t>(g.vol_dims.x) *
                                   (static_cast<std::size_t>(oy + y) +
                                    static_cast<std::size_t>(g.vol_dims.y) *
                                        static_cast<std::size_t>(oz + z)));
                for (int x = 0; x < px; ++x) row[x] += 1.0;
            }
    }
    wf.weight.resize(wf.coverage.size());
    for (std::size_t i = 0; i < wf.coverage.size(); ++i)
        wf.weight[i] = 1.0 / std::sqrt(wf.coverage[i]);
    return wf;
}

Volume aggregate(const PatchSet& patches, const PatchGrid& g, const WeightField& wf,
                 std::array<double, 3> spacing) {
    if (patches.size() != g.patch_count())
        throw std::invalid_argument("patch count does not match grid");
    if (!(wf.dims == g.vol_dims)) throw std::invalid_argument("weight field dims mismatch");

    Volume out = Volume::zeros(g.vol_dims, spacing);
    const auto [px, py, pz] = g.patch;
    for (std::size_t p = 0; p < patches.size(); ++p) {
        const auto& b = patches[p];
        if (b.size() != g.patch_len()) throw std::invalid_argument("patch shape mismatch");
        const auto [ox, oy, oz] = g.origins[p];
        std::size_t q = 0;
        for (int z = 0; z < pz; ++z)
            for (int y = 0; y < py; ++y) {
                const std::size_t base = out.index(ox, oy + y, oz + z);
                for (int x = 0; x < px; ++x, ++q) out.data[base + x] += b[q];
            }
    }
    // w^2 = 1/coverage, so the weighted overlap-add is the plain average.
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] /= wf.coverage[i];
    return out;
}

} // namespace qsm
