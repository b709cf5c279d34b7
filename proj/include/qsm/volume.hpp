#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace qsm {

struct Dims {
    int x = 0, y = 0, z = 0;

    std::size_t count() const {
        return static_cast<std::size_t>(x) * static_cast<std::size_t>(y) *
               static_cast<std::size_t>(z);
    }
    bool operator==(const Dims&) const = default;
};

enum class Axis { x, y, z };

// Real scalar 3D field. Layout is x-fastest: index = x + nx*(y + ny*z).
// Storage on disk is float32; in-memory arithmetic is double throughout.
// Immutable value object once constructed; safe to share read-only.
struct Volume {
    Dims dims;
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    std::vector<double> data;

    static Volume zeros(Dims d, std::array<double, 3> sp = {1.0, 1.0, 1.0});

    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims.x) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(dims.y) * static_cast<std::size_t>(z));
    }
    double& at(int x, int y, int z) { return data[index(x, y, z)]; }
    double at(int x, int y, int z) const { return data[index(x, y, z)]; }
};

struct Mask {
    Dims dims;
    std::vector<std::uint8_t> data;

    static Mask ones(Dims d);
    static Mask from_volume(const Volume& v); // voxel in mask iff value > 0.5
    std::size_t count_set() const;
};

// File format: text header at `path` (dims=, spacing=, dtype=f32le,
// order=x-fastest; '#' lines are comments) plus raw little-endian float32
// payload at `path + ".f32"`. Round trip is bitwise for the raw payload.
Volume load_volume(const std::filesystem::path& header_path);
void save_volume(const Volume& v, const std::filesystem::path& header_path,
                 const std::vector<std::string>& comments = {});

Volume mask_to_volume(const Mask& m, std::array<double, 3> spacing = {1.0, 1.0, 1.0});

// Writes one slice as a binary PGM (P5). Values map linearly from
// [lo, hi] to [0, 255] and clip outside the window.
void export_slice(const Volume& v, Axis axis, int index, double lo, double hi,
                  const std::filesystem::path& out_path);

} // namespace qsm
