#pragma once

#include <cstdint>
#include <string_view>

namespace qsm {

// Deterministic, portable PRNG used everywhere randomness is needed.
// splitmix64 stream + Box-Muller for normals. Run metadata records this
// generator as "splitmix64+box-muller".
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform on [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // standard normal, Box-Muller with cached second deviate
    double gaussian();

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// Stateless splitmix64 finalizer, for deriving child seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// Labeled sub-seeding: one global seed fans out deterministically to
// independent consumers ("noise", "theta", "z", ...).
std::uint64_t sub_seed(std::uint64_t global_seed, std::string_view label);

inline constexpr const char* kRngName = "splitmix64+box-muller";

} // namespace qsm
