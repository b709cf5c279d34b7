#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qsm/baselines.hpp"
#include "qsm/pdip.hpp"
#include "qsm/phantom.hpp"

namespace qsm {

// Invalid configuration or usage; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat INI-style run configuration. Sections and keys are validated
// against a fixed schema; unknown ones are rejected. Repeated keys are
// allowed only where the schema says so (phantom shapes).
class RunConfig {
public:
    using Entries = std::vector<std::pair<std::string, std::string>>;

    static RunConfig from_file(const std::filesystem::path& path);
    static RunConfig from_text(const std::string& text);

    // "section.key=value" command-line override.
    void apply_override(const std::string& spec);

    bool has(const std::string& section, const std::string& key) const;
    // Single-valued lookup; throws ConfigError if the key repeats.
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    std::vector<std::string> get_all(const std::string& section, const std::string& key) const;

    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::uint64_t fallback) const;

private:
    void insert(const std::string& section, const std::string& key, const std::string& value);
    std::map<std::string, Entries> sections_;
};

// Strict numeric parsing (whole string must convert).
double parse_double(const std::string& s);
int parse_int(const std::string& s);
std::uint64_t parse_u64(const std::string& s);
std::vector<double> parse_double_list(const std::string& s, std::size_t expected);

// Section-to-module-config bindings. `global_seed` feeds labeled sub-seeds
// to consumers that the config does not override.
PhantomSpec phantom_from_config(const RunConfig& c);
// mask=all (default) or mask=shapes
std::string phantom_mask_mode(const RunConfig& c);
NoiseSpec noise_from_config(const RunConfig& c, std::uint64_t global_seed);
TkdConfig tkd_from_config(const RunConfig& c);
TvConfig tv_from_config(const RunConfig& c);
TgvConfig tgv_from_config(const RunConfig& c);
PdipConfig pdip_from_config(const RunConfig& c, std::uint64_t global_seed);
NetworkSpec net_from_config(const RunConfig& c);
std::uint64_t seed_from_config(const RunConfig& c, std::uint64_t fallback);

} // namespace qsm
