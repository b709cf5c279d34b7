#include "qsm/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "qsm/rng.hpp"

namespace qsm {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"global", {"seed"}},
        {"phantom", {"dims", "spacing", "background", "sphere", "cuboid", "mask"}},
        {"noise", {"sigma"}},
        {"tkd", {"t"}},
        {"tv", {"lambda", "iters", "tau", "sigma"}},
        {"tgv", {"alpha1", "alpha0", "iters", "tau", "sigma"}},
        {"pdip",
         {"mu", "patch", "stride", "outer_iters", "inner_epochs", "lr", "tol", "seed", "init",
          "grad_mode"}},
        {"net", {"levels", "base_channels"}},
        {"metrics", {}},
    };
    return s;
}

bool repeatable(const std::string& section, const std::string& key) {
    return section == "phantom" && (key == "sphere" || key == "cuboid");
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

double parse_double(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) throw ConfigError("empty numeric value");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) throw ConfigError("malformed number: '" + s + "'");
    return v;
}

int parse_int(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) throw ConfigError("empty numeric value");
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size()) throw ConfigError("malformed integer: '" + s + "'");
    return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) throw ConfigError("empty numeric value");
    char* end = nullptr;
    const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size()) throw ConfigError("malformed seed: '" + s + "'");
    return v;
}

std::vector<double> parse_double_list(const std::string& s, std::size_t expected) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
    if (out.size() != expected)
        throw ConfigError("expected " + std::to_string(expected) + " comma-separated values, got '" +
                          s + "'");
    return out;
}

void RunConfig::insert(const std::string& section, const std::string& key,
                       const std::string& value) {
    const auto it = schema().find(section);
    if (it == schema().end()) throw ConfigError("unknown config section [" + section + "]");
    if (!it->second.count(key))
        throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
    if (!repeatable(section, key)) {
        for (const auto& [k, v] : sections_[section])
            if (k == key) throw ConfigError("duplicate key '" + key + "' in section [" + section + "]");
    }
    sections_[section].emplace_back(key, value);
}

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError("malformed section header at line " +
                                                   std::to_string(lineno) + ": " + t);
            section = trim(t.substr(1, t.size() - 2));
            if (!schema().count(section))
                throw ConfigError("unknown config section [" + section + "]");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key=value at line " + std::to_string(lineno) + ": " + t);
        if (section.empty())
            throw ConfigError("key outside any section at line " + std::to_string(lineno));
        c.insert(section, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return from_text(ss.str());
}

void RunConfig::apply_override(const std::string& spec) {
    const auto eq = spec.find('=');
    const auto dot = spec.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("override must look like section.key=value: '" + spec + "'");
    const std::string section = trim(spec.substr(0, dot));
    const std::string key = trim(spec.substr(dot + 1, eq - dot - 1));
    const std::string value = trim(spec.substr(eq + 1));
    if (!repeatable(section, key)) {
        auto& entries = sections_[section];
        entries.erase(std::remove_if(entries.begin(), entries.end(),
                                     [&](const auto& kv) { return kv.first == key; }),
                      entries.end());
    }
    insert(section, key, value);
}

bool RunConfig::has(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    if (it == sections_.end()) return false;
    for (const auto& [k, v] : it->second)
        if (k == key) return true;
    return false;
}

std::string RunConfig::get(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
    const auto all = get_all(section, key);
    if (all.empty()) return fallback;
    if (all.size() > 1) throw ConfigError("key '" + key + "' given more than once");
    return all.front();
}

std::vector<std::string> RunConfig::get_all(const std::string& section,
                                            const std::string& key) const {
    std::vector<std::string> out;
    const auto it = sections_.find(section);
    if (it == sections_.end()) return out;
    for (const auto& [k, v] : it->second)
        if (k == key) out.push_back(v);
    return out;
}

double RunConfig::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
    return has(section, key) ? parse_double(get(section, key, "")) : fallback;
}

int RunConfig::get_int(const std::string& section, const std::string& key, int fallback) const {
    return has(section, key) ? parse_int(get(section, key, "")) : fallback;
}

std::uint64_t RunConfig::get_u64(const std::string& section, const std::string& key,
                                 std::uint64_t fallback) const {
    return has(section, key) ? parse_u64(get(section, key, "")) : fallback;
}

namespace {

std::array<int, 3> parse_int_triple(const std::string& s, const char* what) {
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) vals.push_back(parse_double(item));
    if (vals.size() == 1) vals = {vals[0], vals[0], vals[0]};
    if (vals.size() != 3) throw ConfigError(std::string(what) + " needs 1 or 3 values: '" + s + "'");
    std::array<int, 3> out{};
    for (int i = 0; i < 3; ++i) {
        if (vals[i] != static_cast<int>(vals[i]))
            throw ConfigError(std::string(what) + " must be integral: '" + s + "'");
        out[i] = static_cast<int>(vals[i]);
    }
    return out;
}

} // namespace

PhantomSpec phantom_from_config(const RunConfig& c) {
    PhantomSpec spec;
    if (!c.has("phantom", "dims")) throw ConfigError("[phantom] requires dims");
    const auto d = parse_int_triple(c.get("phantom", "dims", ""), "dims");
    spec.dims = {d[0], d[1], d[2]};
    if (c.has("phantom", "spacing")) {
        const auto sp = parse_double_list(c.get("phantom", "spacing", ""), 3);
        spec.spacing = {sp[0], sp[1], sp[2]};
    }
    spec.background = c.get_double("phantom", "background", 0.0);
    // shapes apply in file order; later shapes overwrite earlier ones
    for (const auto& s : c.get_all("phantom", "sphere")) {
        const auto v = parse_double_list(s, 5);
        spec.shapes.push_back(Sphere{{v[0], v[1], v[2]}, v[3], v[4]});
    }
    for (const auto& s : c.get_all("phantom", "cuboid")) {
        const auto v = parse_double_list(s, 7);
        spec.shapes.push_back(Cuboid{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}, v[6]});
    }
    return spec;
}

std::string phantom_mask_mode(const RunConfig& c) {
    const std::string mode = c.get("phantom", "mask", "all");
    if (mode != "all" && mode != "shapes")
        throw ConfigError("phantom mask must be 'all' or 'shapes', got '" + mode + "'");
    return mode;
}

NoiseSpec noise_from_config(const RunConfig& c, std::uint64_t global_seed) {
    NoiseSpec n;
    n.sigma = c.get_double("noise", "sigma", 0.0);
    if (n.sigma < 0.0) throw ConfigError("noise sigma must be >= 0");
    n.seed = sub_seed(global_seed, "noise");
    return n;
}

TkdConfig tkd_from_config(const RunConfig& c) {
    TkdConfig cfg;
    cfg.threshold = c.get_double("tkd", "t", cfg.threshold);
    if (!(cfg.threshold > 0.0 && cfg.threshold <= 2.0 / 3.0))
        throw ConfigError("tkd threshold must be in (0, 2/3]");
    return cfg;
}

TvConfig tv_from_config(const RunConfig& c) {
    TvConfig cfg;
    cfg.lambda = c.get_double("tv", "lambda", cfg.lambda);
    cfg.iters = c.get_int("tv", "iters", cfg.iters);
    cfg.tau = c.get_double("tv", "tau", cfg.tau);
    cfg.sigma = c.get_double("tv", "sigma", cfg.sigma);
    return cfg;
}

TgvConfig tgv_from_config(const RunConfig& c) {
    TgvConfig cfg;
    cfg.alpha1 = c.get_double("tgv", "alpha1", cfg.alpha1);
    cfg.alpha0 = c.get_double("tgv", "alpha0", 2.0 * cfg.alpha1);
    cfg.iters = c.get_int("tgv", "iters", cfg.iters);
    cfg.tau = c.get_double("tgv", "tau", cfg.tau);
    cfg.sigma = c.get_double("tgv", "sigma", cfg.sigma);
    return cfg;
}

PdipConfig pdip_from_config(const RunConfig& c, std::uint64_t global_seed) {
    PdipConfig cfg;
    cfg.mu = c.get_double("pdip", "mu", cfg.mu);
    if (c.has("pdip", "patch")) cfg.patch = parse_int_triple(c.get("pdip", "patch", ""), "patch");
    if (c.has("pdip", "stride"))
        cfg.stride = parse_int_triple(c.get("pdip", "stride", ""), "stride");
    cfg.outer_iters = c.get_int("pdip", "outer_iters", cfg.outer_iters);
    cfg.inner_epochs = c.get_int("pdip", "inner_epochs", cfg.inner_epochs);
    cfg.lr = c.get_double("pdip", "lr", cfg.lr);
    cfg.tol = c.get_double("pdip", "tol", cfg.tol);
    cfg.seed = c.get_u64("pdip", "seed", sub_seed(global_seed, "pdip"));
    const std::string init = c.get("pdip", "init", "tkd");
    if (init == "zero")
        cfg.init = ChiInit::zero;
    else if (init == "tkd")
        cfg.init = ChiInit::tkd;
    else
        throw ConfigError("pdip init must be 'zero' or 'tkd', got '" + init + "'");
    const std::string mode = c.get("pdip", "grad_mode", "accumulate");
    if (mode == "accumulate")
        cfg.grad_mode = GradMode::accumulate;
    else if (mode == "per_patch")
        cfg.grad_mode = GradMode::per_patch;
    else
        throw ConfigError("pdip grad_mode must be 'accumulate' or 'per_patch', got '" + mode +
                          "'");
    return cfg;
}

NetworkSpec net_from_config(const RunConfig& c) {
    NetworkSpec spec;
    spec.levels = c.get_int("net", "levels", spec.levels);
    spec.base_channels = c.get_int("net", "base_channels", spec.base_channels);
    if (spec.levels < 1 || spec.base_channels < 1)
        throw ConfigError("[net] levels and base_channels must be positive");
    return spec;
}

std::uint64_t seed_from_config(const RunConfig& c, std::uint64_t fallback) {
    return c.get_u64("global", "seed", fallback);
}

} // namespace qsm
