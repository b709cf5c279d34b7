#include "qsm/volume.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

static_assert(std::endian::native == std::endian::little,
              "volume I/O assumes a little-endian host");

namespace qsm {

namespace {

void check_dims(Dims d) {
    if (d.x <= 0 || d.y <= 0 || d.z <= 0)
        throw std::invalid_argument("volume dims must be positive");
}

std::filesystem::path raw_path(const std::filesystem::path& header_path) {
    return std::filesystem::path(header_path.string() + ".f32");
}

std::string format_triplet(double a, double b, double c) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", a, b, c);
    return buf;
}

} // namespace

Volume Volume::zeros(Dims d, std::array<double, 3> sp) {
    check_dims(d);
    Volume v;
    v.dims = d;
    v.spacing = sp;
    v.data.assign(d.count(), 0.0);
    return v;
}

Mask Mask::ones(Dims d) {
    check_dims(d);
    Mask m;
    m.dims = d;
    m.data.assign(d.count(), 1);
    return m;
}

Mask Mask::from_volume(const Volume& v) {
    Mask m;
    m.dims = v.dims;
    m.data.resize(v.data.size());
    for (std::size_t i = 0; i < v.data.size(); ++i) m.data[i] = v.data[i] > 0.5 ? 1 : 0;
    return m;
}

std::size_t Mask::count_set() const {
    std::size_t n = 0;
    for (const auto b : data) n += b;
    return n;
}

Volume mask_to_volume(const Mask& m, std::array<double, 3> spacing) {
    Volume v = Volume::zeros(m.dims, spacing);
    for (std::size_t i = 0; i < m.data.size(); ++i) v.data[i] = m.data[i] ? 1.0 : 0.0;
    return v;
}

void save_volume(const Volume& v, const std::filesystem::path& header_path,
                 const std::vector<std::string>& comments) {
    check_dims(v.dims);
    if (v.data.size() != v.dims.count())
        throw std::invalid_argument("volume data length does not match dims");
    for (const double x : v.data)
        if (!std::isfinite(x))
            throw std::invalid_argument("refusing to save volume with non-finite values");

    std::ofstream hdr(header_path, std::ios::trunc);
    if (!hdr) throw std::runtime_error("cannot open header for writing: " + header_path.string());
    for (const auto& c : comments) hdr << "# " << c << "\n";
    hdr << "dims=" << v.dims.x << "," << v.dims.y << "," << v.dims.z << "\n";
    hdr << "spacing=" << format_triplet(v.spacing[0], v.spacing[1], v.spacing[2]) << "\n";
    hdr << "dtype=f32le\n";
    hdr << "order=x-fastest\n";
    if (!hdr.flush()) throw std::runtime_error("header write failed: " + header_path.string());

    std::vector<float> raw(v.data.size());
    for (std::size_t i = 0; i < v.data.size(); ++i) raw[i] = static_cast<float>(v.data[i]);
    std::ofstream out(raw_path(header_path), std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open raw file for writing: " + raw_path(header_path).string());
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * sizeof(float)));
    if (!out.flush()) throw std::runtime_error("raw write failed: " + raw_path(header_path).string());
}

Volume load_volume(const std::filesystem::path& header_path) {
    std::ifstream hdr(header_path);
    if (!hdr) throw std::runtime_error("missing volume header: " + header_path.string());

    Volume v;
    bool have_dims = false, have_spacing = false, have_dtype = false, have_order = false;
    std::string line;
    while (std::getline(hdr, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("malformed header line '" + line + "' in " + header_path.string());
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        std::istringstream iss(val);
        char sep = 0;
        if (key == "dims") {
            if (!(iss >> v.dims.x >> sep >> v.dims.y >> sep >> v.dims.z))
                throw std::runtime_error("bad dims in header: " + val);
            have_dims = true;
        } else if (key == "spacing") {
            if (!(iss >> v.spacing[0] >> sep >> v.spacing[1] >> sep >> v.spacing[2]))
                throw std::runtime_error("bad spacing in header: " + val);
            have_spacing = true;
        } else if (key == "dtype") {
            if (val != "f32le") throw std::runtime_error("unsupported dtype: " + val);
            have_dtype = true;
        } else if (key == "order") {
            if (val != "x-fastest") throw std::runtime_error("unsupported order: " + val);
            have_order = true;
        } else {
            throw std::runtime_error("unknown header key '" + key + "' in " + header_path.string());
        }
    }
    if (!have_dims || !have_spacing || !have_dtype || !have_order)
        throw std::runtime_error("incomplete volume header: " + header_path.string());
    check_dims(v.dims);

    const auto rp = raw_path(header_path);
    std::ifstream raw(rp, std::ios::binary | std::ios::ate);
    if (!raw) throw std::runtime_error("missing raw payload: " + rp.string());
    const auto bytes = static_cast<std::size_t>(raw.tellg());
    const std::size_t n = v.dims.count();
    if (bytes != n * sizeof(float)) {
        throw std::runtime_error("header/raw size mismatch for " + header_path.string() + ": header implies " +
                                 std::to_string(n * sizeof(float)) + " bytes, raw file has " +
                                 std::to_string(bytes));
    }
    raw.seekg(0);
    std::vector<float> buf(n);
    raw.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
    if (!raw) throw std::runtime_error("raw read failed: " + rp.string());
    v.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(buf[i]))
            throw std::runtime_error("non-finite value at voxel " + std::to_string(i) + " in " + rp.string());
        v.data[i] = static_cast<double>(buf[i]);
    }
    return v;
}

void export_slice(const Volume& v, Axis axis, int index, double lo, double hi,
                  const std::filesystem::path& out_path) {
    if (!(lo < hi)) throw std::invalid_argument("display window requires lo < hi");
    int w = 0, h = 0;
    switch (axis) {
        case Axis::x:
            if (index < 0 || index >= v.dims.x) throw std::out_of_range("slice index out of range");
            w = v.dims.y; h = v.dims.z;
            break;
        case Axis::y:
            if (index < 0 || index >= v.dims.y) throw std::out_of_range("slice index out of range");
            w = v.dims.x; h = v.dims.z;
            break;
        case Axis::z:
            if (index < 0 || index >= v.dims.z) throw std::out_of_range("slice index out of range");
            w = v.dims.x; h = v.dims.y;
            break;
    }

    std::vector<std::uint8_t> pix(static_cast<std::size_t>(w) * h);
    const double inv = 1.0 / (hi - lo);
    auto to_gray = [&](double val) -> std::uint8_t {
        double t = (val - lo) * inv;
        if (t < 0.0) t = 0.0;
        if (t > 1.0) t = 1.0;
        return static_cast<std::uint8_t>(std::floor(t * 255.0 + 0.5));
    };
    for (int row = 0; row < h; ++row) {
        for (int col = 0; col < w; ++col) {
            double val = 0.0;
            switch (axis) {
                case Axis::x: val = v.at(index, col, row); break;
                case Axis::y: val = v.at(col, index, row); break;
                case Axis::z: val = v.at(col, row, index); break;
            }
            pix[static_cast<std::size_t>(row) * w + col] = to_gray(val);
        }
    }

    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open image for writing: " + out_path.string());
    out << "P5\n" << w << " " << h << "\n255\n";
    out.write(reinterpret_cast<const char*>(pix.data()), static_cast<std::streamsize>(pix.size()));
    if (!out.flush()) throw std::runtime_error("image write failed: " + out_path.string());
}

} // namespace qsm
