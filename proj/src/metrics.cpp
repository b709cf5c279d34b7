#include "qsm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace qsm {

namespace {

constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;
constexpr int kWindowRadius = 5; // 11^3 window
constexpr double kWindowSigma = 1.5;
constexpr double kPsnrCap = 999.0;

void require_compatible(const Volume& rec, const Volume& gt, const Mask& mask) {
    if (!(rec.dims == gt.dims) || !(rec.dims == mask.dims))
        throw std::invalid_argument("metrics require matching dims");
}

double gt_range(const Volume& gt, const Mask& mask) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < gt.data.size(); ++i) {
        if (!mask.data[i]) continue;
        lo = std::min(lo, gt.data[i]);
        hi = std::max(hi, gt.data[i]);
    }
    if (!(lo <= hi)) throw std::invalid_argument("mask selects no voxels");
    return hi - lo;
}

double masked_mse(const Volume& rec, const Volume& gt, const Mask& mask) {
    double acc = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < gt.data.size(); ++i) {
        if (!mask.data[i]) continue;
        const double d = rec.data[i] - gt.data[i];
        acc += d * d;
        ++m;
    }
    if (m == 0) throw std::invalid_argument("mask selects no voxels");
    return acc / static_cast<double>(m);
}

// Separable Gaussian smoothing; the clipped window is renormalized per
// axis so constant fields stay constant at the boundary.
void smooth_axis(std::vector<double>& f, Dims d, int axis) {
    double w[2 * kWindowRadius + 1];
    for (int j = -kWindowRadius; j <= kWindowRadius; ++j)
        w[j + kWindowRadius] = std::exp(-0.5 * (j * j) / (kWindowSigma * kWindowSigma));

    const std::size_t sx = 1;
    const std::size_t sy = static_cast<std::size_t>(d.x);
    const std::size_t sz = sy * static_cast<std::size_t>(d.y);
    const std::size_t step = axis == 0 ? sx : axis == 1 ? sy : sz;
    const int n = axis == 0 ? d.x : axis == 1 ? d.y : d.z;

    std::vector<double> line(n), out(n);
    auto run_line = [&](std::size_t base) {
        for (int i = 0; i < n; ++i) line[i] = f[base + static_cast<std::size_t>(i) * step];
        for (int i = 0; i < n; ++i) {
            double acc = 0.0, norm = 0.0;
            const int lo = std::max(-kWindowRadius, -i);
            const int hi = std::min(kWindowRadius, n - 1 - i);
            for (int j = lo; j <= hi; ++j) {
                acc += w[j + kWindowRadius] * line[i + j];
                norm += w[j + kWindowRadius];
            }
            out[i] = acc / norm;
        }
        for (int i = 0; i < n; ++i) f[base + static_cast<std::size_t>(i) * step] = out[i];
    };

    if (axis == 0) {
        for (int z = 0; z < d.z; ++z)
            for (int y = 0; y < d.y; ++y) run_line(sy * y + sz * z);
    } else if (axis == 1) {
        for (int z = 0; z < d.z; ++z)
            for (int x = 0; x < d.x; ++x) run_line(sx * x + sz * z);
    } else {
        for (int y = 0; y < d.y; ++y)
            for (int x = 0; x < d.x; ++x) run_line(sx * x + sy * y);
    }
}

void smooth3(std::vector<double>& f, Dims d) {
    smooth_axis(f, d, 0);
    smooth_axis(f, d, 1);
    smooth_axis(f, d, 2);
}

} // namespace

double rmse_pct(const Volume& rec, const Volume& gt, const Mask& mask) {
    require_compatible(rec, gt, mask);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < gt.data.size(); ++i) {
        if (!mask.data[i]) continue;
        const double d = rec.data[i] - gt.data[i];
        num += d * d;
        den += gt.data[i] * gt.data[i];
    }
    if (den == 0.0) throw std::invalid_argument("ground truth is zero on the mask");
    return 100.0 * std::sqrt(num / den);
}

double psnr(const Volume& rec, const Volume& gt, const Mask& mask) {
    require_compatible(rec, gt, mask);
    const double mse = masked_mse(rec, gt, mask);
    if (mse == 0.0) return kPsnrCap;
    const double peak = gt_range(gt, mask);
    if (peak == 0.0) throw std::invalid_argument("ground truth has zero dynamic range");
    return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double ssim3d(const Volume& rec, const Volume& gt, const Mask& mask) {
    return ssim3d(rec, gt, mask, gt_range(gt, mask));
}

double ssim3d(const Volume& rec, const Volume& gt, const Mask& mask, double data_range) {
    require_compatible(rec, gt, mask);
    if (!(data_range > 0.0))
        throw std::invalid_argument("SSIM requires a positive data range");
    const double c1 = (kK1 * data_range) * (kK1 * data_range);
    const double c2 = (kK2 * data_range) * (kK2 * data_range);
    const std::size_t n = gt.data.size();

    std::vector<double> mu_x = rec.data, mu_y = gt.data;
    std::vector<double> xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        xx[i] = rec.data[i] * rec.data[i];
        yy[i] = gt.data[i] * gt.data[i];
        xy[i] = rec.data[i] * gt.data[i];
    }
    smooth3(mu_x, gt.dims);
    smooth3(mu_y, gt.dims);
    smooth3(xx, gt.dims);
    smooth3(yy, gt.dims);
    smooth3(xy, gt.dims);

    double acc = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask.data[i]) continue;
        const double var_x = xx[i] - mu_x[i] * mu_x[i];
        const double var_y = yy[i] - mu_y[i] * mu_y[i];
        const double cov = xy[i] - mu_x[i] * mu_y[i];
        const double num = (2.0 * mu_x[i] * mu_y[i] + c1) * (2.0 * cov + c2);
        const double den = (mu_x[i] * mu_x[i] + mu_y[i] * mu_y[i] + c1) * (var_x + var_y + c2);
        acc += num / den;
        ++m;
    }
    if (m == 0) throw std::invalid_argument("mask selects no voxels");
    return acc / static_cast<double>(m);
}

std::string metrics_to_csv(const std::vector<MetricReport>& rows) {
    std::string out = "method,rmse,ssim,psnr\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.2f,%.4f,%.2f\n", r.method.c_str(), r.rmse_pct,
                      r.ssim, r.psnr_db);
        out += buf;
    }
    return out;
}

void write_metrics_csv(const std::vector<MetricReport>& rows,
                       const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open metrics CSV for writing: " + path.string());
    f << metrics_to_csv(rows);
    if (!f.flush()) throw std::runtime_error("metrics CSV write failed: " + path.string());
}

} // namespace qsm
