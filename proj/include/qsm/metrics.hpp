#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qsm/volume.hpp"

namespace qsm {

struct MetricReport {
    std::string method;
    double rmse_pct = 0.0;
    double ssim = 0.0;
    double psnr_db = 0.0;
};

// Normalized percent RMSE: 100 * ||rec - gt|| / ||gt|| over masked voxels.
// The ground truth must not be identically zero on the mask.
double rmse_pct(const Volume& rec, const Volume& gt, const Mask& mask);

// 10*log10(peak^2/MSE) with peak = max(gt) - min(gt) over the mask;
// an exact match reports the 999 dB serialization cap.
double psnr(const Volume& rec, const Volume& gt, const Mask& mask);

// Mean 3D SSIM over masked voxels: Gaussian window sigma 1.5 truncated to
// 11^3 (renormalized where clipped at volume boundaries), K1 = 0.01,
// K2 = 0.03, data range = max(gt) - min(gt) over the mask.
double ssim3d(const Volume& rec, const Volume& gt, const Mask& mask);
double ssim3d(const Volume& rec, const Volume& gt, const Mask& mask, double data_range);

// CSV with header `method,rmse,ssim,psnr`; rmse/psnr use two decimals,
// ssim four.
std::string metrics_to_csv(const std::vector<MetricReport>& rows);
void write_metrics_csv(const std::vector<MetricReport>& rows,
                       const std::filesystem::path& path);

} // namespace qsm
