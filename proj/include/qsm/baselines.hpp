#pragma once

#include <functional>
#include <vector>

#include "qsm/spectral.hpp"
#include "qsm/volume.hpp"

namespace qsm {

// Thresholded k-space division (Shmueli variant): bins with |d| < t divide
// by t*sign(d) instead, sign(0) = +1; the DC bin of the result is zeroed.
struct TkdConfig {
    double threshold = 0.2; // in (0, 2/3]
};

// Primal-dual (Chambolle-Pock) solver for
//   min_chi 1/2 ||A chi - phi||^2 + lambda ||grad chi||_{2,1}.
// Forward differences with Neumann boundary; the quadratic data term is
// proximally solved exactly in k-space. Step sizes must satisfy
// tau*sigma*12 <= 1.
struct TvConfig {
    double lambda = 1e-3;
    int iters = 500;
    double tau = 0.28867513459481287;   // 1/sqrt(12)
    double sigma = 0.28867513459481287;
};

// Second-order TGV: min over (chi, w) of
//   1/2 ||A chi - phi||^2 + alpha1 ||grad chi - w||_{2,1} + alpha0 ||E(w)||_{2,1}
// with E the symmetrized gradient. Step sizes must satisfy tau*sigma*24 <= 1.
struct TgvConfig {
    double alpha1 = 1e-3;
    double alpha0 = 2e-3; // defaults to 2*alpha1
    int iters = 500;
    double tau = 0.2041241452319315;    // 1/sqrt(24)
    double sigma = 0.2041241452319315;
};

Volume recon_tkd(const Volume& phi, const DipoleKernel& k, const TkdConfig& cfg);

// history, when non-null, records the objective every 10 iterations.
Volume recon_tv(const Volume& phi, const DipoleKernel& k, const TvConfig& cfg,
                std::vector<double>* history = nullptr);
Volume recon_tgv(const Volume& phi, const DipoleKernel& k, const TgvConfig& cfg,
                 std::vector<double>* history = nullptr);

// Evaluates RMSE against ground truth for every grid value and returns the
// argmin; ties go to the smaller parameter value.
struct SearchResult {
    double param = 0.0;
    double rmse_pct = 0.0;
    Volume recon;
};

SearchResult param_search(const std::function<Volume(double)>& reconstruct,
                          const std::vector<double>& grid, const Volume& ground_truth,
                          const Mask& mask);

} // namespace qsm
