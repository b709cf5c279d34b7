#pragma once

#include <cstdint>
#include <vector>

#include "qsm/neural.hpp"
#include "qsm/patchwork.hpp"
#include "qsm/spectral.hpp"

namespace qsm {

enum class ChiInit { zero, tkd };

// Weight-update schedule for the denoising step. `accumulate` sums the
// patch gradients and takes one ADAM step per epoch; `per_patch` steps
// after every patch. Accumulated gradients keep the shared weights from
// receiving contradictory per-patch pulls and remain stable at practical
// learning rates, so they are the default.
enum class GradMode { accumulate, per_patch };

struct PdipConfig {
    double mu = 0.1;
    std::array<int, 3> patch{16, 16, 16};
    std::array<int, 3> stride{8, 8, 8};
    int outer_iters = 20;  // K
    int inner_epochs = 25; // E per outer iteration
    double lr = 1e-3;
    double tol = 1e-4;     // relative chi change
    std::uint64_t seed = 0;
    ChiInit init = ChiInit::tkd;
    GradMode grad_mode = GradMode::accumulate;
};

struct PdipHistoryRow {
    int iter = 0;
    double objective = 0.0;
    double rel_change = 0.0;
};

// Alternating-minimization state. Noise inputs are generated once at
// construction and never regenerated during a solve.
struct PdipState {
    Volume chi;
    Parameters theta;
    AdamState adam;
    std::vector<Tensor> noise_inputs;
    int outer_iter = 0;
    std::vector<PdipHistoryRow> history;
};

struct PdipResult {
    Volume chi;
    Parameters theta;
    std::vector<PdipHistoryRow> history;
};

// Patch penalty sum_ijk ||W_ijk (R_ijk(chi) - out_ijk)||^2 for given
// network outputs.
double patch_penalty(const Volume& chi, const PatchSet& outputs, const PatchGrid& grid,
                     const WeightField& wf);

// Full objective: ||phi - A chi||^2 + mu * patch_penalty.
double pdip_objective(const Volume& chi, const Volume& phi, const DipoleKernel& k,
                      double mu, const PatchGrid& grid, const WeightField& wf,
                      const PatchSet& outputs);

// Denoising step: E epochs of ADAM on the weighted patch-fitting loss
// against the (fixed) current chi, visiting patches in grid order. The
// update schedule follows `mode`. Warm-starts from state.theta; E = 0 is a
// no-op.
void denoise_step(const UNet& net, PdipState& state, const PatchGrid& grid,
                  const WeightField& wf, int epochs,
                  GradMode mode = GradMode::accumulate);

// Exact minimizer of ||phi - A chi||^2 + mu ||chi - xbar||^2 in k-space:
// chihat = (d*phihat + mu*xbarhat) / (d^2 + mu).
Volume inversion_step(const Volume& phi, const DipoleKernel& k, double mu,
                      const Volume& xbar);

// Network forward over all patches with the current weights.
PatchSet predict_patches(const UNet& net, const PdipState& state);

// Full alternating minimization; deterministic in (config, seed).
PdipResult pdip_run(const Volume& phi, const DipoleKernel& k, const PdipConfig& cfg,
                    const NetworkSpec& netspec);

} // namespace qsm
