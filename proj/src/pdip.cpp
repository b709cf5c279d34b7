#include "qsm/pdip.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qsm/baselines.hpp"
#include "qsm/kernels.hpp"
#include "qsm/rng.hpp"

namespace qsm {

namespace {

// Squared patch weights (1/coverage) per patch, in grid order.
PatchSet squared_weights(const PatchGrid& grid, const WeightField& wf) {
    Volume w2;
    w2.dims = wf.dims;
    w2.data.resize(wf.coverage.size());
    for (std::size_t i = 0; i < wf.coverage.size(); ++i) w2.data[i] = 1.0 / wf.coverage[i];
    return extract(w2, grid);
}

Tensor patch_tensor(const PatchGrid& grid) {
    return Tensor::zeros(1, grid.patch[0], grid.patch[1], grid.patch[2]);
}

} // namespace

double patch_penalty(const Volume& chi, const PatchSet& outputs, const PatchGrid& grid,
                     const WeightField& wf) {
    if (outputs.size() != grid.patch_count())
        throw std::invalid_argument("output count does not match patch grid");
    const PatchSet targets = extract(chi, grid);
    const PatchSet w2 = squared_weights(grid, wf);
    double acc = 0.0;
    for (std::size_t p = 0; p < targets.size(); ++p) {
        const auto& t = targets[p];
        const auto& o = outputs[p];
        const auto& w = w2[p];
        if (o.size() != t.size()) throw std::invalid_argument("patch output shape mismatch");
        for (std::size_t q = 0; q < t.size(); ++q) {
            const double r = t[q] - o[q];
            acc += w[q] * r * r;
        }
    }
    return acc;
}

double pdip_objective(const Volume& chi, const Volume& phi, const DipoleKernel& k,
                      double mu, const PatchGrid& grid, const WeightField& wf,
                      const PatchSet& outputs) {
    const Volume pred = forward_field(chi, k);
    double fid = 0.0;
    for (std::size_t i = 0; i < phi.data.size(); ++i) {
        const double r = phi.data[i] - pred.data[i];
        fid += r * r;
    }
    return fid + mu * patch_penalty(chi, outputs, grid, wf);
}

void denoise_step(const UNet& net, PdipState& state, const PatchGrid& grid,
                  const WeightField& wf, int epochs, GradMode mode) {
    if (epochs < 0) throw std::invalid_argument("epoch count must be >= 0");
    if (epochs == 0) return;
    if (state.noise_inputs.size() != grid.patch_count())
        throw std::invalid_argument("noise input count does not match patch grid");

    const PatchSet targets = extract(state.chi, grid);
    const PatchSet w2 = squared_weights(grid, wf);

    UNet::Cache cache;
    Gradients grads = Gradients::zeros_like(state.theta);
    Tensor g_out = patch_tensor(grid);

    for (int e = 0; e < epochs; ++e) {
        if (mode == GradMode::accumulate) grads.zero();
        for (std::size_t p = 0; p < grid.patch_count(); ++p) {
            const Tensor& out = net.forward(state.theta, state.noise_inputs[p], cache);
            // d/d(out) of ||W(R chi - out)||^2
            for (std::size_t q = 0; q < out.data.size(); ++q)
                g_out.data[q] = 2.0 * w2[p][q] * (out.data[q] - targets[p][q]);
            if (mode == GradMode::per_patch) {
                grads.zero();
                net.backward(state.theta, cache, g_out, grads);
                adam_step(state.adam, state.theta, grads);
            } else {
                net.backward(state.theta, cache, g_out, grads);
            }
        }
        if (mode == GradMode::accumulate) adam_step(state.adam, state.theta, grads);
    }
}

Volume inversion_step(const Volume& phi, const DipoleKernel& k, double mu,
                      const Volume& xbar) {
    if (!(mu > 0.0)) throw std::invalid_argument("inversion step requires mu > 0");
    if (!(phi.dims == k.dims) || !(xbar.dims == k.dims))
        throw std::invalid_argument("dims mismatch in inversion_step");

    const Spectrum phihat = dft3(phi);
    Spectrum xhat = dft3(xbar);
    for (std::size_t i = 0; i < xhat.data.size(); ++i) {
        const double d = k.d[i];
        xhat.data[i] = (d * phihat.data[i] + mu * xhat.data[i]) / (d * d + mu);
    }
    return real_part(idft3(xhat), phi.spacing);
}

PatchSet predict_patches(const UNet& net, const PdipState& state) {
    PatchSet outputs(state.noise_inputs.size());
    UNet::Cache cache;
    for (std::size_t p = 0; p < state.noise_inputs.size(); ++p) {
        const Tensor& out = net.forward(state.theta, state.noise_inputs[p], cache);
        outputs[p] = out.data;
    }
    return outputs;
}

PdipResult pdip_run(const Volume& phi, const DipoleKernel& k, const PdipConfig& cfg,
                    const NetworkSpec& netspec) {
    if (!(cfg.mu > 0.0)) throw std::invalid_argument("mu must be positive");
    if (cfg.outer_iters < 1) throw std::invalid_argument("need at least one outer iteration");
    const int div = 1 << netspec.levels;
    for (int a = 0; a < 3; ++a)
        if (cfg.patch[a] % div)
            throw std::invalid_argument("patch size must be divisible by 2^levels");

    const PatchGrid grid = plan_patches(phi.dims, cfg.patch, cfg.stride);
    const WeightField wf = coverage(grid);
    const UNet net(netspec);

    PdipState state;
    state.theta = net.init_params(sub_seed(cfg.seed, "theta"));
    state.adam = AdamState::init(state.theta, cfg.lr);
    state.noise_inputs = make_noise_inputs(grid, sub_seed(cfg.seed, "z"));
    state.chi = cfg.init == ChiInit::zero ? Volume::zeros(phi.dims, phi.spacing)
                                          : recon_tkd(phi, k, TkdConfig{});

    for (int it = 1; it <= cfg.outer_iters; ++it) {
        state.outer_iter = it;
        denoise_step(net, state, grid, wf, cfg.inner_epochs, cfg.grad_mode);

        const PatchSet outputs = predict_patches(net, state);
        const double obj_before = pdip_objective(state.chi, phi, k, cfg.mu, grid, wf, outputs);
        const Volume xbar = aggregate(outputs, grid, wf, phi.spacing);
        Volume chi_new = inversion_step(phi, k, cfg.mu, xbar);
        const double obj_after = pdip_objective(chi_new, phi, k, cfg.mu, grid, wf, outputs);

        if (!std::isfinite(obj_after))
            throw std::runtime_error("pdip aborted: objective diverged (non-finite) at outer iteration " +
                                     std::to_string(it));
        // the inversion step is an exact partial minimizer in chi
        if (obj_after > obj_before * (1.0 + 1e-9) + 1e-12)
            throw std::runtime_error("pdip invariant violated: objective increased across inversion step");

        const double num = [&] {
            double acc = 0.0;
            for (std::size_t i = 0; i < chi_new.data.size(); ++i) {
                const double d = chi_new.data[i] - state.chi.data[i];
                acc += d * d;
            }
            return std::sqrt(acc);
        }();
        const double den = std::sqrt(kern::sumsq(state.chi.data.data(), state.chi.data.size()));
        const double rel = den > 0.0 ? num / den
                                     : (num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());

        state.chi = std::move(chi_new);
        state.history.push_back({it, obj_after, rel});
        if (rel < cfg.tol) break;
    }

    return {std::move(state.chi), std::move(state.theta), std::move(state.history)};
}

} // namespace qsm
