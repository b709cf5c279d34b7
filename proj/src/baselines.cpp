#include "qsm/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "qsm/gradops.hpp"
#include "qsm/metrics.hpp"

namespace qsm {

namespace {

constexpr double kGradNormSq = 12.0; // ||grad3||^2 bound, forward differences in 3D
constexpr double kTgvNormSq = 24.0;  // bound for the stacked TGV operator

Spectrum spectrum_of(const std::vector<double>& re, Dims dims) {
    Volume v;
    v.dims = dims;
    v.data = re;
    return dft3(v);
}

// 1/2 ||A chi - phi||^2 evaluated in k-space via Parseval.
double fidelity_from_spectra(const std::vector<std::complex<double>>& chihat,
                             const std::vector<std::complex<double>>& phihat,
                             const std::vector<double>& d) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const std::complex<double> r = d[i] * chihat[i] - phihat[i];
        acc += std::norm(r);
    }
    return 0.5 * acc / static_cast<double>(d.size());
}

double isotropic_l1(const VecField& g) {
    double acc = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i)
        acc += std::sqrt(g.x[i] * g.x[i] + g.y[i] * g.y[i] + g.z[i] * g.z[i]);
    return acc;
}

double weighted_l1(const SymField& e) {
    double acc = 0.0;
    for (std::size_t i = 0; i < e.xx.size(); ++i)
        acc += std::sqrt(e.xx[i] * e.xx[i] + e.yy[i] * e.yy[i] + e.zz[i] * e.zz[i] +
                         2.0 * (e.xy[i] * e.xy[i] + e.xz[i] * e.xz[i] + e.yz[i] * e.yz[i]));
    return acc;
}

} // namespace

Volume recon_tkd(const Volume& phi, const DipoleKernel& k, const TkdConfig& cfg) {
    if (!(phi.dims == k.dims)) throw std::invalid_argument("dims mismatch in recon_tkd");
    if (!(cfg.threshold > 0.0 && cfg.threshold <= 2.0 / 3.0))
        throw std::invalid_argument("TKD threshold must be in (0, 2/3]");

    Spectrum s = dft3(phi);
    const double t = cfg.threshold;
    for (std::size_t i = 0; i < s.data.size(); ++i) {
        const double d = k.d[i];
        const double dt = std::abs(d) >= t ? d : (d < 0.0 ? -t : t);
        s.data[i] /= dt;
    }
    s.data[0] = 0.0; // zero-mean convention
    return real_part(idft3(s), phi.spacing);
}

Volume recon_tv(const Volume& phi, const DipoleKernel& k, const TvConfig& cfg,
                std::vector<double>* history) {
    if (!(phi.dims == k.dims)) throw std::invalid_argument("dims mismatch in recon_tv");
    if (!(cfg.lambda > 0.0)) throw std::invalid_argument("TV lambda must be positive");
    if (cfg.iters < 1) throw std::invalid_argument("TV needs at least one iteration");
    if (!(cfg.tau > 0.0 && cfg.sigma > 0.0) ||
        cfg.tau * cfg.sigma * kGradNormSq > 1.0 + 1e-9)
        throw std::invalid_argument("TV step sizes violate tau*sigma*||grad||^2 <= 1");

    const Dims dims = phi.dims;
    const std::size_t n = dims.count();
    const auto phihat = dft3(phi).data;
    std::vector<std::complex<double>> dphihat(n);
    std::vector<double> denom(n);
    for (std::size_t i = 0; i < n; ++i) {
        dphihat[i] = k.d[i] * phihat[i];
        denom[i] = 1.0 + cfg.tau * k.d[i] * k.d[i];
    }

    std::vector<double> chi(n, 0.0), chibar(n, 0.0);
    VecField y = VecField::zeros(dims);

    for (int it = 1; it <= cfg.iters; ++it) {
        // dual ascent + projection onto |y| <= lambda
        const VecField g = grad3(chibar, dims);
        for (std::size_t i = 0; i < n; ++i) {
            double yx = y.x[i] + cfg.sigma * g.x[i];
            double yy = y.y[i] + cfg.sigma * g.y[i];
            double yz = y.z[i] + cfg.sigma * g.z[i];
            const double mag = std::sqrt(yx * yx + yy * yy + yz * yz);
            if (mag > cfg.lambda) {
                const double sc = cfg.lambda / mag;
                yx *= sc;
                yy *= sc;
                yz *= sc;
            }
            y.x[i] = yx;
            y.y[i] = yy;
            y.z[i] = yz;
        }
        // primal: exact k-space prox of the data term
        std::vector<double> v = div3(y);
        for (std::size_t i = 0; i < n; ++i) v[i] = chi[i] + cfg.tau * v[i];
        Spectrum vhat = spectrum_of(v, dims);
        for (std::size_t i = 0; i < n; ++i)
            vhat.data[i] = (vhat.data[i] + cfg.tau * dphihat[i]) / denom[i];
        const Volume chi_new_v = real_part(idft3(vhat), phi.spacing);
        const std::vector<double>& chi_new = chi_new_v.data;
        for (std::size_t i = 0; i < n; ++i) chibar[i] = 2.0 * chi_new[i] - chi[i];
        chi = chi_new;

        if (history && it % 10 == 0) {
            const double fid = fidelity_from_spectra(vhat.data, phihat, k.d);
            history->push_back(fid + cfg.lambda * isotropic_l1(grad3(chi, dims)));
        }
    }

    Volume out;
    out.dims = dims;
    out.spacing = phi.spacing;
    out.data = std::move(chi);
    return out;
}

Volume recon_tgv(const Volume& phi, const DipoleKernel& k, const TgvConfig& cfg,
                 std::vector<double>* history) {
    if (!(phi.dims == k.dims)) throw std::invalid_argument("dims mismatch in recon_tgv");
    if (!(cfg.alpha1 > 0.0 && cfg.alpha0 > 0.0))
        throw std::invalid_argument("TGV weights must be positive");
    if (cfg.iters < 1) throw std::invalid_argument("TGV needs at least one iteration");
    if (!(cfg.tau > 0.0 && cfg.sigma > 0.0) ||
        cfg.tau * cfg.sigma * kTgvNormSq > 1.0 + 1e-9)
        throw std::invalid_argument("TGV step sizes violate the stability bound");

    const Dims dims = phi.dims;
    const std::size_t n = dims.count();
    const auto phihat = dft3(phi).data;
    std::vector<std::complex<double>> dphihat(n);
    std::vector<double> denom(n);
    for (std::size_t i = 0; i < n; ++i) {
        dphihat[i] = k.d[i] * phihat[i];
        denom[i] = 1.0 + cfg.tau * k.d[i] * k.d[i];
    }

    std::vector<double> chi(n, 0.0), chibar(n, 0.0);
    VecField w = VecField::zeros(dims), wbar = VecField::zeros(dims);
    VecField p = VecField::zeros(dims);
    SymField q = SymField::zeros(dims);

    for (int it = 1; it <= cfg.iters; ++it) {
        // dual on grad(chi) - w
        const VecField g = grad3(chibar, dims);
        for (std::size_t i = 0; i < n; ++i) {
            double px = p.x[i] + cfg.sigma * (g.x[i] - wbar.x[i]);
            double py = p.y[i] + cfg.sigma * (g.y[i] - wbar.y[i]);
            double pz = p.z[i] + cfg.sigma * (g.z[i] - wbar.z[i]);
            const double mag = std::sqrt(px * px + py * py + pz * pz);
            if (mag > cfg.alpha1) {
                const double sc = cfg.alpha1 / mag;
                px *= sc;
                py *= sc;
                pz *= sc;
            }
            p.x[i] = px;
            p.y[i] = py;
            p.z[i] = pz;
        }
        // dual on E(w)
        const SymField e = sym_grad(wbar);
        for (std::size_t i = 0; i < n; ++i) {
            double qxx = q.xx[i] + cfg.sigma * e.xx[i];
            double qyy = q.yy[i] + cfg.sigma * e.yy[i];
            double qzz = q.zz[i] + cfg.sigma * e.zz[i];
            double qxy = q.xy[i] + cfg.sigma * e.xy[i];
            double qxz = q.xz[i] + cfg.sigma * e.xz[i];
            double qyz = q.yz[i] + cfg.sigma * e.yz[i];
            const double mag = std::sqrt(qxx * qxx + qyy * qyy + qzz * qzz +
                                         2.0 * (qxy * qxy + qxz * qxz + qyz * qyz));
            if (mag > cfg.alpha0) {
                const double sc = cfg.alpha0 / mag;
                qxx *= sc;
                qyy *= sc;
                qzz *= sc;
                qxy *= sc;
                qxz *= sc;
                qyz *= sc;
            }
            q.xx[i] = qxx;
            q.yy[i] = qyy;
            q.zz[i] = qzz;
            q.xy[i] = qxy;
            q.xz[i] = qxz;
            q.yz[i] = qyz;
        }
        // primal chi: exact k-space prox
        std::vector<double> v = div3(p);
        for (std::size_t i = 0; i < n; ++i) v[i] = chi[i] + cfg.tau * v[i];
        Spectrum vhat = spectrum_of(v, dims);
        for (std::size_t i = 0; i < n; ++i)
            vhat.data[i] = (vhat.data[i] + cfg.tau * dphihat[i]) / denom[i];
        const Volume chi_new_v = real_part(idft3(vhat), phi.spacing);
        const std::vector<double>& chi_new = chi_new_v.data;
        // primal w: w += tau*(p + sym_div(q))
        const VecField sd = sym_div(q);
        for (std::size_t i = 0; i < n; ++i) {
            const double wx = w.x[i] + cfg.tau * (p.x[i] + sd.x[i]);
            const double wy = w.y[i] + cfg.tau * (p.y[i] + sd.y[i]);
            const double wz = w.z[i] + cfg.tau * (p.z[i] + sd.z[i]);
            wbar.x[i] = 2.0 * wx - w.x[i];
            wbar.y[i] = 2.0 * wy - w.y[i];
            wbar.z[i] = 2.0 * wz - w.z[i];
            w.x[i] = wx;
            w.y[i] = wy;
            w.z[i] = wz;
        }
        for (std::size_t i = 0; i < n; ++i) chibar[i] = 2.0 * chi_new[i] - chi[i];
        chi = chi_new;

        if (history && it % 10 == 0) {
            const double fid = fidelity_from_spectra(vhat.data, phihat, k.d);
            VecField gc = grad3(chi, dims);
            for (std::size_t i = 0; i < n; ++i) {
                gc.x[i] -= w.x[i];
                gc.y[i] -= w.y[i];
                gc.z[i] -= w.z[i];
            }
            history->push_back(fid + cfg.alpha1 * isotropic_l1(gc) +
                               cfg.alpha0 * weighted_l1(sym_grad(w)));
        }
    }

    Volume out;
    out.dims = dims;
    out.spacing = phi.spacing;
    out.data = std::move(chi);
    return out;
}

SearchResult param_search(const std::function<Volume(double)>& reconstruct,
                          const std::vector<double>& grid, const Volume& ground_truth,
                          const Mask& mask) {
    if (grid.empty()) throw std::invalid_argument("parameter grid is empty");
    SearchResult best;
    bool first = true;
    for (const double param : grid) {
        Volume rec = reconstruct(param);
        const double err = rmse_pct(rec, ground_truth, mask);
        if (first || err < best.rmse_pct ||
            (err == best.rmse_pct && param < best.param)) {
            best.param = param;
            best.rmse_pct = err;
            best.recon = std::move(rec);
            first = false;
        }
    }
    return best;
}

} // namespace qsm
