#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qsm/baselines.hpp"
#include "qsm/gradops.hpp"
#include "qsm/metrics.hpp"
#include "qsm/phantom.hpp"
#include "qsm/rng.hpp"

using namespace qsm;

namespace {

Volume random_volume(Dims d, std::uint64_t seed) {
    Rng rng(seed);
    Volume v = Volume::zeros(d);
    for (auto& x : v.data) x = rng.uniform(-1.0, 1.0);
    return v;
}

// zero out all spectral bins with |d| < t (the DC bin always goes)
Volume band_project(const Volume& v, const DipoleKernel& k, double t) {
    Spectrum s = dft3(v);
    for (std::size_t i = 0; i < s.data.size(); ++i)
        if (std::abs(k.d[i]) < t) s.data[i] = 0.0;
    return real_part(idft3(s), v.spacing);
}

double vol_norm(const Volume& v) {
    double acc = 0.0;
    for (const double x : v.data) acc += x * x;
    return std::sqrt(acc);
}

VecField random_field(Dims d, std::uint64_t seed) {
    Rng rng(seed);
    VecField f = VecField::zeros(d);
    for (auto& x : f.x) x = rng.uniform(-1.0, 1.0);
    for (auto& x : f.y) x = rng.uniform(-1.0, 1.0);
    for (auto& x : f.z) x = rng.uniform(-1.0, 1.0);
    return f;
}

} // namespace

TEST_CASE("grad3/div3 satisfy the adjoint identity <grad u, p> = -<u, div p>") {
    const Dims d{5, 6, 4};
    const Volume u = random_volume(d, 1);
    const VecField p = random_field(d, 2);
    const VecField g = grad3(u.data, d);
    const auto dv = div3(p);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < u.data.size(); ++i) {
        lhs += g.x[i] * p.x[i] + g.y[i] * p.y[i] + g.z[i] * p.z[i];
        rhs -= u.data[i] * dv[i];
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("sym_grad/sym_div satisfy the weighted adjoint identity") {
    const Dims d{5, 4, 6};
    const VecField w = random_field(d, 3);
    Rng rng(4);
    SymField q = SymField::zeros(d);
    for (auto* comp : {&q.xx, &q.yy, &q.zz, &q.xy, &q.xz, &q.yz})
        for (auto& x : *comp) x = rng.uniform(-1.0, 1.0);

    const SymField e = sym_grad(w);
    const VecField sd = sym_div(q);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < w.x.size(); ++i) {
        lhs += e.xx[i] * q.xx[i] + e.yy[i] * q.yy[i] + e.zz[i] * q.zz[i] +
               2.0 * (e.xy[i] * q.xy[i] + e.xz[i] * q.xz[i] + e.yz[i] * q.yz[i]);
        rhs -= w.x[i] * sd.x[i] + w.y[i] * sd.y[i] + w.z[i] * sd.z[i];
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("grad3 operator norm is within the sqrt(12) bound on random fields") {
    const Dims d{6, 6, 6};
    for (int trial = 0; trial < 5; ++trial) {
        const Volume u = random_volume(d, 10 + trial);
        const VecField g = grad3(u.data, d);
        double gn = 0.0, un = 0.0;
        for (std::size_t i = 0; i < u.data.size(); ++i) {
            gn += g.x[i] * g.x[i] + g.y[i] * g.y[i] + g.z[i] * g.z[i];
            un += u.data[i] * u.data[i];
        }
        CHECK(gn <= 12.0 * un);
    }
}

TEST_CASE("recon_tkd maps zero phase to zero") {
    const Dims d{8, 8, 8};
    const DipoleKernel k = build_dipole_kernel(d, {1.0, 1.0, 1.0});
    const Volume rec = recon_tkd(Volume::zeros(d), k, TkdConfig{});
    CHECK(vol_norm(rec) <= 1e-14);
}

TEST_CASE("recon_tkd recovers a band-projected ground truth exactly") {
    const Dims d{16, 16, 16};
    const DipoleKernel k = build_dipole_kernel(d, {1.0, 1.0, 1.0});
    const double t = 0.2;
    const Volume chi_proj = band_project(random_volume(d, 20), k, t);
    const Volume phi = forward_field(chi_proj, k);
    const Volume rec = recon_tkd(phi, k, TkdConfig{t});
    CHECK(oracle::rel_err(rec.data, chi_proj.data) <= 1e-10);
}

TEST_CASE("recon_tkd at t = 2/3 matches direct formula evaluation") {
    const Dims d{8, 8, 8};
    const DipoleKernel k = build_dipole_kernel(d, {1.0, 1.0, 1.0});
    const Volume phi = random_volume(d, 30);
    const double t = 2.0 / 3.0;
    const Volume rec = recon_tkd(phi, k, TkdConfig{t});

    Spectrum s = dft3(phi);
    for (std::size_t i = 0; i < s.data.size(); ++i) {
        const double dv = k.d[i];
        const double dt = std::abs(dv) >= t ? dv : (dv < 0.0 ? -t : t);
        s.data[i] /= dt;
    }
    s.data[0] = 0.0;
    const Volume want = real_part(idft3(s), phi.spacing);
    CHECK(oracle::rel_err(rec.data, want.data) <= 1e-12);
}

TEST_CASE("recon_tkd is idempotent on its own band-projected outputs") {
    const Dims d{12, 12, 12};
    const DipoleKernel k = build_dipole_kernel(d, {1.0, 1.0, 1.0});
    const TkdConfig cfg{0.2};
    const Volume rec1 = band_project(recon_tkd(random_volume(d, 31), k, cfg), k, cfg.threshold);
    const Volume rec2 = recon_tkd(forward_field(rec1, k), k, cfg);
    CHECK(oracle::rel_err(rec2.data, rec1.data) <= 1e-10);
}

TEST_CASE("recon_tkd rejects thresholds outside (0, 2/3]") {
    const Dims d{4, 4, 4};
    const DipoleKernel k = build_dipole_kernel(d, {1.0, 1.0, 1.0});
    CHECK_THROWS_AS(recon_tkd(Volume::zeros(d), k, TkdConfig{0.0}), std::invalid_argument);
    CHECK_THROWS_AS(recon_tkd(Volume::zeros(d), k, TkdConfig{0.7}), std::invalid_argument);
}

TEST_CASE("recon_tv: zero phase converges to zero") {
    const Dims d{8, 8, 8};
    const DipoleKernel k = build_dipole_kernel(d, {1.0, 1.0, 1.0});
    TvConfig cfg;
    cfg.lambda = 1e-3;
    cfg.iters = 50;
    const Volume rec = recon_tv(Volume::zeros(d), k, cfg);
    CHECK(vol_norm(rec) <= 1e-8);
}

TEST_CASE("recon_tv with vanishing lambda reaches least-squares stationarity") {
    const Dims d{16, 16, 16};
    const DipoleKernel k = build_dipole_kernel(d, {1.0, 1.0, 1.0});
    // band-limited data so every active bin contracts at a healthy rate
    const Volume chi = band_project(random_volume(d, 40), k, 0.15);
    const Volume phi = forward_field(chi, k);

    TvConfig cfg;
    cfg.lambda = 1e-12;
    cfg.iters = 3000;
    const Volume rec = recon_tv(phi, k, cfg);

    Volume resid = forward_field(rec, k);
    for (std::size_t i = 0; i < resid.data.size(); ++i) resid.data[i] -= phi.data[i];
    const Volume grad_data = adjoint_field(resid, k);
    const Volume atphi = adjoint_field(phi, k);
    CHECK(vol_norm(grad_data) / vol_norm(atphi) <= 1e-3);
}

TEST_CASE("recon_tv objective trend is non-increasing between samples") {
    PhantomSpec spec;
    spec.dims = {24, 24, 24};
    spec.shapes.push_back(Sphere{{12.0, 12.0, 12.0}, 4.0, 0.5});
    const Volume chi = rasterize(spec);
    const DipoleKernel k = build_dipole_kernel(spec.dims, {1.0, 1.0, 1.0});
    const Volume phi = add_noise(forward_field(chi, k), {0.01, 99});

    TvConfig cfg;
    cfg.lambda = 2e-3;
    cfg.iters = 300;
    std::vector<double> history;
    recon_tv(phi, k, cfg, &history);
    REQUIRE(history.size() == 30);
    for (std::size_t i = 1; i < history.size(); ++i)
        CHECK(history[i] <= history[i - 1] * (1.0 + 1e-10) + 1e-12);
}

TEST_CASE("recon_tv rejects unstable step sizes") {
    const Dims d{4, 4, 4};
    const DipoleKernel k = build_dipole_kernel(d, {1.0, 1.0, 1.0});
    TvConfig cfg;
    cfg.tau = 1.0;
    cfg.sigma = 1.0; // tau*sigma*12 = 12 > 1
    CHECK_THROWS_AS(recon_tv(Volume::zeros(d), k, cfg), std::invalid_argument);
}

TEST_CASE("recon_tgv: zero phase converges to zero") {
    const Dims d{8, 8, 8};
    const DipoleKernel k = build_dipole_kernel(d, {1.0, 1.0, 1.0});
    TgvConfig cfg;
    cfg.iters = 50;
    const Volume rec = recon_tgv(Volume::zeros(d), k, cfg);
    CHECK(vol_norm(rec) <= 1e-8);
}

TEST_CASE("recon_tgv approaches the TV solution as alpha0 grows large") {
    const Dims d{16, 16, 16};
    const DipoleKernel k = build_dipole_kernel(d, {1.0, 1.0, 1.0});
    PhantomSpec spec;
    spec.dims = d;
    spec.shapes.push_back(Sphere{{8.0, 8.0, 8.0}, 3.0, 0.5});
    const Volume phi = add_noise(forward_field(rasterize(spec), k), {0.005, 7});

    const double lam = 2e-3;
    TvConfig tv;
    tv.lambda = lam;
    tv.iters = 1500;
    const Volume tv_sol = recon_tv(phi, k, tv);

    TgvConfig tgv;
    tgv.alpha1 = lam;
    tgv.alpha0 = 1e6;
    tgv.iters = 1500;
    const Volume tgv_sol = recon_tgv(phi, k, tgv);

    double diff = 0.0;
    for (std::size_t i = 0; i < tv_sol.data.size(); ++i) {
        const double r = tv_sol.data[i] - tgv_sol.data[i];
        diff += r * r;
    }
    CHECK(std::sqrt(diff) <= 0.01 * vol_norm(tv_sol));
}

TEST_CASE("TGV penalizes an affine ramp less than TV does") {
    const Dims d{12, 12, 12};
    std::vector<double> ramp(d.count());
    std::size_t i = 0;
    for (int z = 0; z < d.z; ++z)
        for (int y = 0; y < d.y; ++y)
            for (int x = 0; x < d.x; ++x, ++i) ramp[i] = 0.05 * x + 0.03 * y - 0.02 * z;

    const double lam = 1e-3;
    const VecField g = grad3(ramp, d);
    double tv_value = 0.0;
    for (std::size_t j = 0; j < g.x.size(); ++j)
        tv_value += lam * std::sqrt(g.x[j] * g.x[j] + g.y[j] * g.y[j] + g.z[j] * g.z[j]);

    // TGV value at the feasible point w = grad(ramp): first term vanishes,
    // only the symmetrized gradient of w (boundary planes) remains
    const SymField e = sym_grad(g);
    double tgv_value = 0.0;
    for (std::size_t j = 0; j < e.xx.size(); ++j)
        tgv_value += 2.0 * lam *
                     std::sqrt(e.xx[j] * e.xx[j] + e.yy[j] * e.yy[j] + e.zz[j] * e.zz[j] +
                               2.0 * (e.xy[j] * e.xy[j] + e.xz[j] * e.xz[j] +
                                      e.yz[j] * e.yz[j]));
    CHECK(tgv_value < tv_value);
}

TEST_CASE("TV/TGV objective histories are non-increasing on a shared phantom") {
    PhantomSpec spec;
    spec.dims = {16, 16, 16};
    spec.shapes.push_back(Sphere{{8.0, 8.0, 8.0}, 3.0, 0.5});
    const DipoleKernel k = build_dipole_kernel(spec.dims, {1.0, 1.0, 1.0});
    const Volume phi = add_noise(forward_field(rasterize(spec), k), {0.01, 5});

    TgvConfig tgv;
    tgv.alpha1 = 2e-3;
    tgv.alpha0 = 4e-3;
    tgv.iters = 300;
    std::vector<double> history;
    recon_tgv(phi, k, tgv, &history);
    REQUIRE(history.size() == 30);
    for (std::size_t i = 1; i < history.size(); ++i)
        CHECK(history[i] <= history[i - 1] * (1.0 + 1e-10) + 1e-12);
}

TEST_CASE("reconstructions ignore a constant offset in the phase") {
    const Dims d{12, 12, 12};
    const DipoleKernel k = build_dipole_kernel(d, {1.0, 1.0, 1.0});
    const Volume phi = random_volume(d, 50);
    Volume shifted = phi;
    for (auto& x : shifted.data) x += 3.7;

    const Volume t1 = recon_tkd(phi, k, TkdConfig{});
    const Volume t2 = recon_tkd(shifted, k, TkdConfig{});
    CHECK(oracle::max_abs_diff(t1.data, t2.data) <= 1e-10 * (1.0 + vol_norm(t1)));

    TvConfig tv;
    tv.lambda = 1e-3;
    tv.iters = 60;
    const Volume v1 = recon_tv(phi, k, tv);
    const Volume v2 = recon_tv(shifted, k, tv);
    CHECK(oracle::max_abs_diff(v1.data, v2.data) <= 1e-10 * (1.0 + vol_norm(v1)));

    TgvConfig tg;
    tg.alpha1 = 1e-3;
    tg.alpha0 = 2e-3;
    tg.iters = 60;
    const Volume g1 = recon_tgv(phi, k, tg);
    const Volume g2 = recon_tgv(shifted, k, tg);
    CHECK(oracle::max_abs_diff(g1.data, g2.data) <= 1e-10 * (1.0 + vol_norm(g1)));
}

TEST_CASE("param_search basics: single point, rerun consistency, tie break") {
    const Dims d{8, 8, 8};
    const Volume gt = random_volume(d, 60);
    const Mask mask = Mask::ones(d);

    auto scaled = [&](double s) {
        Volume v = gt;
        for (auto& x : v.data) x *= s;
        return v;
    };

    const SearchResult single = param_search(scaled, {0.5}, gt, mask);
    CHECK(single.param == 0.5);

    const SearchResult best = param_search(scaled, {0.5, 0.9, 1.2}, gt, mask);
    CHECK(best.param == 0.9);
    const SearchResult again = param_search(scaled, {0.5, 0.9, 1.2}, gt, mask);
    CHECK(again.param == best.param);
    CHECK(again.rmse_pct == best.rmse_pct);

    // constant reconstruction: every parameter ties, smallest wins
    auto constant = [&](double) { return scaled(0.0); };
    CHECK_THROWS_AS(param_search(constant, {}, gt, mask), std::invalid_argument);
    const SearchResult tie = param_search(constant, {3.0, 1.0, 2.0}, gt, mask);
    CHECK(tie.param == 1.0);
}

TEST_CASE("TV beats TKD on a noisy sphere phantom after a small grid search") {
    PhantomSpec spec;
    spec.dims = {32, 32, 32};
    spec.shapes.push_back(Sphere{{16.0, 16.0, 16.0}, 5.0, 0.5});
    const Volume gt = rasterize(spec);
    const DipoleKernel k = build_dipole_kernel(spec.dims, {1.0, 1.0, 1.0});
    const Volume phi = add_noise(forward_field(gt, k), {0.01, 42});
    const Mask mask = Mask::ones(spec.dims);

    const SearchResult tkd = param_search(
        [&](double t) { return recon_tkd(phi, k, TkdConfig{t}); }, {0.1, 0.2, 0.3}, gt, mask);

    const SearchResult tv = param_search(
        [&](double lam) {
            TvConfig cfg;
            cfg.lambda = lam;
            cfg.iters = 250;
            return recon_tv(phi, k, cfg);
        },
        {1e-3, 3e-3, 1e-2}, gt, mask);

    CHECK(tv.rmse_pct < tkd.rmse_pct);
}
