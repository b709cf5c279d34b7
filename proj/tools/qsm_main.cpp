// qsm: phantom generation, dipole forward simulation, reconstruction
// (tkd/tv/tgv/pdip), metrics, and slice export for susceptibility mapping
// experiments. Exit codes: 0 success, 1 runtime/data error, 2 usage or
// configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsm/baselines.hpp"
#include "qsm/config.hpp"
#include "qsm/metrics.hpp"
#include "qsm/pdip.hpp"
#include "qsm/phantom.hpp"
#include "qsm/rng.hpp"
#include "qsm/spectral.hpp"
#include "qsm/volume.hpp"

namespace {

using namespace qsm;

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

RunConfig load_config(const CommonOpts& opts) {
    RunConfig c = opts.config_path.empty() ? RunConfig::from_text("")
                                           : RunConfig::from_file(opts.config_path);
    for (const auto& o : opts.overrides) c.apply_override(o);
    return c;
}

std::uint64_t resolve_seed(const RunConfig& c, const CommonOpts& opts) {
    return opts.seed_given ? opts.seed : seed_from_config(c, 0);
}

void ensure_parent(const std::filesystem::path& p) {
    const auto dir = p.parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
}

void write_history_csv(const std::filesystem::path& path, const std::vector<double>& obj,
                       int stride) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open history CSV: " + path.string());
    f << "iter,objective\n";
    char buf[64];
    for (std::size_t i = 0; i < obj.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", (i + 1) * static_cast<std::size_t>(stride),
                      obj[i]);
        f << buf;
    }
}

void write_history_csv(const std::filesystem::path& path,
                       const std::vector<PdipHistoryRow>& rows) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open history CSV: " + path.string());
    f << "iter,objective,rel_change\n";
    char buf[96];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", r.iter, r.objective, r.rel_change);
        f << buf;
    }
}

int cmd_phantom(const CommonOpts& opts, const std::string& out,
                const std::string& mask_out_opt) {
    const RunConfig c = load_config(opts);
    const PhantomSpec spec = phantom_from_config(c);
    const Volume chi = rasterize(spec);
    const Mask mask = phantom_mask_mode(c) == "shapes" ? shape_mask(spec) : Mask::ones(spec.dims);

    const std::string mask_out = mask_out_opt.empty() ? out + ".mask" : mask_out_opt;
    ensure_parent(out);
    ensure_parent(mask_out);
    save_volume(chi, out);
    save_volume(mask_to_volume(mask, spec.spacing), mask_out);
    std::cout << "wrote " << out << " and " << mask_out << "\n";
    return 0;
}

int cmd_forward(const CommonOpts& opts, const std::string& chi_path, const std::string& out,
                double sigma_flag, bool sigma_given) {
    const RunConfig c = load_config(opts);
    const std::uint64_t seed = resolve_seed(c, opts);

    const Volume chi = load_volume(chi_path);
    const DipoleKernel kernel = build_dipole_kernel(chi.dims, chi.spacing);
    Volume phi = forward_field(chi, kernel);

    NoiseSpec noise = noise_from_config(c, seed);
    if (sigma_given) noise.sigma = sigma_flag;
    if (noise.sigma < 0.0) throw ConfigError("noise sigma must be >= 0");
    phi = add_noise(phi, noise);

    ensure_parent(out);
    char meta[96];
    std::snprintf(meta, sizeof(meta), "noise sigma=%.17g rng=%s", noise.sigma, kRngName);
    save_volume(phi, out, {meta});
    std::cout << "wrote " << out << " (sigma=" << noise.sigma << ")\n";
    return 0;
}

int cmd_recon(const CommonOpts& opts, const std::string& method, const std::string& phi_path,
              const std::string& out) {
    const RunConfig c = load_config(opts);
    const std::uint64_t seed = resolve_seed(c, opts);

    const Volume phi = load_volume(phi_path);
    const DipoleKernel kernel = build_dipole_kernel(phi.dims, phi.spacing);
    ensure_parent(out);

    if (method == "tkd") {
        save_volume(recon_tkd(phi, kernel, tkd_from_config(c)), out);
    } else if (method == "tv") {
        std::vector<double> history;
        save_volume(recon_tv(phi, kernel, tv_from_config(c), &history), out);
        write_history_csv(out + ".history.csv", history, 10);
    } else if (method == "tgv") {
        std::vector<double> history;
        save_volume(recon_tgv(phi, kernel, tgv_from_config(c), &history), out);
        write_history_csv(out + ".history.csv", history, 10);
    } else { // pdip (the method flag is validated by the parser)
        const PdipConfig cfg = pdip_from_config(c, seed);
        const NetworkSpec net = net_from_config(c);
        const PdipResult result = pdip_run(phi, kernel, cfg, net);
        save_volume(result.chi, out);
        write_history_csv(out + ".history.csv", result.history);
        std::cout << "pdip finished after " << result.history.size() << " outer iterations\n";
    }
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_metrics(const std::string& gt_path, const std::string& mask_path,
                const std::string& out, const std::vector<std::string>& rec_paths) {
    const Volume gt = load_volume(gt_path);
    const Mask mask = Mask::from_volume(load_volume(mask_path));

    std::vector<MetricReport> rows;
    for (const auto& rp : rec_paths) {
        const Volume rec = load_volume(rp);
        MetricReport r;
        r.method = std::filesystem::path(rp).stem().string();
        r.rmse_pct = rmse_pct(rec, gt, mask);
        r.ssim = ssim3d(rec, gt, mask);
        r.psnr_db = psnr(rec, gt, mask);
        rows.push_back(std::move(r));
    }
    ensure_parent(out);
    write_metrics_csv(rows, out);
    std::cout << metrics_to_csv(rows);
    return 0;
}

int cmd_slice(const std::string& vol_path, const std::string& axis_str, int index,
              const std::string& window, const std::string& out) {
    const Volume v = load_volume(vol_path);
    const auto w = parse_double_list(window, 2);
    if (!(w[0] < w[1])) throw ConfigError("window requires lo < hi");
    const Axis axis = axis_str == "x" ? Axis::x : axis_str == "y" ? Axis::y : Axis::z;
    ensure_parent(out);
    export_slice(v, axis, index, w[0], w[1], out);
    std::cout << "wrote " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantitative susceptibility mapping toolkit"};
    app.require_subcommand(1);

    CommonOpts common;
    auto add_common = [&](CLI::App* sub, bool with_config = true) {
        if (with_config) {
            sub->add_option("--config", common.config_path, "run configuration (INI)");
            sub->add_option("--set", common.overrides, "override: section.key=value");
        }
        sub->add_option("--seed", common.seed, "global seed")
            ->each([&](const std::string&) { common.seed_given = true; });
    };

    auto* p_phantom = app.add_subcommand("phantom", "rasterize a synthetic susceptibility map");
    std::string out, mask_out;
    p_phantom->add_option("--out", out, "output volume path")->required();
    p_phantom->add_option("--mask-out", mask_out, "mask output path (default <out>.mask)");
    add_common(p_phantom);

    auto* p_forward = app.add_subcommand("forward", "simulate the tissue phase volume");
    std::string chi_path;
    double sigma_flag = 0.0;
    p_forward->add_option("--chi", chi_path, "susceptibility volume")->required();
    p_forward->add_option("--out", out, "output volume path")->required();
    auto* sigma_opt = p_forward->add_option("--sigma", sigma_flag, "noise standard deviation");
    add_common(p_forward);

    auto* p_recon = app.add_subcommand("recon", "reconstruct a susceptibility map");
    std::string method, phi_path;
    p_recon->add_option("--method", method, "tkd|tv|tgv|pdip")
        ->required()
        ->check(CLI::IsMember({"tkd", "tv", "tgv", "pdip"}));
    p_recon->add_option("--phi", phi_path, "measured phase volume")->required();
    p_recon->add_option("--out", out, "output volume path")->required();
    add_common(p_recon);

    auto* p_metrics = app.add_subcommand("metrics", "evaluate reconstructions against ground truth");
    std::string gt_path, mask_path;
    std::vector<std::string> rec_paths;
    p_metrics->add_option("--gt", gt_path, "ground truth volume")->required();
    p_metrics->add_option("--mask", mask_path, "evaluation mask volume")->required();
    p_metrics->add_option("--out", out, "output CSV path")->required();
    p_metrics->add_option("recons", rec_paths, "reconstruction volumes")->required();

    auto* p_slice = app.add_subcommand("slice", "export a grayscale slice image (PGM)");
    std::string vol_path, axis_str = "z", window;
    int slice_index = 0;
    p_slice->add_option("--volume", vol_path, "input volume")->required();
    p_slice->add_option("--axis", axis_str, "x|y|z")
        ->check(CLI::IsMember({"x", "y", "z"}));
    p_slice->add_option("--index", slice_index, "slice index along the axis")->required();
    p_slice->add_option("--window", window, "display range lo,hi")->required();
    p_slice->add_option("--out", out, "output PGM path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(p_phantom)) return cmd_phantom(common, out, mask_out);
        if (app.got_subcommand(p_forward))
            return cmd_forward(common, chi_path, out, sigma_flag, sigma_opt->count() > 0);
        if (app.got_subcommand(p_recon)) return cmd_recon(common, method, phi_path, out);
        if (app.got_subcommand(p_metrics)) return cmd_metrics(gt_path, mask_path, out, rec_paths);
        if (app.got_subcommand(p_slice))
            return cmd_slice(vol_path, axis_str, slice_index, window, out);
    } catch (const qsm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
