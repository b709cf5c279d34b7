#include "qsm/neural.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qsm/kernels.hpp"
#include "qsm/rng.hpp"

namespace qsm {

namespace {

void ensure(Tensor& t, int c, int dx, int dy, int dz) {
    t.c = c;
    t.dx = dx;
    t.dy = dy;
    t.dz = dz;
    t.data.resize(t.len());
}

std::size_t row_offset(int dx, int dy, int y, int z) {
    return static_cast<std::size_t>(dx) * (static_cast<std::size_t>(y) +
                                           static_cast<std::size_t>(dy) * z);
}

void lrelu_inplace(Tensor& t, double slope) {
    kern::lrelu_fwd(t.data.data(), t.data.data(), slope, t.len());
}

// g becomes the gradient through the activation whose post-activation
// values are `post`.
void lrelu_bwd_inplace(const Tensor& post, Tensor& g, double slope) {
    kern::lrelu_bwd(post.data.data(), g.data.data(), g.data.data(), slope, g.len());
}

void avgpool_fwd(const Tensor& in, Tensor& out) {
    ensure(out, in.c, in.dx / 2, in.dy / 2, in.dz / 2);
    for (int c = 0; c < in.c; ++c) {
        const double* src = in.chan(c);
        double* dst = out.chan(c);
        std::size_t q = 0;
        for (int z = 0; z < out.dz; ++z)
            for (int y = 0; y < out.dy; ++y)
                for (int x = 0; x < out.dx; ++x, ++q) {
                    double acc = 0.0;
                    for (int k = 0; k < 2; ++k)
                        for (int j = 0; j < 2; ++j) {
                            const std::size_t r =
                                row_offset(in.dx, in.dy, 2 * y + j, 2 * z + k) + 2 * x;
                            acc += src[r] + src[r + 1];
                        }
                    dst[q] = acc * 0.125;
                }
    }
}

void avgpool_bwd(const Tensor& g_out, Tensor& g_in) {
    ensure(g_in, g_out.c, 2 * g_out.dx, 2 * g_out.dy, 2 * g_out.dz);
    for (int c = 0; c < g_out.c; ++c) {
        const double* src = g_out.chan(c);
        double* dst = g_in.chan(c);
        std::size_t q = 0;
        for (int z = 0; z < g_in.dz; ++z)
            for (int y = 0; y < g_in.dy; ++y)
                for (int x = 0; x < g_in.dx; ++x, ++q)
                    dst[q] = 0.125 * src[row_offset(g_out.dx, g_out.dy, y / 2, z / 2) + x / 2];
    }
}

void upsample_fwd(const Tensor& in, Tensor& out) {
    ensure(out, in.c, 2 * in.dx, 2 * in.dy, 2 * in.dz);
    for (int c = 0; c < in.c; ++c) {
        const double* src = in.chan(c);
        double* dst = out.chan(c);
        std::size_t q = 0;
        for (int z = 0; z < out.dz; ++z)
            for (int y = 0; y < out.dy; ++y)
                for (int x = 0; x < out.dx; ++x, ++q)
                    dst[q] = src[row_offset(in.dx, in.dy, y / 2, z / 2) + x / 2];
    }
}

void upsample_bwd(const Tensor& g_out, Tensor& g_in) {
    ensure(g_in, g_out.c, g_out.dx / 2, g_out.dy / 2, g_out.dz / 2);
    for (int c = 0; c < g_out.c; ++c) {
        const double* src = g_out.chan(c);
        double* dst = g_in.chan(c);
        std::size_t q = 0;
        for (int z = 0; z < g_in.dz; ++z)
            for (int y = 0; y < g_in.dy; ++y)
                for (int x = 0; x < g_in.dx; ++x, ++q) {
                    double acc = 0.0;
                    for (int k = 0; k < 2; ++k)
                        for (int j = 0; j < 2; ++j) {
                            const std::size_t r =
                                row_offset(g_out.dx, g_out.dy, 2 * y + j, 2 * z + k) + 2 * x;
                            acc += src[r] + src[r + 1];
                        }
                    dst[q] = acc;
                }
    }
}

void concat(const Tensor& a, const Tensor& b, Tensor& out) {
    ensure(out, a.c + b.c, a.dx, a.dy, a.dz);
    std::copy(a.data.begin(), a.data.end(), out.data.begin());
    std::copy(b.data.begin(), b.data.end(), out.data.begin() + a.data.size());
}

void split(const Tensor& g_cat, Tensor& g_a, int ca, Tensor& g_b, int cb) {
    ensure(g_a, ca, g_cat.dx, g_cat.dy, g_cat.dz);
    ensure(g_b, cb, g_cat.dx, g_cat.dy, g_cat.dz);
    std::copy(g_cat.data.begin(), g_cat.data.begin() + g_a.data.size(), g_a.data.begin());
    std::copy(g_cat.data.begin() + g_a.data.size(), g_cat.data.end(), g_b.data.begin());
}

} // namespace

Tensor Tensor::zeros(int c, int dx, int dy, int dz) {
    Tensor t;
    t.c = c;
    t.dx = dx;
    t.dy = dy;
    t.dz = dz;
    t.data.assign(t.len(), 0.0);
    return t;
}

namespace detail {

void conv_forward(const ConvParam& p, const Tensor& in, Tensor& out) {
    if (in.c != p.shape.cin) throw std::invalid_argument("conv input channel mismatch");
    ensure(out, p.shape.cout, in.dx, in.dy, in.dz);
    const std::size_t spatial = in.spatial();

    if (p.shape.k == 1) {
        for (int co = 0; co < p.shape.cout; ++co) {
            double* dst = out.chan(co);
            std::fill(dst, dst + spatial, p.b[co]);
            for (int ci = 0; ci < p.shape.cin; ++ci)
                kern::axpy(p.w[static_cast<std::size_t>(co) * p.shape.cin + ci],
                           in.chan(ci), dst, spatial);
        }
        return;
    }

    for (int co = 0; co < p.shape.cout; ++co) {
        double* dst = out.chan(co);
        std::fill(dst, dst + spatial, p.b[co]);
        for (int ci = 0; ci < p.shape.cin; ++ci) {
            const double* src = in.chan(ci);
            const double* wk =
                p.w.data() + (static_cast<std::size_t>(co) * p.shape.cin + ci) * 27;
            for (int z = 0; z < in.dz; ++z)
                for (int ez = -1; ez <= 1; ++ez) {
                    const int zi = z + ez;
                    if (zi < 0 || zi >= in.dz) continue;
                    for (int y = 0; y < in.dy; ++y)
                        for (int ey = -1; ey <= 1; ++ey) {
                            const int yi = y + ey;
                            if (yi < 0 || yi >= in.dy) continue;
                            const double* wrow = wk + ((ez + 1) * 3 + (ey + 1)) * 3;
                            kern::conv3_row_acc(src + row_offset(in.dx, in.dy, yi, zi),
                                                dst + row_offset(in.dx, in.dy, y, z),
                                                wrow[0], wrow[1], wrow[2], in.dx);
                        }
                }
        }
    }
}

void conv_backward(const ConvParam& p, const Tensor& in, const Tensor& g_out,
                   Tensor* g_in, std::vector<double>& g_w, std::vector<double>& g_b) {
    if (in.c != p.shape.cin || g_out.c != p.shape.cout)
        throw std::invalid_argument("conv backward shape mismatch");
    if (g_out.dx != in.dx || g_out.dy != in.dy || g_out.dz != in.dz)
        throw std::invalid_argument("conv backward spatial mismatch");
    const std::size_t spatial = in.spatial();

    if (p.shape.k == 1) {
        for (int co = 0; co < p.shape.cout; ++co) {
            g_b[co] += kern::sum(g_out.chan(co), spatial);
            for (int ci = 0; ci < p.shape.cin; ++ci)
                g_w[static_cast<std::size_t>(co) * p.shape.cin + ci] +=
                    kern::dot(g_out.chan(co), in.chan(ci), spatial);
        }
        if (g_in) {
            ensure(*g_in, p.shape.cin, in.dx, in.dy, in.dz);
            std::fill(g_in->data.begin(), g_in->data.end(), 0.0);
            for (int ci = 0; ci < p.shape.cin; ++ci)
                for (int co = 0; co < p.shape.cout; ++co)
                    kern::axpy(p.w[static_cast<std::size_t>(co) * p.shape.cin + ci],
                               g_out.chan(co), g_in->chan(ci), spatial);
        }
        return;
    }

    // weight gradient: g_w[co][ci][dz][dy][dx] = sum g_out * shifted input
    for (int co = 0; co < p.shape.cout; ++co) {
        const double* gsrc = g_out.chan(co);
        g_b[co] += kern::sum(gsrc, spatial);
        for (int ci = 0; ci < p.shape.cin; ++ci) {
            const double* src = in.chan(ci);
            double* gw = g_w.data() + (static_cast<std::size_t>(co) * p.shape.cin + ci) * 27;
            for (int z = 0; z < in.dz; ++z)
                for (int ez = -1; ez <= 1; ++ez) {
                    const int zi = z + ez;
                    if (zi < 0 || zi >= in.dz) continue;
                    for (int y = 0; y < in.dy; ++y)
                        for (int ey = -1; ey <= 1; ++ey) {
                            const int yi = y + ey;
                            if (yi < 0 || yi >= in.dy) continue;
                            kern::dot3_shift_acc(gsrc + row_offset(in.dx, in.dy, y, z),
                                                 src + row_offset(in.dx, in.dy, yi, zi),
                                                 gw + ((ez + 1) * 3 + (ey + 1)) * 3, in.dx);
                        }
                }
        }
    }

    if (!g_in) return;
    ensure(*g_in, p.shape.cin, in.dx, in.dy, in.dz);
    std::fill(g_in->data.begin(), g_in->data.end(), 0.0);
    // input gradient: correlation of g_out with the flipped kernel
    for (int ci = 0; ci < p.shape.cin; ++ci) {
        double* dst = g_in->chan(ci);
        for (int co = 0; co < p.shape.cout; ++co) {
            const double* src = g_out.chan(co);
            const double* wk =
                p.w.data() + (static_cast<std::size_t>(co) * p.shape.cin + ci) * 27;
            for (int z = 0; z < in.dz; ++z)
                for (int ez = -1; ez <= 1; ++ez) {
                    const int zi = z + ez;
                    if (zi < 0 || zi >= in.dz) continue;
                    for (int y = 0; y < in.dy; ++y)
                        for (int ey = -1; ey <= 1; ++ey) {
                            const int yi = y + ey;
                            if (yi < 0 || yi >= in.dy) continue;
                            const double* wrow = wk + ((1 - ez) * 3 + (1 - ey)) * 3;
                            kern::conv3_row_acc(src + row_offset(in.dx, in.dy, yi, zi),
                                                dst + row_offset(in.dx, in.dy, y, z),
                                                wrow[2], wrow[1], wrow[0], in.dx);
                        }
                }
        }
    }
}

} // namespace detail

std::size_t Parameters::scalar_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
}

Gradients Gradients::zeros_like(const Parameters& p) {
    Gradients g;
    g.w.resize(p.layers.size());
    g.b.resize(p.layers.size());
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        g.w[i].assign(p.layers[i].w.size(), 0.0);
        g.b[i].assign(p.layers[i].b.size(), 0.0);
    }
    return g;
}

void Gradients::zero() {
    for (auto& v : w) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
}

AdamState AdamState::init(const Parameters& p, double lr) {
    AdamState s;
    s.lr = lr;
    s.m_w.resize(p.layers.size());
    s.v_w.resize(p.layers.size());
    s.m_b.resize(p.layers.size());
    s.v_b.resize(p.layers.size());
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        s.m_w[i].assign(p.layers[i].w.size(), 0.0);
        s.v_w[i].assign(p.layers[i].w.size(), 0.0);
        s.m_b[i].assign(p.layers[i].b.size(), 0.0);
        s.v_b[i].assign(p.layers[i].b.size(), 0.0);
    }
    return s;
}

void adam_step(AdamState& s, Parameters& params, const Gradients& g) {
    if (s.m_w.size() != params.layers.size())
        throw std::invalid_argument("adam state does not match parameters");
    s.t += 1;
    const double corr1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
    const double corr2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        auto& layer = params.layers[i];
        kern::adam_step(layer.w.data(), s.m_w[i].data(), s.v_w[i].data(), g.w[i].data(),
                        s.lr, s.beta1, s.beta2, s.eps, corr1, corr2, layer.w.size());
        kern::adam_step(layer.b.data(), s.m_b[i].data(), s.v_b[i].data(), g.b[i].data(),
                        s.lr, s.beta1, s.beta2, s.eps, corr1, corr2, layer.b.size());
    }
}

UNet::UNet(NetworkSpec spec) : spec_(spec) {
    if (spec_.levels < 1) throw std::invalid_argument("network needs at least one level");
    if (spec_.base_channels < 1) throw std::invalid_argument("base channels must be positive");
    const int L = spec_.levels;
    auto ch = [&](int l) { return spec_.base_channels << l; };
    for (int l = 0; l < L; ++l) {
        shapes_.push_back({l == 0 ? 1 : ch(l - 1), ch(l), 3});
        shapes_.push_back({ch(l), ch(l), 3});
    }
    shapes_.push_back({ch(L - 1), ch(L), 3});
    shapes_.push_back({ch(L), ch(L), 3});
    for (int l = L - 1; l >= 0; --l) {
        shapes_.push_back({l == L - 1 ? ch(L) : ch(l + 1), ch(l), 3});
        shapes_.push_back({2 * ch(l), ch(l), 3});
        shapes_.push_back({ch(l), ch(l), 3});
    }
    shapes_.push_back({ch(0), 1, 1});
}

Parameters UNet::init_params(std::uint64_t seed) const {
    Rng rng(seed);
    Parameters p;
    p.layers.resize(shapes_.size());
    for (std::size_t i = 0; i < shapes_.size(); ++i) {
        const auto& sh = shapes_[i];
        auto& layer = p.layers[i];
        layer.shape = sh;
        const int k3 = sh.k * sh.k * sh.k;
        const double bound = std::sqrt(6.0 / (static_cast<double>(sh.cin) * k3));
        layer.w.resize(static_cast<std::size_t>(sh.cout) * sh.cin * k3);
        for (auto& w : layer.w) w = rng.uniform(-bound, bound);
        layer.b.assign(sh.cout, 0.0);
    }
    return p;
}

const Tensor& UNet::forward(const Parameters& p, const Tensor& z, Cache& c) const {
    if (p.layers.size() != shapes_.size())
        throw std::invalid_argument("parameters do not match network spec");
    if (z.c != 1) throw std::invalid_argument("network input must have one channel");
    const int L = spec_.levels;
    const int div = 1 << L;
    if (z.dx % div || z.dy % div || z.dz % div)
        throw std::invalid_argument("input spatial dims must be divisible by 2^levels");
    const double slope = spec_.lrelu_slope;

    c.enc_a.resize(L);
    c.enc_b.resize(L);
    c.pooled.resize(L);
    c.up.resize(L);
    c.upc.resize(L);
    c.cat.resize(L);
    c.dec_a.resize(L);
    c.dec_b.resize(L);
    c.input = z;

    const Tensor* cur = &c.input;
    for (int l = 0; l < L; ++l) {
        detail::conv_forward(p.layers[enc1(l)], *cur, c.enc_a[l]);
        lrelu_inplace(c.enc_a[l], slope);
        detail::conv_forward(p.layers[enc2(l)], c.enc_a[l], c.enc_b[l]);
        lrelu_inplace(c.enc_b[l], slope);
        avgpool_fwd(c.enc_b[l], c.pooled[l]);
        cur = &c.pooled[l];
    }
    detail::conv_forward(p.layers[bott1()], *cur, c.bott_a);
    lrelu_inplace(c.bott_a, slope);
    detail::conv_forward(p.layers[bott2()], c.bott_a, c.bott_b);
    lrelu_inplace(c.bott_b, slope);
    cur = &c.bott_b;
    for (int l = L - 1; l >= 0; --l) {
        upsample_fwd(*cur, c.up[l]);
        detail::conv_forward(p.layers[upconv(l)], c.up[l], c.upc[l]);
        lrelu_inplace(c.upc[l], slope);
        concat(c.upc[l], c.enc_b[l], c.cat[l]);
        detail::conv_forward(p.layers[dec1(l)], c.cat[l], c.dec_a[l]);
        lrelu_inplace(c.dec_a[l], slope);
        detail::conv_forward(p.layers[dec2(l)], c.dec_a[l], c.dec_b[l]);
        lrelu_inplace(c.dec_b[l], slope);
        cur = &c.dec_b[l];
    }
    detail::conv_forward(p.layers[final_conv()], *cur, c.out);
    return c.out;
}

void UNet::backward(const Parameters& p, const Cache& cache, const Tensor& g_out,
                    Gradients& g) const {
    const int L = spec_.levels;
    if (cache.out.len() != g_out.len() || cache.dec_b.size() != static_cast<std::size_t>(L))
        throw std::invalid_argument("stale or mismatched forward cache");
    const double slope = spec_.lrelu_slope;

    Tensor g_cur, g_a, g_cat, g_upc, g_up, g_b;
    std::vector<Tensor> g_skip(L);

    detail::conv_backward(p.layers[final_conv()], cache.dec_b[0], g_out, &g_cur,
                          g.w[final_conv()], g.b[final_conv()]);
    for (int l = 0; l < L; ++l) {
        lrelu_bwd_inplace(cache.dec_b[l], g_cur, slope);
        detail::conv_backward(p.layers[dec2(l)], cache.dec_a[l], g_cur, &g_a,
                              g.w[dec2(l)], g.b[dec2(l)]);
        lrelu_bwd_inplace(cache.dec_a[l], g_a, slope);
        detail::conv_backward(p.layers[dec1(l)], cache.cat[l], g_a, &g_cat,
                              g.w[dec1(l)], g.b[dec1(l)]);
        split(g_cat, g_upc, cache.upc[l].c, g_skip[l], cache.enc_b[l].c);
        lrelu_bwd_inplace(cache.upc[l], g_upc, slope);
        detail::conv_backward(p.layers[upconv(l)], cache.up[l], g_upc, &g_up,
                              g.w[upconv(l)], g.b[upconv(l)]);
        upsample_bwd(g_up, g_cur);
    }
    lrelu_bwd_inplace(cache.bott_b, g_cur, slope);
    detail::conv_backward(p.layers[bott2()], cache.bott_a, g_cur, &g_a, g.w[bott2()],
                          g.b[bott2()]);
    lrelu_bwd_inplace(cache.bott_a, g_a, slope);
    detail::conv_backward(p.layers[bott1()], cache.pooled[L - 1], g_a, &g_cur,
                          g.w[bott1()], g.b[bott1()]);
    for (int l = L - 1; l >= 0; --l) {
        avgpool_bwd(g_cur, g_b);
        kern::add(g_b.data.data(), g_skip[l].data.data(), g_b.data.data(), g_b.len());
        lrelu_bwd_inplace(cache.enc_b[l], g_b, slope);
        detail::conv_backward(p.layers[enc2(l)], cache.enc_a[l], g_b, &g_a, g.w[enc2(l)],
                              g.b[enc2(l)]);
        lrelu_bwd_inplace(cache.enc_a[l], g_a, slope);
        const Tensor& enc_in = l == 0 ? cache.input : cache.pooled[l - 1];
        detail::conv_backward(p.layers[enc1(l)], enc_in, g_a, l == 0 ? nullptr : &g_cur,
                              g.w[enc1(l)], g.b[enc1(l)]);
    }
}

std::vector<Tensor> make_noise_inputs(const PatchGrid& g, std::uint64_t seed) {
    const double bound = std::sqrt(0.3); // zero-mean uniform with variance 0.1
    std::vector<Tensor> inputs;
    inputs.reserve(g.patch_count());
    for (std::size_t i = 0; i < g.patch_count(); ++i) {
        Rng rng(mix_seed(seed, i));
        Tensor t = Tensor::zeros(1, g.patch[0], g.patch[1], g.patch[2]);
        for (auto& v : t.data) v = rng.uniform(-bound, bound);
        inputs.push_back(std::move(t));
    }
    return inputs;
}

Parameters init_weights(const NetworkSpec& spec, std::uint64_t seed) {
    return UNet(spec).init_params(seed);
}

} // namespace qsm
