#pragma once

#include <cstdint>
#include <vector>

#include "qsm/patchwork.hpp"

namespace qsm {

// Feature map: channel-major, x-fastest within each channel.
struct Tensor {
    int c = 0, dx = 0, dy = 0, dz = 0;
    std::vector<double> data;

    static Tensor zeros(int c, int dx, int dy, int dz);

    std::size_t spatial() const {
        return static_cast<std::size_t>(dx) * dy * dz;
    }
    std::size_t len() const { return static_cast<std::size_t>(c) * spatial(); }
    double* chan(int ci) { return data.data() + static_cast<std::size_t>(ci) * spatial(); }
    const double* chan(int ci) const {
        return data.data() + static_cast<std::size_t>(ci) * spatial();
    }
};

// 3D UNet: `levels` encoder/decoder stages with skip connections, channel
// schedule base_channels * 2^level, 3x3x3 convolutions (stride 1, zero pad
// 1, cross-correlation), leaky-rectifier activations, 2x2x2 average-pool
// downsampling, nearest-neighbor x2 upsampling followed by convolution,
// and a final 1x1x1 projection to one channel. Input spatial dims must be
// divisible by 2^levels; output spatial dims equal input spatial dims.
struct NetworkSpec {
    int levels = 2;
    int base_channels = 8;
    double lrelu_slope = 0.1;
};

struct ConvShape {
    int cin = 0, cout = 0, k = 3; // k in {1, 3}
};

struct ConvParam {
    ConvShape shape;
    std::vector<double> w; // [cout][cin][kz][ky][kx]
    std::vector<double> b; // [cout]
};

struct Parameters {
    std::vector<ConvParam> layers;
    std::size_t scalar_count() const;
};

// Per-layer gradient buffers mirroring Parameters.
struct Gradients {
    std::vector<std::vector<double>> w, b;

    static Gradients zeros_like(const Parameters& p);
    void zero();
};

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::uint64_t t = 0;
    std::vector<std::vector<double>> m_w, v_w, m_b, v_b;

    static AdamState init(const Parameters& p, double lr);
};

// Bias-corrected ADAM update of all parameter tensors from the gradients.
void adam_step(AdamState& state, Parameters& params, const Gradients& g);

class UNet {
public:
    explicit UNet(NetworkSpec spec);

    const NetworkSpec& spec() const { return spec_; }
    const std::vector<ConvShape>& layer_shapes() const { return shapes_; }

    // Fan-in-scaled uniform weights (bound sqrt(6/fan_in)), zero biases;
    // deterministic in the seed.
    Parameters init_params(std::uint64_t seed) const;

    // Everything the backward pass needs; reusable across forward calls to
    // avoid reallocation. Tensors are post-activation values.
    struct Cache {
        Tensor input;
        std::vector<Tensor> enc_a, enc_b, pooled;
        Tensor bott_a, bott_b;
        std::vector<Tensor> up, upc, cat, dec_a, dec_b;
        Tensor out;
    };

    // Returns the single-channel output in cache.out.
    const Tensor& forward(const Parameters& p, const Tensor& z, Cache& cache) const;

    // Accumulates d(loss)/d(params) into g for upstream gradient g_out
    // (shape of cache.out). The cache must come from a matching forward.
    void backward(const Parameters& p, const Cache& cache, const Tensor& g_out,
                  Gradients& g) const;

private:
    NetworkSpec spec_;
    std::vector<ConvShape> shapes_;
    // layer order: enc conv pairs per level, bottleneck pair, then per
    // decoder level (coarse to fine) upconv + two convs, final 1x1x1
    int enc1(int l) const { return 2 * l; }
    int enc2(int l) const { return 2 * l + 1; }
    int bott1() const { return 2 * spec_.levels; }
    int bott2() const { return 2 * spec_.levels + 1; }
    int upconv(int l) const { return 2 * spec_.levels + 2 + 3 * (spec_.levels - 1 - l); }
    int dec1(int l) const { return upconv(l) + 1; }
    int dec2(int l) const { return upconv(l) + 2; }
    int final_conv() const { return 5 * spec_.levels + 2; }
};

// Fixed per-patch network inputs: i.i.d. uniform on [-sqrt(0.3), sqrt(0.3)]
// (zero mean, variance 0.1), keyed by (seed, patch index).
std::vector<Tensor> make_noise_inputs(const PatchGrid& g, std::uint64_t seed);

// Convenience wrapper matching the operation-level API.
Parameters init_weights(const NetworkSpec& spec, std::uint64_t seed);

// Exposed for unit testing of the building blocks.
namespace detail {
void conv_forward(const ConvParam& p, const Tensor& in, Tensor& out);
void conv_backward(const ConvParam& p, const Tensor& in, const Tensor& g_out,
                   Tensor* g_in, std::vector<double>& g_w, std::vector<double>& g_b);
} // namespace detail

} // namespace qsm
