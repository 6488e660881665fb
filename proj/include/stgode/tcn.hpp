#ifndef STGODE_TCN_HPP
#define STGODE_TCN_HPP

// Dilated causal 1-D convolution stack along the time axis. Left-only zero
// padding keeps the sequence length fixed and never leaks future values.

#include <cmath>
#include <string>
#include <vector>

#include "stgode/common.hpp"
#include "stgode/tensor.hpp"

namespace stgode {

enum class Activation { Tanh, Linear };

namespace detail {

// x: (N, T, Cin) row-major; w: (Cout, Cin, K); out: (N, T, Cout).
// Tap k reads x at time t - (K-1-k)*dilation; negative times read as zero.
inline void conv1d_forward_kernel(const double* x, int n, int t_len, int cin, const double* w, int cout,
                                  int k_width, int dilation, const double* bias, double* out) {
    for (int s = 0; s < n; ++s) {
        const double* xs = x + static_cast<std::size_t>(s) * t_len * cin;
        double* os = out + static_cast<std::size_t>(s) * t_len * cout;
        for (int t = 0; t < t_len; ++t) {
            double* orow = os + static_cast<std::size_t>(t) * cout;
            for (int o = 0; o < cout; ++o) orow[o] = bias ? bias[o] : 0.0;
            for (int k = 0; k < k_width; ++k) {
                const int tp = t - (k_width - 1 - k) * dilation;
                if (tp < 0) continue;
                const double* xrow = xs + static_cast<std::size_t>(tp) * cin;
                for (int o = 0; o < cout; ++o) {
                    const double* wrow = w + (static_cast<std::size_t>(o) * cin) * k_width + k;
                    double acc = 0.0;
                    for (int c = 0; c < cin; ++c) acc += wrow[static_cast<std::size_t>(c) * k_width] * xrow[c];
                    orow[o] += acc;
                }
            }
        }
    }
}

inline void conv1d_backward_input_kernel(const double* g, int n, int t_len, int cout, const double* w,
                                         int cin, int k_width, int dilation, double* dx) {
    for (int s = 0; s < n; ++s) {
        const double* gs = g + static_cast<std::size_t>(s) * t_len * cout;
        double* dxs = dx + static_cast<std::size_t>(s) * t_len * cin;
        for (int t = 0; t < t_len; ++t) {
            const double* grow = gs + static_cast<std::size_t>(t) * cout;
            for (int k = 0; k < k_width; ++k) {
                const int tp = t - (k_width - 1 - k) * dilation;
                if (tp < 0) continue;
                double* dxrow = dxs + static_cast<std::size_t>(tp) * cin;
                for (int o = 0; o < cout; ++o) {
                    const double go = grow[o];
                    if (go == 0.0) continue;
                    const double* wrow = w + (static_cast<std::size_t>(o) * cin) * k_width + k;
                    for (int c = 0; c < cin; ++c) dxrow[c] += go * wrow[static_cast<std::size_t>(c) * k_width];
                }
            }
        }
    }
}

inline void conv1d_backward_weights_kernel(const double* g, const double* x, int n, int t_len, int cin,
                                           int cout, int k_width, int dilation, double* dw, double* dbias) {
    for (int s = 0; s < n; ++s) {
        const double* xs = x + static_cast<std::size_t>(s) * t_len * cin;
        const double* gs = g + static_cast<std::size_t>(s) * t_len * cout;
        for (int t = 0; t < t_len; ++t) {
            const double* grow = gs + static_cast<std::size_t>(t) * cout;
            if (dbias) {
                for (int o = 0; o < cout; ++o) dbias[o] += grow[o];
            }
            for (int k = 0; k < k_width; ++k) {
                const int tp = t - (k_width - 1 - k) * dilation;
                if (tp < 0) continue;
                const double* xrow = xs + static_cast<std::size_t>(tp) * cin;
                for (int o = 0; o < cout; ++o) {
                    const double go = grow[o];
                    if (go == 0.0) continue;
                    double* dwrow = dw + (static_cast<std::size_t>(o) * cin) * k_width + k;
                    for (int c = 0; c < cin; ++c) dwrow[static_cast<std::size_t>(c) * k_width] += go * xrow[c];
                }
            }
        }
    }
}

}  // namespace detail

/// One dilated causal layer. kernel dims: (out-channels, in-channels, width).
struct TcnLayer {
    Tensor3 kernel;
    std::vector<double> bias;
    int dilation = 1;
    Activation act = Activation::Tanh;

    int out_channels() const { return kernel.n1; }
    int in_channels() const { return kernel.n2; }
    int width() const { return kernel.n3; }

    void validate() const {
        if (dilation < 1) throw ValidationError("TcnLayer: dilation must be >= 1");
        if (bias.size() != static_cast<std::size_t>(kernel.n1)) {
            throw ShapeError("TcnLayer: bias length does not match out-channels");
        }
    }
};

inline Tensor3 dilated_conv1d(const Tensor3& x, const TcnLayer& layer) {
    layer.validate();
    if (x.n3 != layer.in_channels()) {
        throw ShapeError("dilated_conv1d: input has " + std::to_string(x.n3) + " channels, layer expects " +
                         std::to_string(layer.in_channels()));
    }
    Tensor3 out(x.n1, x.n2, layer.out_channels());
    detail::conv1d_forward_kernel(x.data.data(), x.n1, x.n2, x.n3, layer.kernel.data.data(),
                                  layer.out_channels(), layer.width(), layer.dilation, layer.bias.data(),
                                  out.data.data());
    if (layer.act == Activation::Tanh) {
        for (double& v : out.data) v = std::tanh(v);
    }
    return out;
}

/// Layer sequence plus a linear residual path; the projection (in x out)
/// is applied along the channel axis when in/out widths differ.
struct TcnStack {
    std::vector<TcnLayer> layers;
    DenseMatrix residual_proj;

    bool has_projection() const { return residual_proj.rows > 0; }
    int in_channels() const { return layers.front().in_channels(); }
    int out_channels() const { return layers.back().out_channels(); }

    void validate() const {
        if (layers.empty()) throw ValidationError("TcnStack: no layers");
        for (std::size_t i = 0; i < layers.size(); ++i) {
            layers[i].validate();
            if (i > 0 && layers[i].in_channels() != layers[i - 1].out_channels()) {
                throw ShapeError("TcnStack: layer " + std::to_string(i) + " channel mismatch");
            }
        }
        if (in_channels() != out_channels() && !has_projection()) {
            throw ShapeError("TcnStack: channel change requires a residual projection");
        }
        if (has_projection() &&
            (residual_proj.rows != in_channels() || residual_proj.cols != out_channels())) {
            throw ShapeError("TcnStack: residual projection dims do not match channel change");
        }
    }
};

/// Stacked layers plus the residual input path, added linearly.
inline Tensor3 tcn_forward(const Tensor3& x, const TcnStack& stack) {
    stack.validate();
    Tensor3 y = x;
    for (const TcnLayer& layer : stack.layers) y = dilated_conv1d(y, layer);
    const Tensor3 res = stack.has_projection() ? mode_product(x, stack.residual_proj, 3) : x;
    return add(y, res);
}

/// 1 + (k-1) * sum of dilations: how far back one output step can see.
inline int receptive_field(const TcnStack& stack) {
    int rf = 1;
    for (const TcnLayer& layer : stack.layers) rf += (layer.width() - 1) * layer.dilation;
    return rf;
}

/// Seeded layer with weights scaled by 1/sqrt(in * width).
inline TcnLayer random_tcn_layer(int out_ch, int in_ch, int k_width, int dilation, std::uint64_t seed,
                                 Activation act = Activation::Tanh) {
    TcnLayer layer;
    layer.kernel = Tensor3(out_ch, in_ch, k_width);
    Rng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in_ch) * k_width);
    for (double& v : layer.kernel.data) v = scale * draw_normal(rng);
    layer.bias.assign(out_ch, 0.0);
    layer.dilation = dilation;
    layer.act = act;
    return layer;
}

/// Default stack shape: width-2 kernels, dilations 1, 2, 4, ... per layer.
inline TcnStack random_tcn_stack(const std::vector<int>& channels, int k_width, std::uint64_t seed,
                                 Activation act = Activation::Tanh) {
    if (channels.size() < 2) throw ValidationError("random_tcn_stack: need at least in and out channels");
    TcnStack stack;
    int dilation = 1;
    for (std::size_t i = 0; i + 1 < channels.size(); ++i) {
        stack.layers.push_back(
            random_tcn_layer(channels[i + 1], channels[i], k_width, dilation, seed + i * 7919, act));
        dilation *= 2;
    }
    if (channels.front() != channels.back()) {
        stack.residual_proj = DenseMatrix(channels.front(), channels.back());
        Rng rng(seed ^ 0xabcdef1234567890ULL);
        const double scale = 1.0 / std::sqrt(static_cast<double>(channels.front()));
        for (double& v : stack.residual_proj.data) v = scale * draw_normal(rng);
    }
    return stack;
}

}  // namespace stgode

#endif  // STGODE_TCN_HPP
