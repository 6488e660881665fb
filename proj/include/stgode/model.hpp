#ifndef STGODE_MODEL_HPP
#define STGODE_MODEL_HPP

// Network assembly: TCN -> tensor ODE -> TCN blocks run in parallel per
// adjacency kind, layers cascade, block outputs max-pool, and a per-node
// two-layer head maps the flattened time-channel vector to the horizon.
// The tape-recorded forward mirrors the plain one op for op.

#include <json.hpp>

#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include "stgode/autograd.hpp"
#include "stgode/common.hpp"
#include "stgode/graph.hpp"
#include "stgode/io.hpp"
#include "stgode/ode.hpp"
#include "stgode/tcn.hpp"
#include "stgode/tensor.hpp"

namespace stgode {

enum class CoreKind { Ode, Gcn };

struct ModelConfig {
    int history = 12;
    int horizon = 12;
    int features = 1;
    int c1 = 64, c2 = 32, c3 = 64;  // tcn_in width, tcn_out bottleneck, block output width
    int blocks_per_kind = 3;
    int layers = 2;
    int kernel_width = 2;
    int head_hidden = 256;
    SolverConfig solver;
    CoreKind core = CoreKind::Ode;
    int gcn_depth = 2;  // stacked graph convolutions when core = Gcn
    bool use_semantic = true;
    double alpha = 0.8;
    double sigma = 10.0;
    bool sigma_is_squared = false;
    double eps_spatial = 0.5;
    double eps_semantic = 0.6;
    int semantic_top_k = 0;  // 0 keeps the threshold rule
    int dtw_band = -1;
    double huber_delta = 1.0;

    void validate() const {
        auto positive = [](int v, const char* what) {
            if (v < 1) throw ValidationError(std::string("ModelConfig: ") + what + " must be >= 1");
        };
        positive(history, "history");
        positive(horizon, "horizon");
        positive(features, "features");
        positive(c1, "c1");
        positive(c2, "c2");
        positive(c3, "c3");
        positive(blocks_per_kind, "blocks_per_kind");
        positive(layers, "layers");
        positive(kernel_width, "kernel_width");
        positive(head_hidden, "head_hidden");
        positive(gcn_depth, "gcn_depth");
        solver.validate();
        if (alpha <= 0.0 || alpha >= 1.0) throw ValidationError("ModelConfig: alpha must lie in (0,1)");
        if (sigma <= 0.0) throw ValidationError("ModelConfig: sigma must be positive");
        if (eps_spatial < 0.0 || eps_spatial > 1.0)
            throw ValidationError("ModelConfig: eps_spatial must lie in [0,1]");
        if (eps_semantic <= 0.0) throw ValidationError("ModelConfig: eps_semantic must be positive");
        if (huber_delta <= 0.0) throw ValidationError("ModelConfig: huber_delta must be positive");
        if (semantic_top_k < 0) throw ValidationError("ModelConfig: semantic_top_k must be >= 0");
    }
};

struct StgodeBlock {
    AdjacencyKind kind = AdjacencyKind::Spatial;
    TcnStack tcn_in;
    FactoredTransform u;  // history x history
    FactoredTransform w;  // c1 x c1
    std::vector<DenseMatrix> gcn_weights;
    TcnStack tcn_out;
};

struct StgodeNetwork {
    ModelConfig cfg;
    RegularizedAdjacency adj_spatial;
    RegularizedAdjacency adj_semantic;
    std::vector<std::vector<StgodeBlock>> layers;  // within a layer: spatial blocks, then semantic
    DenseMatrix head_w1;
    std::vector<double> head_b1;
    DenseMatrix head_w2;
    std::vector<double> head_b2;
};

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

inline StgodeNetwork init_network(const ModelConfig& cfg, RegularizedAdjacency adj_spatial,
                                  RegularizedAdjacency adj_semantic, std::uint64_t seed) {
    cfg.validate();
    if (adj_spatial.n() < 1) throw ValidationError("init_network: spatial adjacency is empty");
    if (cfg.use_semantic && adj_semantic.n() != adj_spatial.n()) {
        throw ShapeError("init_network: semantic adjacency size does not match spatial");
    }

    StgodeNetwork net;
    net.cfg = cfg;
    net.adj_spatial = std::move(adj_spatial);
    net.adj_semantic = std::move(adj_semantic);

    std::uint64_t counter = 0;
    auto next_seed = [&]() { return seed + 0x9e3779b97f4a7c15ULL * ++counter; };

    const int kinds = cfg.use_semantic ? 2 : 1;
    net.layers.resize(cfg.layers);
    for (int li = 0; li < cfg.layers; ++li) {
        const int fin = li == 0 ? cfg.features : cfg.c3;
        for (int kd = 0; kd < kinds; ++kd) {
            for (int bi = 0; bi < cfg.blocks_per_kind; ++bi) {
                StgodeBlock b;
                b.kind = kd == 0 ? AdjacencyKind::Spatial : AdjacencyKind::Semantic;
                b.tcn_in = random_tcn_stack({fin, cfg.c1, cfg.c1}, cfg.kernel_width, next_seed());
                b.u = FactoredTransform::random(cfg.history, next_seed(), 0.2, 0.8);
                b.w = FactoredTransform::random(cfg.c1, next_seed(), 0.2, 0.8);
                if (cfg.core == CoreKind::Gcn) {
                    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.c1));
                    for (int d = 0; d < cfg.gcn_depth; ++d) {
                        DenseMatrix wl(cfg.c1, cfg.c1);
                        Rng rng(next_seed());
                        for (double& v : wl.data) v = scale * draw_normal(rng);
                        b.gcn_weights.push_back(std::move(wl));
                    }
                }
                b.tcn_out = random_tcn_stack({cfg.c1, cfg.c2, cfg.c3}, cfg.kernel_width, next_seed());
                net.layers[li].push_back(std::move(b));
            }
        }
    }

    const int head_in = cfg.history * cfg.c3;
    net.head_w1 = DenseMatrix(head_in, cfg.head_hidden);
    net.head_w2 = DenseMatrix(cfg.head_hidden, cfg.horizon);
    {
        Rng rng(next_seed());
        const double s1 = 1.0 / std::sqrt(static_cast<double>(head_in));
        for (double& v : net.head_w1.data) v = s1 * draw_normal(rng);
        const double s2 = 1.0 / std::sqrt(static_cast<double>(cfg.head_hidden));
        for (double& v : net.head_w2.data) v = s2 * draw_normal(rng);
    }
    net.head_b1.assign(cfg.head_hidden, 0.0);
    net.head_b2.assign(cfg.horizon, 0.0);
    return net;
}

// ---------------------------------------------------------------------------
// Parameter enumeration
// ---------------------------------------------------------------------------

// Fixed walk order shared by the trainer, the checkpoint format, and the
// tape builder: per layer, per block (spatial first) -> tcn_in convs
// (kernel, bias) then projection -> core (u.basis, u.eigvals, w.basis,
// w.eigvals, or gcn weights) -> tcn_out -> head (w1, b1, w2, b2).
// fn(name, vector<double>&, d0, d1, d2).
template <typename Net, typename Fn>
inline void visit_params(Net& net, Fn&& fn) {
    auto visit_stack = [&](auto& stack, const std::string& prefix) {
        for (std::size_t i = 0; i < stack.layers.size(); ++i) {
            auto& layer = stack.layers[i];
            fn(prefix + ".conv" + std::to_string(i) + ".kernel", layer.kernel.data, layer.kernel.n1,
               layer.kernel.n2, layer.kernel.n3);
            fn(prefix + ".conv" + std::to_string(i) + ".bias", layer.bias,
               static_cast<int>(layer.bias.size()), 1, 1);
        }
        if (stack.has_projection()) {
            fn(prefix + ".proj", stack.residual_proj.data, stack.residual_proj.rows,
               stack.residual_proj.cols, 1);
        }
    };

    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        for (std::size_t bi = 0; bi < net.layers[li].size(); ++bi) {
            auto& b = net.layers[li][bi];
            const std::string p = "layer" + std::to_string(li) + ".block" + std::to_string(bi) + "." +
                                  adjacency_kind_name(b.kind);
            visit_stack(b.tcn_in, p + ".tcn_in");
            if (net.cfg.core == CoreKind::Ode) {
                fn(p + ".u.basis", b.u.basis.data, b.u.basis.rows, b.u.basis.cols, 1);
                fn(p + ".u.eigvals", b.u.eigvals, static_cast<int>(b.u.eigvals.size()), 1, 1);
                fn(p + ".w.basis", b.w.basis.data, b.w.basis.rows, b.w.basis.cols, 1);
                fn(p + ".w.eigvals", b.w.eigvals, static_cast<int>(b.w.eigvals.size()), 1, 1);
            } else {
                for (std::size_t d = 0; d < b.gcn_weights.size(); ++d) {
                    fn(p + ".gcn" + std::to_string(d), b.gcn_weights[d].data, b.gcn_weights[d].rows,
                       b.gcn_weights[d].cols, 1);
                }
            }
            visit_stack(b.tcn_out, p + ".tcn_out");
        }
    }
    fn("head.w1", net.head_w1.data, net.head_w1.rows, net.head_w1.cols, 1);
    fn("head.b1", net.head_b1, static_cast<int>(net.head_b1.size()), 1, 1);
    fn("head.w2", net.head_w2.data, net.head_w2.rows, net.head_w2.cols, 1);
    fn("head.b2", net.head_b2, static_cast<int>(net.head_b2.size()), 1, 1);
}

struct ParamView {
    std::string name;
    std::vector<double>* data;
};

inline std::vector<ParamView> collect_params(StgodeNetwork& net) {
    std::vector<ParamView> out;
    visit_params(net, [&](const std::string& name, std::vector<double>& v, int, int, int) {
        out.push_back({name, &v});
    });
    return out;
}

inline std::size_t param_count(StgodeNetwork& net) {
    std::size_t n = 0;
    visit_params(net, [&](const std::string&, std::vector<double>& v, int, int, int) { n += v.size(); });
    return n;
}

// ---------------------------------------------------------------------------
// Plain forward
// ---------------------------------------------------------------------------

inline const RegularizedAdjacency& block_adjacency(const StgodeNetwork& net, const StgodeBlock& b) {
    return b.kind == AdjacencyKind::Spatial ? net.adj_spatial : net.adj_semantic;
}

inline Tensor3 core_forward(const Tensor3& h0, const StgodeBlock& b, const RegularizedAdjacency& adj,
                            const ModelConfig& cfg) {
    if (cfg.core == CoreKind::Ode) {
        OdeParams p{adj, b.u, b.w, h0};
        return euler_solve(p, cfg.solver, DynamicsKind::Taylor);
    }
    Tensor3 h = h0;
    for (int d = 0; d < cfg.gcn_depth; ++d) {
        h = mode_product(mode_product(h, adj.a_hat, 1), b.gcn_weights[d], 3);
        for (double& v : h.data) v = std::tanh(v);
    }
    return h;
}

inline Tensor3 block_forward(const Tensor3& x, const StgodeBlock& b, const RegularizedAdjacency& adj,
                             const ModelConfig& cfg) {
    const Tensor3 h0 = tcn_forward(x, b.tcn_in);
    const Tensor3 h = core_forward(h0, b, adj, cfg);
    return tcn_forward(h, b.tcn_out);
}

/// Elementwise max over the block outputs; ties keep the earlier block.
inline Tensor3 layer_forward(const Tensor3& x, const std::vector<StgodeBlock>& blocks,
                             const StgodeNetwork& net) {
    if (blocks.empty()) throw ValidationError("layer_forward: empty block list");
    Tensor3 pooled = block_forward(x, blocks[0], block_adjacency(net, blocks[0]), net.cfg);
    for (std::size_t i = 1; i < blocks.size(); ++i) {
        const Tensor3 o = block_forward(x, blocks[i], block_adjacency(net, blocks[i]), net.cfg);
        for (std::size_t p = 0; p < pooled.data.size(); ++p) {
            pooled.data[p] = pooled.data[p] >= o.data[p] ? pooled.data[p] : o.data[p];
        }
    }
    return pooled;
}

/// Normalized-unit predictions of dims (N, horizon, 1).
inline Tensor3 forecast(const StgodeNetwork& net, const Tensor3& x) {
    const ModelConfig& cfg = net.cfg;
    if (x.n1 != net.adj_spatial.n()) {
        throw ValidationError("forecast: input node count " + std::to_string(x.n1) +
                              " does not match adjacency size " + std::to_string(net.adj_spatial.n()));
    }
    if (x.n2 != cfg.history || x.n3 != cfg.features) {
        throw ValidationError("forecast: input dims (" + std::to_string(x.n2) + "," + std::to_string(x.n3) +
                              ") do not match configured history/features");
    }
    Tensor3 h = x;
    for (const auto& blocks : net.layers) h = layer_forward(h, blocks, net);

    const int n = h.n1;
    const int flat = h.n2 * h.n3;
    DenseMatrix xm = DenseMatrix::from_data(n, flat, h.data);
    DenseMatrix h1 = matmul(xm, net.head_w1);
    for (int r = 0; r < h1.rows; ++r)
        for (int c = 0; c < h1.cols; ++c) h1(r, c) = std::tanh(h1(r, c) + net.head_b1[c]);
    DenseMatrix out = matmul(h1, net.head_w2);
    Tensor3 pred(n, cfg.horizon, 1);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < cfg.horizon; ++c) pred(r, c, 0) = out(r, c) + net.head_b2[c];
    return pred;
}

// ---------------------------------------------------------------------------
// Tape-recorded forward
// ---------------------------------------------------------------------------

struct TapeForecast {
    std::vector<int> param_ids;  // parallel to collect_params order
    int input_id = -1;
    int pred_id = -1;  // (N, horizon, 1)
};

/// Records the forecast computation for one input window on the tape.
/// Leaf ids for every parameter come back in collect_params order, so the
/// trainer can read gradients positionally.
inline TapeForecast tape_forecast(Tape& tape, const StgodeNetwork& net, const Tensor3& x) {
    const ModelConfig& cfg = net.cfg;
    TapeForecast tf;
    visit_params(const_cast<StgodeNetwork&>(net),
                 [&](const std::string&, std::vector<double>& v, int d0, int d1, int d2) {
                     tf.param_ids.push_back(tape.leaf(v.data(), d0, d1, d2));
                 });
    std::size_t cursor = 0;
    auto next = [&]() { return tf.param_ids[cursor++]; };

    auto tape_stack = [&](int in_id, const TcnStack& stack) {
        int y = in_id;
        for (const TcnLayer& layer : stack.layers) {
            const int kid = next();
            const int bid = next();
            y = tape.conv1d(y, kid, bid, layer.dilation);
            if (layer.act == Activation::Tanh) y = tape.tanh_op(y);
        }
        const int res = stack.has_projection() ? tape.mode_product_op(in_id, next(), 3) : in_id;
        return tape.add(y, res);
    };

    auto tape_core = [&](int h0_id, const StgodeBlock& b, const RegularizedAdjacency& adj) {
        if (cfg.core == CoreKind::Ode) {
            const int ub = next();
            const int ue = next();
            const int wb = next();
            const int we = next();
            const int aid = tape.leaf(detail::minus_identity(adj.a_hat));
            const int umI = tape.add_diag(tape.matmul_nt(tape.colscale(ub, ue), ub), -1.0);
            const int wmI = tape.add_diag(tape.matmul_nt(tape.colscale(wb, we), wb), -1.0);
            const double dt = cfg.solver.t_end / cfg.solver.steps;
            int h = h0_id;
            for (int k = 0; k < cfg.solver.steps; ++k) {
                int f = tape.add(tape.mode_product_op(h, aid, 1), tape.mode_product_op(h, umI, 2));
                f = tape.add(f, tape.mode_product_op(h, wmI, 3));
                f = tape.add(f, h0_id);
                h = tape.add_scaled(h, f, dt);
            }
            return h;
        }
        const int aid = tape.leaf(adj.a_hat);
        int h = h0_id;
        for (std::size_t d = 0; d < b.gcn_weights.size(); ++d) {
            h = tape.tanh_op(tape.mode_product_op(tape.mode_product_op(h, aid, 1), next(), 3));
        }
        return h;
    };

    tf.input_id = tape.leaf(x);
    int h = tf.input_id;
    for (const auto& blocks : net.layers) {
        int pooled = -1;
        for (const StgodeBlock& b : blocks) {
            const int h0 = tape_stack(h, b.tcn_in);
            const int core = tape_core(h0, b, block_adjacency(net, b));
            const int out = tape_stack(core, b.tcn_out);
            pooled = pooled < 0 ? out : tape.max_pair(pooled, out);
        }
        h = pooled;
    }

    const int n = tape.dim0(h);
    const int flat = tape.dim1(h) * tape.dim2(h);
    const int xm = tape.reshape(h, n, flat, 1);
    const int w1 = next();
    const int b1 = next();
    const int w2 = next();
    const int b2 = next();
    const int h1 = tape.tanh_op(tape.add_rowvec(tape.matmul_op(xm, w1), b1));
    const int out = tape.add_rowvec(tape.matmul_op(h1, w2), b2);
    tf.pred_id = tape.reshape(out, n, cfg.horizon, 1);

    if (cursor != tf.param_ids.size()) {
        throw ValidationError("tape_forecast: parameter walk out of sync with registry");
    }
    return tf;
}

// ---------------------------------------------------------------------------
// Checkpointing
// ---------------------------------------------------------------------------

inline const char* core_kind_name(CoreKind k) { return k == CoreKind::Ode ? "ode" : "gcn"; }

inline nlohmann::json config_to_json(const ModelConfig& cfg) {
    nlohmann::json j;
    j["history"] = cfg.history;
    j["horizon"] = cfg.horizon;
    j["features"] = cfg.features;
    j["c1"] = cfg.c1;
    j["c2"] = cfg.c2;
    j["c3"] = cfg.c3;
    j["blocks_per_kind"] = cfg.blocks_per_kind;
    j["layers"] = cfg.layers;
    j["kernel_width"] = cfg.kernel_width;
    j["head_hidden"] = cfg.head_hidden;
    j["t_end"] = cfg.solver.t_end;
    j["steps"] = cfg.solver.steps;
    j["core"] = core_kind_name(cfg.core);
    j["gcn_depth"] = cfg.gcn_depth;
    j["use_semantic"] = cfg.use_semantic;
    j["alpha"] = cfg.alpha;
    j["sigma"] = cfg.sigma;
    j["sigma_is_squared"] = cfg.sigma_is_squared;
    j["eps_spatial"] = cfg.eps_spatial;
    j["eps_semantic"] = cfg.eps_semantic;
    j["semantic_top_k"] = cfg.semantic_top_k;
    j["dtw_band"] = cfg.dtw_band;
    j["huber_delta"] = cfg.huber_delta;
    return j;
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig cfg;
    cfg.history = j.at("history").get<int>();
    cfg.horizon = j.at("horizon").get<int>();
    cfg.features = j.at("features").get<int>();
    cfg.c1 = j.at("c1").get<int>();
    cfg.c2 = j.at("c2").get<int>();
    cfg.c3 = j.at("c3").get<int>();
    cfg.blocks_per_kind = j.at("blocks_per_kind").get<int>();
    cfg.layers = j.at("layers").get<int>();
    cfg.kernel_width = j.at("kernel_width").get<int>();
    cfg.head_hidden = j.at("head_hidden").get<int>();
    cfg.solver.t_end = j.at("t_end").get<double>();
    cfg.solver.steps = j.at("steps").get<int>();
    const std::string core = j.at("core").get<std::string>();
    if (core == "ode") {
        cfg.core = CoreKind::Ode;
    } else if (core == "gcn") {
        cfg.core = CoreKind::Gcn;
    } else {
        throw ValidationError("config: unknown core kind '" + core + "'");
    }
    cfg.gcn_depth = j.at("gcn_depth").get<int>();
    cfg.use_semantic = j.at("use_semantic").get<bool>();
    cfg.alpha = j.at("alpha").get<double>();
    cfg.sigma = j.at("sigma").get<double>();
    cfg.sigma_is_squared = j.at("sigma_is_squared").get<bool>();
    cfg.eps_spatial = j.at("eps_spatial").get<double>();
    cfg.eps_semantic = j.at("eps_semantic").get<double>();
    cfg.semantic_top_k = j.at("semantic_top_k").get<int>();
    cfg.dtw_band = j.at("dtw_band").get<int>();
    cfg.huber_delta = j.at("huber_delta").get<double>();
    cfg.validate();
    return cfg;
}

inline nlohmann::json adjacency_to_json(const RegularizedAdjacency& adj) {
    nlohmann::json j;
    j["n"] = adj.n();
    j["alpha"] = adj.alpha;
    j["kind"] = adjacency_kind_name(adj.kind);
    j["a_hat"] = adj.a_hat.data;
    return j;
}

inline RegularizedAdjacency adjacency_from_json(const nlohmann::json& j) {
    const int n = j.at("n").get<int>();
    auto data = j.at("a_hat").get<std::vector<double>>();
    DenseMatrix m = DenseMatrix::from_data(n, n, std::move(data));
    const AdjacencyKind kind = j.at("kind").get<std::string>() == "semantic" ? AdjacencyKind::Semantic
                                                                             : AdjacencyKind::Spatial;
    return adjacency_from_matrix(m, j.at("alpha").get<double>(), kind);
}

/// Self-describing single-file checkpoint; doubles survive the JSON
/// round-trip bit-exactly (shortest round-trip formatting).
inline void save_checkpoint(const StgodeNetwork& net, const std::vector<double>& norm_mean,
                            const std::vector<double>& norm_std, double ratio_train, double ratio_val,
                            const std::string& path) {
    nlohmann::json j;
    j["format"] = "stgode-checkpoint";
    j["version"] = 1;
    j["config"] = config_to_json(net.cfg);
    j["normalizer"] = {{"mean", norm_mean}, {"std", norm_std}};
    j["split"] = {{"ratio_train", ratio_train}, {"ratio_val", ratio_val}};
    j["adjacency"]["spatial"] = adjacency_to_json(net.adj_spatial);
    if (net.cfg.use_semantic) j["adjacency"]["semantic"] = adjacency_to_json(net.adj_semantic);

    nlohmann::json params = nlohmann::json::array();
    visit_params(const_cast<StgodeNetwork&>(net),
                 [&](const std::string& name, std::vector<double>& v, int d0, int d1, int d2) {
                     if (!all_finite(v.data(), v.size())) {
                         throw ValidationError("save_checkpoint: non-finite values in " + name);
                     }
                     params.push_back({{"name", name}, {"dims", {d0, d1, d2}}, {"data", v}});
                 });
    j["params"] = std::move(params);
    atomic_write_text(path, j.dump());
}

struct LoadedCheckpoint {
    StgodeNetwork net;
    std::vector<double> norm_mean;
    std::vector<double> norm_std;
    double ratio_train = 0.6;
    double ratio_val = 0.2;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("checkpoint " + path + " is not valid JSON: " + e.what());
    }
    if (j.value("format", "") != "stgode-checkpoint") {
        throw ValidationError("checkpoint " + path + " has an unexpected format tag");
    }
    LoadedCheckpoint out;
    const ModelConfig cfg = config_from_json(j.at("config"));
    RegularizedAdjacency sp = adjacency_from_json(j.at("adjacency").at("spatial"));
    RegularizedAdjacency se;
    if (cfg.use_semantic) se = adjacency_from_json(j.at("adjacency").at("semantic"));
    out.net = init_network(cfg, std::move(sp), std::move(se), 0);
    out.norm_mean = j.at("normalizer").at("mean").get<std::vector<double>>();
    out.norm_std = j.at("normalizer").at("std").get<std::vector<double>>();
    out.ratio_train = j.at("split").at("ratio_train").get<double>();
    out.ratio_val = j.at("split").at("ratio_val").get<double>();

    const auto& params = j.at("params");
    std::size_t idx = 0;
    visit_params(out.net, [&](const std::string& name, std::vector<double>& v, int, int, int) {
        if (idx >= params.size()) throw ValidationError("checkpoint: missing parameter " + name);
        const auto& entry = params[idx++];
        if (entry.at("name").get<std::string>() != name) {
            throw ValidationError("checkpoint: parameter order mismatch, expected " + name + " found " +
                                  entry.at("name").get<std::string>());
        }
        auto data = entry.at("data").get<std::vector<double>>();
        if (data.size() != v.size()) {
            throw ValidationError("checkpoint: parameter " + name + " has size " +
                                  std::to_string(data.size()) + ", model expects " +
                                  std::to_string(v.size()));
        }
        v = std::move(data);
    });
    if (idx != params.size()) throw ValidationError("checkpoint: extra parameters beyond the model layout");
    return out;
}

}  // namespace stgode

#endif  // STGODE_MODEL_HPP
