#ifndef STGODE_TRAIN_HPP
#define STGODE_TRAIN_HPP

// Training loop: Huber objective, tape-backed batch gradients with a fixed
// accumulation order, Adam with post-step reprojection of the factored
// transforms, and denormalized evaluation metrics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "stgode/autograd.hpp"
#include "stgode/common.hpp"
#include "stgode/data.hpp"
#include "stgode/model.hpp"

namespace stgode {

struct TrainConfig {
    double lr = 0.01;
    int batch_size = 32;
    int epochs = 200;
    std::uint64_t seed = 1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int max_train_windows = 0;  // <= 0 keeps every training window
    double ratio_train = 0.6;
    double ratio_val = 0.2;

    void validate() const {
        if (lr <= 0.0) throw ValidationError("TrainConfig: lr must be positive");
        if (batch_size < 1) throw ValidationError("TrainConfig: batch_size must be >= 1");
        if (epochs < 1) throw ValidationError("TrainConfig: epochs must be >= 1");
        if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
            throw ValidationError("TrainConfig: betas must lie in [0, 1)");
        }
        if (adam_eps <= 0.0) throw ValidationError("TrainConfig: adam_eps must be positive");
    }
};

/// Same accumulation order as the tape op so reported losses agree.
inline double huber_loss(const Tensor3& pred, const Tensor3& target, double delta) {
    if (!pred.same_dims(target)) throw ShapeError("huber_loss: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const double e = pred.data[i] - target.data[i];
        const double a = std::abs(e);
        acc += a <= delta ? 0.5 * e * e : delta * a - 0.5 * delta * delta;
    }
    return acc / static_cast<double>(pred.data.size());
}

using GradBuffers = std::vector<std::vector<double>>;

inline std::string first_nonfinite_param(const StgodeNetwork& net) {
    std::string found;
    visit_params(const_cast<StgodeNetwork&>(net),
                 [&](const std::string& name, std::vector<double>& v, int, int, int) {
                     if (found.empty() && !all_finite(v.data(), v.size())) found = name;
                 });
    return found;
}

/// Mean Huber loss over the batch; gradients for every parameter are
/// accumulated into `grads` (dimensioned like collect_params output) in a
/// fixed sample order, each sample seeded with 1/B.
inline double batch_gradients(Tape& tape, const StgodeNetwork& net, const std::vector<Tensor3>& inputs,
                              const std::vector<Tensor3>& targets, double delta, GradBuffers& grads) {
    if (inputs.empty() || inputs.size() != targets.size()) {
        throw ValidationError("batch_gradients: inputs and targets must be non-empty and aligned");
    }
    const auto params = collect_params(const_cast<StgodeNetwork&>(net));
    if (grads.size() != params.size()) {
        grads.assign(params.size(), {});
    }
    for (std::size_t p = 0; p < params.size(); ++p) {
        grads[p].assign(params[p].data->size(), 0.0);
    }

    const double inv_b = 1.0 / static_cast<double>(inputs.size());
    double loss_acc = 0.0;
    for (std::size_t s = 0; s < inputs.size(); ++s) {
        tape.reset();
        const TapeForecast tf = tape_forecast(tape, net, inputs[s]);
        const std::size_t target_id = tape.leaf(targets[s]);
        const std::size_t loss_id = tape.huber_mean(tf.pred_id, target_id, delta);
        const double sample_loss = tape.value(loss_id)[0];
        if (!std::isfinite(sample_loss)) {
            std::string name = first_nonfinite_param(net);
            if (name.empty()) {
                name = all_finite(tape.value(tf.pred_id), tape.value_size(tf.pred_id)) ? "loss"
                                                                                       : "prediction";
            }
            throw ValidationError("training diverged: first non-finite value in '" + name + "'");
        }
        loss_acc += sample_loss;
        tape.backward(loss_id, inv_b);
        for (std::size_t p = 0; p < params.size(); ++p) {
            const double* g = tape.gradient(tf.param_ids[p]);
            std::vector<double>& dst = grads[p];
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
        }
    }
    return loss_acc * inv_b;
}

struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    long step_count = 0;

    static AdamState init(const std::vector<ParamView>& params) {
        AdamState st;
        st.m.reserve(params.size());
        st.v.reserve(params.size());
        for (const ParamView& p : params) {
            st.m.emplace_back(p.data->size(), 0.0);
            st.v.emplace_back(p.data->size(), 0.0);
        }
        return st;
    }
};

inline void adam_step(std::vector<ParamView>& params, const GradBuffers& grads, AdamState& st,
                      const TrainConfig& cfg) {
    if (params.size() != grads.size() || params.size() != st.m.size()) {
        throw ValidationError("adam_step: state size mismatch");
    }
    ++st.step_count;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step_count));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step_count));
    for (std::size_t p = 0; p < params.size(); ++p) {
        std::vector<double>& w = *params[p].data;
        const std::vector<double>& g = grads[p];
        for (std::size_t i = 0; i < w.size(); ++i) {
            double& mi = st.m[p][i];
            double& vi = st.v[p][i];
            mi = cfg.beta1 * mi + (1.0 - cfg.beta1) * g[i];
            vi = cfg.beta2 * vi + (1.0 - cfg.beta2) * g[i] * g[i];
            w[i] -= cfg.lr * (mi / bc1) / (std::sqrt(vi / bc2) + cfg.adam_eps);
        }
    }
}

/// Restore orthonormal bases and clamped eigenvalues after a raw Adam update.
inline void reproject_network(StgodeNetwork& net) {
    if (net.cfg.core != CoreKind::Ode) return;
    for (auto& layer : net.layers) {
        for (StgodeBlock& b : layer) {
            b.u = reproject(b.u);
            b.w = reproject(b.w);
        }
    }
}

inline double mean_huber(const StgodeNetwork& net, const SeriesData& series, const Normalizer& nz,
                         const std::vector<int>& starts, double delta) {
    if (starts.empty()) return std::numeric_limits<double>::quiet_NaN();
    double acc = 0.0;
    for (const int start : starts) {
        auto [input, target] = window_tensors(series, nz, start, net.cfg.history, net.cfg.horizon);
        acc += huber_loss(forecast(net, input), target, delta);
    }
    return acc / static_cast<double>(starts.size());
}

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainOutcome {
    std::vector<EpochStats> history;
    int best_epoch = -1;
    double best_val = std::numeric_limits<double>::infinity();
    StgodeNetwork best_net;
};

/// Windows are shuffled inside the training split only; validation and test
/// stay in chronological order. The returned network is the best-validation
/// snapshot (the final state when there are no validation windows).
inline TrainOutcome train_model(StgodeNetwork& net, const SeriesData& series, const Normalizer& nz,
                                const SplitWindows& sw, const TrainConfig& tcfg) {
    tcfg.validate();
    if (sw.train_starts.empty()) throw ValidationError("train_model: no training windows");

    const std::vector<int> train_starts = subsample_starts(sw.train_starts, tcfg.max_train_windows);
    std::vector<Tensor3> inputs, targets;
    inputs.reserve(train_starts.size());
    targets.reserve(train_starts.size());
    for (const int start : train_starts) {
        auto [x, y] = window_tensors(series, nz, start, net.cfg.history, net.cfg.horizon);
        inputs.push_back(std::move(x));
        targets.push_back(std::move(y));
    }

    auto params = collect_params(net);
    AdamState adam = AdamState::init(params);
    GradBuffers grads;
    Tape tape;
    Rng shuffle_rng(tcfg.seed);
    std::vector<std::size_t> order(inputs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainOutcome out;
    std::vector<Tensor3> batch_x, batch_y;
    for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0;
        int n_batches = 0;
        for (std::size_t pos = 0; pos < order.size(); pos += tcfg.batch_size) {
            const std::size_t end = std::min(order.size(), pos + tcfg.batch_size);
            batch_x.clear();
            batch_y.clear();
            for (std::size_t i = pos; i < end; ++i) {
                batch_x.push_back(inputs[order[i]]);
                batch_y.push_back(targets[order[i]]);
            }
            epoch_loss += batch_gradients(tape, net, batch_x, batch_y, net.cfg.huber_delta, grads);
            adam_step(params, grads, adam, tcfg);
            reproject_network(net);
            ++n_batches;
        }
        epoch_loss /= static_cast<double>(n_batches);

        const double val_loss = mean_huber(net, series, nz, sw.val_starts, net.cfg.huber_delta);
        out.history.push_back({epoch, epoch_loss, val_loss});
        if (sw.val_starts.empty() || val_loss < out.best_val) {
            out.best_val = sw.val_starts.empty() ? epoch_loss : val_loss;
            out.best_epoch = epoch;
            out.best_net = net;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct Metrics {
    double rmse = 0.0;
    double mae = 0.0;
    double mape = std::numeric_limits<double>::quiet_NaN();  // NaN when every target is masked
    std::vector<double> rmse_step;
    std::vector<double> mae_step;
    std::vector<double> mape_step;
};

namespace detail {

struct MetricAccum {
    double se = 0.0, ae = 0.0, ape = 0.0;
    long count = 0, mape_count = 0;

    void add(double pred, double actual) {
        const double e = pred - actual;
        se += e * e;
        ae += std::abs(e);
        ++count;
        if (std::abs(actual) > 1e-3) {
            ape += std::abs(e / actual);
            ++mape_count;
        }
    }
};

inline void finalize(const std::vector<MetricAccum>& per_step, Metrics& m) {
    MetricAccum total;
    for (const MetricAccum& a : per_step) {
        total.se += a.se;
        total.ae += a.ae;
        total.ape += a.ape;
        total.count += a.count;
        total.mape_count += a.mape_count;
        m.rmse_step.push_back(a.count ? std::sqrt(a.se / a.count) : 0.0);
        m.mae_step.push_back(a.count ? a.ae / a.count : 0.0);
        m.mape_step.push_back(a.mape_count ? 100.0 * a.ape / a.mape_count
                                           : std::numeric_limits<double>::quiet_NaN());
    }
    m.rmse = total.count ? std::sqrt(total.se / total.count) : 0.0;
    m.mae = total.count ? total.ae / total.count : 0.0;
    if (total.mape_count) m.mape = 100.0 * total.ape / total.mape_count;
}

}  // namespace detail

/// Model metrics in original units over the given window starts.
inline Metrics evaluate_forecasts(const StgodeNetwork& net, const SeriesData& series, const Normalizer& nz,
                                  const std::vector<int>& starts) {
    if (starts.empty()) throw ValidationError("evaluate_forecasts: no windows");
    const int history = net.cfg.history;
    const int horizon = net.cfg.horizon;
    std::vector<detail::MetricAccum> per_step(horizon);
    for (const int start : starts) {
        auto [input, target] = window_tensors(series, nz, start, history, horizon);
        const Tensor3 pred = forecast(net, input);
        for (int t = 0; t < horizon; ++t) {
            for (int n = 0; n < series.nodes; ++n) {
                per_step[t].add(nz.denormalize(pred(n, t, 0), 0), series.at(start + history + t, n, 0));
            }
        }
    }
    Metrics m;
    detail::finalize(per_step, m);
    return m;
}

/// Repeat-last-observation baseline over the same windows.
inline Metrics persistence_metrics(const SeriesData& series, const std::vector<int>& starts, int history,
                                   int horizon) {
    if (starts.empty()) throw ValidationError("persistence_metrics: no windows");
    std::vector<detail::MetricAccum> per_step(horizon);
    for (const int start : starts) {
        for (int n = 0; n < series.nodes; ++n) {
            const double last = series.at(start + history - 1, n, 0);
            for (int t = 0; t < horizon; ++t) per_step[t].add(last, series.at(start + history + t, n, 0));
        }
    }
    Metrics m;
    detail::finalize(per_step, m);
    return m;
}

}  // namespace stgode

#endif  // STGODE_TRAIN_HPP
