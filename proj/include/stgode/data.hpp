#ifndef STGODE_DATA_HPP
#define STGODE_DATA_HPP

// Dataset plumbing: CSV ingestion (header = node ids, one row per step),
// z-score normalization fit on the training split, chronological
// split/windowing, and the synthetic graph-diffusion generator.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stgode/common.hpp"
#include "stgode/graph.hpp"
#include "stgode/io.hpp"
#include "stgode/tensor.hpp"

namespace stgode {

// ---------------------------------------------------------------------------
// Series container
// ---------------------------------------------------------------------------

struct SeriesData {
    std::vector<std::string> node_ids;
    int steps = 0;
    int nodes = 0;
    int features = 1;
    std::vector<double> values;  // (step, node, feature) row-major

    double at(int t, int n, int f) const {
        return values[(static_cast<std::size_t>(t) * nodes + n) * features + f];
    }
    double& at(int t, int n, int f) {
        return values[(static_cast<std::size_t>(t) * nodes + n) * features + f];
    }

    /// one node's feature-0 history, for DTW and baselines
    std::vector<double> node_series(int n, int upto_step = -1) const {
        const int limit = upto_step < 0 ? steps : upto_step;
        std::vector<double> out(limit);
        for (int t = 0; t < limit; ++t) out[t] = at(t, n, 0);
        return out;
    }
};

// ---------------------------------------------------------------------------
// CSV parsing and writing
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view field, const std::string& path, int line_no) {
    field = trim(field);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw IoError(path + ":" + std::to_string(line_no) + ": cannot parse '" + std::string(field) +
                      "' as a finite number");
    }
    return v;
}

inline std::vector<std::string> read_lines(const std::string& path) {
    const std::string text = read_text(path);
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t pos = text.find('\n', start);
        if (pos == std::string::npos) {
            if (start < text.size()) lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

inline std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace detail

/// First path is feature 0 (the forecast target); any further paths add
/// feature planes and must agree on the header and row count.
inline SeriesData load_series_csv(const std::vector<std::string>& paths) {
    if (paths.empty()) throw ValidationError("load_series_csv: no input files");
    SeriesData s;
    s.features = static_cast<int>(paths.size());
    std::vector<std::vector<std::string>> files;
    for (const std::string& path : paths) {
        auto lines = detail::read_lines(path);
        if (lines.size() < 2) throw IoError(path + ": expected a header row and at least one data row");
        files.push_back(std::move(lines));
    }

    for (std::string_view id : detail::split_csv_line(files[0][0])) {
        const std::string name(detail::trim(id));
        if (name.empty()) throw IoError(paths[0] + ":1: empty node id in header");
        s.node_ids.push_back(name);
    }
    s.nodes = static_cast<int>(s.node_ids.size());
    s.steps = static_cast<int>(files[0].size()) - 1;

    for (std::size_t f = 1; f < files.size(); ++f) {
        if (files[f][0] != files[0][0]) {
            throw IoError(paths[f] + ":1: header differs from " + paths[0]);
        }
        if (files[f].size() != files[0].size()) {
            throw IoError(paths[f] + ": row count differs from " + paths[0]);
        }
    }

    s.values.assign(static_cast<std::size_t>(s.steps) * s.nodes * s.features, 0.0);
    for (int f = 0; f < s.features; ++f) {
        for (int t = 0; t < s.steps; ++t) {
            const auto fields = detail::split_csv_line(files[f][t + 1]);
            if (static_cast<int>(fields.size()) != s.nodes) {
                throw IoError(paths[f] + ":" + std::to_string(t + 2) + ": expected " +
                              std::to_string(s.nodes) + " values, found " + std::to_string(fields.size()));
            }
            for (int n = 0; n < s.nodes; ++n) {
                s.at(t, n, f) = detail::parse_double(fields[n], paths[f], t + 2);
            }
        }
    }
    return s;
}

inline void write_series_csv(const SeriesData& s, const std::string& path, int feature = 0) {
    std::string out;
    for (int n = 0; n < s.nodes; ++n) {
        if (n) out += ',';
        out += s.node_ids[n];
    }
    out += '\n';
    for (int t = 0; t < s.steps; ++t) {
        for (int n = 0; n < s.nodes; ++n) {
            if (n) out += ',';
            out += detail::format_double(s.at(t, n, feature));
        }
        out += '\n';
    }
    atomic_write_text(path, out);
}

inline RoadNetwork load_edges_csv(const std::string& path, const std::vector<std::string>& node_ids) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw IoError(path + ": empty edge file");
    {
        const auto header = detail::split_csv_line(lines[0]);
        if (header.size() != 3 || detail::trim(header[0]) != "from" || detail::trim(header[1]) != "to" ||
            detail::trim(header[2]) != "distance") {
            throw IoError(path + ":1: expected header 'from,to,distance'");
        }
    }
    RoadNetwork net;
    net.node_ids = node_ids;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (detail::trim(lines[i]).empty()) continue;
        const auto fields = detail::split_csv_line(lines[i]);
        if (fields.size() != 3) {
            throw IoError(path + ":" + std::to_string(i + 1) + ": expected 3 fields");
        }
        auto find_node = [&](std::string_view name) {
            const std::string key(detail::trim(name));
            for (std::size_t n = 0; n < node_ids.size(); ++n) {
                if (node_ids[n] == key) return static_cast<int>(n);
            }
            throw IoError(path + ":" + std::to_string(i + 1) + ": unknown node id '" + key + "'");
        };
        RoadEdge e;
        e.from = find_node(fields[0]);
        e.to = find_node(fields[1]);
        e.distance = detail::parse_double(fields[2], path, static_cast<int>(i + 1));
        net.edges.push_back(e);
    }
    net.validate();
    return net;
}

inline void write_edges_csv(const RoadNetwork& net, const std::string& path) {
    std::string out = "from,to,distance\n";
    for (const RoadEdge& e : net.edges) {
        out += net.node_ids[e.from];
        out += ',';
        out += net.node_ids[e.to];
        out += ',';
        out += detail::format_double(e.distance);
        out += '\n';
    }
    atomic_write_text(path, out);
}

inline void write_matrix_csv(const DenseMatrix& m, const std::string& path) {
    std::string out;
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) {
            if (c) out += ',';
            out += detail::format_double(m(r, c));
        }
        out += '\n';
    }
    atomic_write_text(path, out);
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

struct Normalizer {
    std::vector<double> mean;
    std::vector<double> std_dev;

    /// Fit per-feature statistics on the first train_steps rows only.
    static Normalizer fit(const SeriesData& s, int train_steps) {
        if (train_steps < 1 || train_steps > s.steps) {
            throw ValidationError("Normalizer::fit: train_steps out of range");
        }
        Normalizer nz;
        nz.mean.assign(s.features, 0.0);
        nz.std_dev.assign(s.features, 1.0);
        const double count = static_cast<double>(train_steps) * s.nodes;
        for (int f = 0; f < s.features; ++f) {
            double acc = 0.0;
            for (int t = 0; t < train_steps; ++t)
                for (int n = 0; n < s.nodes; ++n) acc += s.at(t, n, f);
            nz.mean[f] = acc / count;
            double var = 0.0;
            for (int t = 0; t < train_steps; ++t) {
                for (int n = 0; n < s.nodes; ++n) {
                    const double d = s.at(t, n, f) - nz.mean[f];
                    var += d * d;
                }
            }
            var /= count;
            nz.std_dev[f] = var > 1e-24 ? std::sqrt(var) : 1.0;
        }
        return nz;
    }

    double normalize(double v, int f) const { return (v - mean[f]) / std_dev[f]; }
    double denormalize(double v, int f) const { return v * std_dev[f] + mean[f]; }
};

// ---------------------------------------------------------------------------
// Splitting and windowing
// ---------------------------------------------------------------------------

struct SplitWindows {
    int train_end = 0;  // first step of the validation split
    int val_end = 0;    // first step of the test split
    std::vector<int> train_starts;
    std::vector<int> val_starts;
    std::vector<int> test_starts;
};

/// Chronological split by ratios; a window [t, t + T + T') must lie entirely
/// inside one split.
inline SplitWindows split_and_window(int total_steps, int history, int horizon, double ratio_train = 0.6,
                                     double ratio_val = 0.2) {
    const int span = history + horizon;
    if (total_steps < span) {
        throw ValidationError("split_and_window: series length " + std::to_string(total_steps) +
                              " is shorter than one window (" + std::to_string(span) + ")");
    }
    if (ratio_train <= 0.0 || ratio_val < 0.0 || ratio_train + ratio_val >= 1.0) {
        throw ValidationError("split_and_window: ratios must satisfy 0 < train, 0 <= val, train+val < 1");
    }
    SplitWindows sw;
    sw.train_end = static_cast<int>(total_steps * ratio_train);
    sw.val_end = static_cast<int>(total_steps * (ratio_train + ratio_val));
    auto fill = [span](std::vector<int>& starts, int lo, int hi) {
        for (int t = lo; t + span <= hi; ++t) starts.push_back(t);
    };
    fill(sw.train_starts, 0, sw.train_end);
    fill(sw.val_starts, sw.train_end, sw.val_end);
    fill(sw.test_starts, sw.val_end, total_steps);
    return sw;
}

/// Normalized (input, target) pair for the window starting at `start`;
/// the target is feature 0 over the horizon.
inline std::pair<Tensor3, Tensor3> window_tensors(const SeriesData& s, const Normalizer& nz, int start,
                                                  int history, int horizon) {
    if (start < 0 || start + history + horizon > s.steps) {
        throw ValidationError("window_tensors: window exceeds series bounds");
    }
    Tensor3 input(s.nodes, history, s.features);
    for (int n = 0; n < s.nodes; ++n)
        for (int t = 0; t < history; ++t)
            for (int f = 0; f < s.features; ++f) input(n, t, f) = nz.normalize(s.at(start + t, n, f), f);
    Tensor3 target(s.nodes, horizon, 1);
    for (int n = 0; n < s.nodes; ++n)
        for (int t = 0; t < horizon; ++t)
            target(n, t, 0) = nz.normalize(s.at(start + history + t, n, 0), 0);
    return {std::move(input), std::move(target)};
}

/// Evenly spaced subsample preserving chronological order; cap <= 0 keeps all.
inline std::vector<int> subsample_starts(const std::vector<int>& starts, int cap) {
    if (cap <= 0 || static_cast<int>(starts.size()) <= cap) return starts;
    std::vector<int> out;
    out.reserve(cap);
    const double stride = static_cast<double>(starts.size()) / cap;
    for (int i = 0; i < cap; ++i) out.push_back(starts[static_cast<std::size_t>(i * stride)]);
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic dataset
// ---------------------------------------------------------------------------

struct SynthConfig {
    std::uint64_t seed = 1;
    int nodes = 20;
    int steps = 2000;
    double box = 20.0;     // square side for node placement
    double radius = 9.0;   // geometric-graph connection radius
    double rho = 0.7;      // self persistence of the deviation signal
    double kappa = 0.2;    // graph diffusion coefficient
    double gamma = 3.0;    // periodic forcing gain
    double noise = 2.0;    // innovation std
    int period = 24;       // forcing period in steps
    double base = 50.0;    // signal offset

    void validate() const {
        if (nodes < 2) throw ValidationError("SynthConfig: nodes must be >= 2");
        if (steps < 100) throw ValidationError("SynthConfig: steps must be >= 100");
        if (period < 2) throw ValidationError("SynthConfig: period must be >= 2");
        if (rho < 0.0 || kappa < 0.0 || rho + kappa >= 1.0) {
            throw ValidationError("SynthConfig: need rho, kappa >= 0 and rho + kappa < 1");
        }
    }
};

struct SynthResult {
    SeriesData series;
    RoadNetwork net;
};

/// Random geometric graph (forced connected) carrying a diffusion
/// autoregression with per-node sinusoidal forcing.
inline SynthResult synthesize_dataset(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const int n = cfg.nodes;

    std::vector<double> px(n), py(n);
    for (int i = 0; i < n; ++i) {
        px[i] = draw_uniform(rng, 0.0, cfg.box);
        py[i] = draw_uniform(rng, 0.0, cfg.box);
    }
    auto dist = [&](int i, int j) {
        const double dx = px[i] - px[j], dy = py[i] - py[j];
        return std::sqrt(dx * dx + dy * dy);
    };

    SynthResult out;
    for (int i = 0; i < n; ++i) out.net.node_ids.push_back("n" + std::to_string(i));
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (dist(i, j) <= cfg.radius) out.net.edges.push_back({i, j, dist(i, j)});
        }
    }

    // union-find; bridge closest cross-component pairs until connected
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const RoadEdge& e : out.net.edges) parent[find(e.from)] = find(e.to);
    while (true) {
        int bi = -1, bj = -1;
        double bd = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (find(i) == find(j)) continue;
                const double d = dist(i, j);
                if (bi < 0 || d < bd) {
                    bi = i;
                    bj = j;
                    bd = d;
                }
            }
        }
        if (bi < 0) break;
        out.net.edges.push_back({bi, bj, bd});
        parent[find(bi)] = find(bj);
    }

    DenseMatrix binary(n, n);
    for (const RoadEdge& e : out.net.edges) {
        binary(e.from, e.to) = 1.0;
        binary(e.to, e.from) = 1.0;
    }
    const DenseMatrix diffusion = normalize(binary);

    std::vector<double> phase(n), amp(n);
    for (int i = 0; i < n; ++i) {
        phase[i] = draw_uniform(rng, 0.0, 2.0 * 3.14159265358979323846);
        amp[i] = draw_uniform(rng, 0.5, 1.5);
    }

    SeriesData& s = out.series;
    s.node_ids = out.net.node_ids;
    s.nodes = n;
    s.steps = cfg.steps;
    s.features = 1;
    s.values.assign(static_cast<std::size_t>(cfg.steps) * n, 0.0);

    std::vector<double> dev(n), next(n);
    for (int i = 0; i < n; ++i) dev[i] = 3.0 * draw_normal(rng);
    const double omega = 2.0 * 3.14159265358979323846 / cfg.period;
    for (int t = 0; t < cfg.steps; ++t) {
        for (int i = 0; i < n; ++i) s.at(t, i, 0) = cfg.base + dev[i];
        for (int i = 0; i < n; ++i) {
            double mix = 0.0;
            for (int j = 0; j < n; ++j) mix += diffusion(i, j) * dev[j];
            next[i] = cfg.rho * dev[i] + cfg.kappa * mix +
                      cfg.gamma * amp[i] * std::sin(omega * (t + 1) + phase[i]) +
                      cfg.noise * draw_normal(rng);
        }
        std::swap(dev, next);
    }
    return out;
}

}  // namespace stgode

#endif  // STGODE_DATA_HPP
