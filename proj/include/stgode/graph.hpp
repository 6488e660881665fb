#ifndef STGODE_GRAPH_HPP
#define STGODE_GRAPH_HPP

// Spatial and semantic adjacency construction with symmetric normalization
// and the spectral regularization that bounds eigenvalues inside [0, alpha].

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stgode/common.hpp"
#include "stgode/dtw.hpp"
#include "stgode/tensor.hpp"

namespace stgode {

enum class AdjacencyKind { Spatial, Semantic };

inline const char* adjacency_kind_name(AdjacencyKind k) {
    return k == AdjacencyKind::Spatial ? "spatial" : "semantic";
}

struct RoadEdge {
    int from = 0;
    int to = 0;
    double distance = 0.0;
};

struct RoadNetwork {
    std::vector<std::string> node_ids;
    std::vector<RoadEdge> edges;

    int node_count() const { return static_cast<int>(node_ids.size()); }

    void validate() const {
        const int n = node_count();
        if (n == 0) throw ValidationError("RoadNetwork: no nodes");
        std::set<std::pair<int, int>> seen;
        for (const RoadEdge& e : edges) {
            if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
                throw ValidationError("RoadNetwork: edge endpoint out of range (" + std::to_string(e.from) +
                                      "," + std::to_string(e.to) + ")");
            }
            if (e.distance < 0.0) {
                throw ValidationError("RoadNetwork: negative edge distance on (" + std::to_string(e.from) +
                                      "," + std::to_string(e.to) + ")");
            }
            if (!seen.insert({e.from, e.to}).second) {
                throw ValidationError("RoadNetwork: duplicate edge (" + std::to_string(e.from) + "," +
                                      std::to_string(e.to) + ")");
            }
        }
    }
};

/// Â = (alpha/2)(I + D^{-1/2} A D^{-1/2}) with its eigendecomposition cached.
struct RegularizedAdjacency {
    DenseMatrix a_hat;
    double alpha = 0.8;
    AdjacencyKind kind = AdjacencyKind::Spatial;
    SymEig eig;

    int n() const { return a_hat.rows; }
};

// ---------------------------------------------------------------------------
// Spatial adjacency (Gaussian kernel on road distances)
// ---------------------------------------------------------------------------

/// Pairwise edge distances as a matrix; +inf where no edge exists.
/// Edges are treated as undirected; conflicting directions keep the minimum.
inline DenseMatrix distance_matrix(const RoadNetwork& net) {
    net.validate();
    const int n = net.node_count();
    const double inf = std::numeric_limits<double>::infinity();
    DenseMatrix d(n, n);
    std::fill(d.data.begin(), d.data.end(), inf);
    for (int i = 0; i < n; ++i) d(i, i) = 0.0;
    for (const RoadEdge& e : net.edges) {
        if (e.from == e.to) continue;
        d(e.from, e.to) = std::min(d(e.from, e.to), e.distance);
        d(e.to, e.from) = std::min(d(e.to, e.from), e.distance);
    }
    return d;
}

/// A_ij = exp(-d_ij^2 / sigma^2) kept only when >= epsilon; zero diagonal.
/// sigma_is_squared reads the parameter as sigma^2 directly.
inline DenseMatrix spatial_adjacency(const RoadNetwork& net, double sigma, double epsilon,
                                     bool sigma_is_squared = false) {
    if (sigma <= 0.0) throw ValidationError("spatial_adjacency: sigma must be positive");
    if (epsilon < 0.0 || epsilon > 1.0) throw ValidationError("spatial_adjacency: epsilon must be in [0,1]");
    const double sig2 = sigma_is_squared ? sigma : sigma * sigma;
    const DenseMatrix d = distance_matrix(net);
    const int n = d.rows;
    DenseMatrix a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (!std::isfinite(d(i, j))) continue;
            const double w = std::exp(-d(i, j) * d(i, j) / sig2);
            if (w >= epsilon) {
                a(i, j) = w;
                a(j, i) = w;
            }
        }
    }
    return a;
}

// ---------------------------------------------------------------------------
// Normalization and regularization
// ---------------------------------------------------------------------------

/// D^{-1/2} A D^{-1/2}; rows of zero-degree nodes stay all-zero.
inline DenseMatrix normalize(const DenseMatrix& a) {
    if (!a.square()) throw ValidationError("normalize: matrix is not square");
    const int n = a.rows;
    std::vector<double> dinv(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double deg = 0.0;
        for (int j = 0; j < n; ++j) {
            const double v = a(i, j);
            if (v < 0.0) throw ValidationError("normalize: negative entry at (" + std::to_string(i) + "," +
                                               std::to_string(j) + ")");
            deg += v;
        }
        dinv[i] = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
    }
    DenseMatrix out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = dinv[i] * a(i, j) * dinv[j];
    return out;
}

/// Â = (alpha/2)(I + Ã). The cached eigendecomposition reuses Ã's
/// eigenvectors since the map lambda -> (alpha/2)(1 + lambda) is monotone.
inline RegularizedAdjacency regularize(const DenseMatrix& a_tilde, double alpha,
                                       AdjacencyKind kind = AdjacencyKind::Spatial) {
    if (alpha <= 0.0 || alpha >= 1.0) throw ValidationError("regularize: alpha must lie in (0,1)");
    SymEig base = sym_eig(a_tilde);
    const int n = a_tilde.rows;
    for (double lam : base.values) {
        if (std::abs(lam) > 1.0 + 1e-8) {
            throw ValidationError("regularize: input spectral radius " + std::to_string(std::abs(lam)) +
                                  " exceeds 1");
        }
    }

    RegularizedAdjacency out;
    out.alpha = alpha;
    out.kind = kind;
    out.a_hat = DenseMatrix(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) out.a_hat(i, j) = (alpha / 2.0) * ((i == j ? 1.0 : 0.0) + a_tilde(i, j));
    }
    out.eig.vectors = base.vectors;
    out.eig.values.resize(n);
    for (int i = 0; i < n; ++i) out.eig.values[i] = (alpha / 2.0) * (1.0 + base.values[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Semantic adjacency (DTW over z-scored series)
// ---------------------------------------------------------------------------

/// Per-node z-score; constant series keep std 1 so they map to all zeros.
inline std::vector<double> z_score(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n == 0) throw ValidationError("z_score: empty series");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double sd = var > 1e-24 ? std::sqrt(var) : 1.0;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (x[i] - mean) / sd;
    return out;
}

namespace detail {

inline std::vector<std::vector<double>> z_scored_all(const std::vector<std::vector<double>>& series) {
    if (series.size() < 2) throw ValidationError("semantic adjacency needs at least 2 node series");
    const std::size_t len = series[0].size();
    if (len < 2) throw ValidationError("semantic adjacency needs series of length >= 2");
    std::vector<std::vector<double>> z;
    z.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series[i].size() != len) {
            throw ValidationError("semantic adjacency: node " + std::to_string(i) +
                                  " series length differs from node 0");
        }
        z.push_back(z_score(series[i]));
    }
    return z;
}

// DTW distance per alignment step for every unordered node pair
inline DenseMatrix pairwise_dtw(const std::vector<std::vector<double>>& z, int band) {
    const int n = static_cast<int>(z.size());
    DenseMatrix d(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const DtwResult r = dtw_align(z[i], z[j], band);
            const double nd = r.distance / static_cast<double>(r.path_length);
            d(i, j) = nd;
            d(j, i) = nd;
        }
    }
    return d;
}

}  // namespace detail

/// Binary symmetric matrix: 1 where the path-length-normalized DTW distance
/// between z-scored series falls below epsilon; zero diagonal.
inline DenseMatrix semantic_adjacency(const std::vector<std::vector<double>>& series, double epsilon,
                                      int band = -1) {
    if (epsilon <= 0.0) throw ValidationError("semantic_adjacency: epsilon must be positive");
    const auto z = detail::z_scored_all(series);
    const DenseMatrix d = detail::pairwise_dtw(z, band);
    const int n = d.rows;
    DenseMatrix a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j && d(i, j) < epsilon) a(i, j) = 1.0;
        }
    }
    return a;
}

/// Alternative sparsifier: connect each node to its k nearest neighbors by
/// normalized DTW distance, then symmetrize by union.
inline DenseMatrix semantic_adjacency_topk(const std::vector<std::vector<double>>& series, int k,
                                           int band = -1) {
    if (k < 1) throw ValidationError("semantic_adjacency_topk: k must be >= 1");
    const auto z = detail::z_scored_all(series);
    const DenseMatrix d = detail::pairwise_dtw(z, band);
    const int n = d.rows;
    DenseMatrix a(n, n);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return d(i, x) < d(i, y); });
        int taken = 0;
        for (int idx : order) {
            if (idx == i) continue;
            a(i, idx) = 1.0;
            a(idx, i) = 1.0;
            if (++taken >= k) break;
        }
    }
    return a;
}

/// normalize + regularize in one step, the form every solver input takes.
inline RegularizedAdjacency build_regularized(const DenseMatrix& raw, double alpha, AdjacencyKind kind) {
    return regularize(normalize(raw), alpha, kind);
}

/// Wraps an arbitrary symmetric matrix with its eigendecomposition, skipping
/// the normalize/regularize construction path; used by loaders and fixtures.
inline RegularizedAdjacency adjacency_from_matrix(const DenseMatrix& m, double alpha, AdjacencyKind kind) {
    RegularizedAdjacency r;
    r.a_hat = m;
    r.alpha = alpha;
    r.kind = kind;
    r.eig = sym_eig(m);
    return r;
}

}  // namespace stgode

#endif  // STGODE_GRAPH_HPP
