#ifndef STGODE_ODE_HPP
#define STGODE_ODE_HPP

// Tensor ODE dynamics: discrete residual recursion, its expansion, the
// continuous dynamics with Euler integration, the closed-form solution in
// the joint eigenbasis, and the clamped factored parameterization of the
// temporal/feature transforms.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "stgode/common.hpp"
#include "stgode/graph.hpp"
#include "stgode/tensor.hpp"

namespace stgode {

// ---------------------------------------------------------------------------
// Parameter containers
// ---------------------------------------------------------------------------

/// Symmetric transform stored as basis * diag(eigvals) * basis^T.
/// Training keeps every eigenvalue inside [1e-3, 1 - 1e-3] via reproject;
/// test fixtures may hold eigenvalue 1 to represent an identity transform.
struct FactoredTransform {
    DenseMatrix basis;
    std::vector<double> eigvals;

    int n() const { return basis.rows; }

    static FactoredTransform identity_fixture(int n) {
        FactoredTransform ft;
        ft.basis = DenseMatrix::identity(n);
        ft.eigvals.assign(n, 1.0);
        return ft;
    }

    /// Random orthogonal basis with eigenvalues drawn uniformly from [lo, hi].
    static FactoredTransform random(int n, std::uint64_t seed, double lo = 0.3, double hi = 0.9) {
        FactoredTransform ft;
        ft.basis = random_orthogonal(n, seed);
        Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
        ft.eigvals.resize(n);
        for (double& v : ft.eigvals) v = draw_uniform(rng, lo, hi);
        return ft;
    }

    DenseMatrix matrix() const {
        DenseMatrix m = basis;
        for (int r = 0; r < m.rows; ++r)
            for (int c = 0; c < m.cols; ++c) m(r, c) *= eigvals[c];
        return matmul(m, transpose(basis));
    }

    /// basis * diag(ln eigvals) * basis^T; verification oracle only.
    DenseMatrix log_matrix() const {
        DenseMatrix m = basis;
        for (int c = 0; c < m.cols; ++c) {
            if (eigvals[c] <= 1e-8) {
                throw ValidationError("FactoredTransform::log_matrix: eigenvalue " +
                                      std::to_string(eigvals[c]) + " too small for a logarithm");
            }
        }
        for (int r = 0; r < m.rows; ++r)
            for (int c = 0; c < m.cols; ++c) m(r, c) *= std::log(eigvals[c]);
        return matmul(m, transpose(basis));
    }
};

inline constexpr double kEigClampLo = 1e-3;
inline constexpr double kEigClampHi = 1.0 - 1e-3;

/// Restores the FactoredTransform invariants after a gradient step:
/// re-orthogonalizes the basis and clamps the eigenvalues.
inline FactoredTransform reproject(FactoredTransform ft) {
    orthonormalize_columns(ft.basis);
    for (double& v : ft.eigvals) v = std::min(kEigClampHi, std::max(kEigClampLo, v));
    return ft;
}

/// Everything the dynamics needs: graph transform, temporal transform (T x T),
/// feature transform (F x F), and the restart state h0 (N x T x F).
struct OdeParams {
    RegularizedAdjacency a_hat;
    FactoredTransform u;
    FactoredTransform w;
    Tensor3 h0;

    void validate() const {
        if (a_hat.n() != h0.n1) throw ShapeError("OdeParams: adjacency size does not match node count");
        if (u.n() != h0.n2) throw ShapeError("OdeParams: temporal transform size does not match time length");
        if (w.n() != h0.n3) throw ShapeError("OdeParams: feature transform size does not match feature width");
    }
};

struct SolverConfig {
    double t_end = 1.0;
    int steps = 6;

    void validate() const {
        if (t_end <= 0.0) throw ValidationError("SolverConfig: t_end must be positive");
        if (steps < 1) throw ValidationError("SolverConfig: steps must be >= 1");
    }
};

// ---------------------------------------------------------------------------
// Dynamics
// ---------------------------------------------------------------------------

namespace detail {

inline DenseMatrix minus_identity(DenseMatrix m) {
    for (int i = 0; i < m.rows; ++i) m(i, i) -= 1.0;
    return m;
}

}  // namespace detail

/// dh/dt with the first-order log approximation:
/// h x1 (A-I) + h x2 (U-I) + h x3 (W-I) + h0.
inline Tensor3 dynamics_taylor(const Tensor3& h, const OdeParams& p) {
    if (!h.same_dims(p.h0)) throw ShapeError("dynamics_taylor: state dims do not match h0");
    Tensor3 out = mode_product(h, detail::minus_identity(p.a_hat.a_hat), 1);
    out = add(out, mode_product(h, detail::minus_identity(p.u.matrix()), 2));
    out = add(out, mode_product(h, detail::minus_identity(p.w.matrix()), 3));
    return add(out, p.h0);
}

/// dh/dt with true matrix logarithms; requires strictly positive spectra,
/// so this is a verification oracle rather than a training path.
inline Tensor3 dynamics_exact_log(const Tensor3& h, const OdeParams& p) {
    if (!h.same_dims(p.h0)) throw ShapeError("dynamics_exact_log: state dims do not match h0");
    Tensor3 out = mode_product(h, logm(p.a_hat.eig), 1);
    out = add(out, mode_product(h, p.u.log_matrix(), 2));
    out = add(out, mode_product(h, p.w.log_matrix(), 3));
    return add(out, p.h0);
}

enum class DynamicsKind { Taylor, ExactLog };

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

/// Explicit Euler from h(0) = h0: h_{k+1} = h_k + dt * f(h_k).
template <typename F>
inline Tensor3 euler_solve_with(const OdeParams& p, const SolverConfig& cfg, F&& dynamics) {
    cfg.validate();
    p.validate();
    const double dt = cfg.t_end / cfg.steps;
    Tensor3 h = p.h0;
    for (int k = 0; k < cfg.steps; ++k) h = add_scaled(h, dynamics(h, p), dt);
    return h;
}

inline Tensor3 euler_solve(const OdeParams& p, const SolverConfig& cfg,
                           DynamicsKind kind = DynamicsKind::Taylor) {
    if (kind == DynamicsKind::Taylor) return euler_solve_with(p, cfg, dynamics_taylor);
    return euler_solve_with(p, cfg, dynamics_exact_log);
}

/// Classic fourth-order Runge-Kutta; flag-gated extra for convergence studies.
template <typename F>
inline Tensor3 rk4_solve_with(const OdeParams& p, const SolverConfig& cfg, F&& dynamics) {
    cfg.validate();
    p.validate();
    const double dt = cfg.t_end / cfg.steps;
    Tensor3 h = p.h0;
    for (int k = 0; k < cfg.steps; ++k) {
        const Tensor3 k1 = dynamics(h, p);
        const Tensor3 k2 = dynamics(add_scaled(h, k1, dt / 2.0), p);
        const Tensor3 k3 = dynamics(add_scaled(h, k2, dt / 2.0), p);
        const Tensor3 k4 = dynamics(add_scaled(h, k3, dt), p);
        Tensor3 incr = add(k1, k4);
        incr = add_scaled(incr, add(k2, k3), 2.0);
        h = add_scaled(h, incr, dt / 6.0);
    }
    return h;
}

// ---------------------------------------------------------------------------
// Closed-form solution
// ---------------------------------------------------------------------------

/// Exact solution of the Taylor-form dynamics at time t, evaluated in the
/// joint eigenbasis of (A-I, U-I, W-I):
///   h(t) = h0 x1 e^{(A-I)t} x2 e^{(U-I)t} x3 e^{(W-I)t}  +  integral term,
/// where the integral contributes, per eigen-coordinate with generator sum s,
/// the factor (e^{st} - 1)/s (limit t as s -> 0). from_zero_state drops the
/// exponential term, modeling h(0) = 0 instead of h(0) = h0.
inline Tensor3 analytic_solution(const OdeParams& p, double t, bool from_zero_state = false) {
    if (t < 0.0) throw ValidationError("analytic_solution: t must be >= 0");
    p.validate();
    if (t == 0.0) return from_zero_state ? Tensor3(p.h0.n1, p.h0.n2, p.h0.n3) : p.h0;

    const DenseMatrix& p1 = p.a_hat.eig.vectors;
    const DenseMatrix& p2 = p.u.basis;
    const DenseMatrix& p3 = p.w.basis;

    // eigen-coordinates of h0
    Tensor3 coords = mode_product(mode_product(mode_product(p.h0, p1, 1), p2, 2), p3, 3);

    const int n1 = coords.n1, n2 = coords.n2, n3 = coords.n3;
    Tensor3 mixed(n1, n2, n3);
    for (int i = 0; i < n1; ++i) {
        const double li = p.a_hat.eig.values[i] - 1.0;
        for (int j = 0; j < n2; ++j) {
            const double lj = p.u.eigvals[j] - 1.0;
            for (int k = 0; k < n3; ++k) {
                const double s = li + lj + (p.w.eigvals[k] - 1.0);
                const double est = std::exp(s * t);
                const double integral = std::abs(s) < 1e-8 ? t : (est - 1.0) / s;
                mixed(i, j, k) = coords(i, j, k) * ((from_zero_state ? 0.0 : est) + integral);
            }
        }
    }
    return mode_product(mode_product(mode_product(mixed, transpose(p1), 1), transpose(p2), 2),
                        transpose(p3), 3);
}

// ---------------------------------------------------------------------------
// Discrete forms
// ---------------------------------------------------------------------------

/// l applications of h <- h x1 A x2 U x3 W + h0, starting from h0.
inline Tensor3 discrete_recursion(const OdeParams& p, int l) {
    if (l < 0) throw ValidationError("discrete_recursion: l must be >= 0");
    p.validate();
    const DenseMatrix a = p.a_hat.a_hat;
    const DenseMatrix u = p.u.matrix();
    const DenseMatrix w = p.w.matrix();
    Tensor3 h = p.h0;
    for (int step = 0; step < l; ++step) {
        h = mode_product(mode_product(mode_product(h, a, 1), u, 2), w, 3);
        h = add(h, p.h0);
    }
    return h;
}

/// Equivalent summation sum_{i=0..l} h0 x1 A^i x2 U^i x3 W^i, built from
/// explicit matrix powers.
inline Tensor3 discrete_expansion(const OdeParams& p, int l) {
    if (l < 0) throw ValidationError("discrete_expansion: l must be >= 0");
    p.validate();
    const DenseMatrix a = p.a_hat.a_hat;
    const DenseMatrix u = p.u.matrix();
    const DenseMatrix w = p.w.matrix();
    DenseMatrix ai = DenseMatrix::identity(a.rows);
    DenseMatrix ui = DenseMatrix::identity(u.rows);
    DenseMatrix wi = DenseMatrix::identity(w.rows);
    Tensor3 acc = p.h0;
    for (int i = 1; i <= l; ++i) {
        ai = matmul(ai, a);
        ui = matmul(ui, u);
        wi = matmul(wi, w);
        acc = add(acc, mode_product(mode_product(mode_product(p.h0, ai, 1), ui, 2), wi, 3));
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Over-smoothing demonstrator
// ---------------------------------------------------------------------------

/// A^n in the eigenbasis plus the collapse ratio |lambda2 / lambda1|^n
/// (0 when lambda1 = 0 or the matrix is 1x1). The ratio measures how far
/// the power is from rank-1.
inline std::pair<DenseMatrix, double> power_collapse_demo(const RegularizedAdjacency& a_hat, int n) {
    if (n < 1) throw ValidationError("power_collapse_demo: n must be >= 1");
    const DenseMatrix an = powm(a_hat.eig, static_cast<double>(n));
    double ratio = 0.0;
    if (a_hat.n() >= 2) {
        double l1 = 0.0, l2 = 0.0;
        for (double v : a_hat.eig.values) {
            const double m = std::abs(v);
            if (m > l1) {
                l2 = l1;
                l1 = m;
            } else if (m > l2) {
                l2 = m;
            }
        }
        if (l1 > 0.0) ratio = std::pow(l2 / l1, static_cast<double>(n));
    }
    return {an, ratio};
}

/// Variance across entries of a vector; the collapse diagnostic.
inline double node_variance(const std::vector<double>& x) {
    if (x.empty()) throw ValidationError("node_variance: empty vector");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    return var / static_cast<double>(x.size());
}

}  // namespace stgode

#endif  // STGODE_ODE_HPP
