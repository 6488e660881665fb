#ifndef STGODE_TENSOR_HPP
#define STGODE_TENSOR_HPP

// Dense rank-3 tensor and small dense matrix kernel: mode-n products,
// symmetric eigendecomposition, matrix exponentials, orthogonal matrices.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>
#include <vector>

#include "stgode/common.hpp"

namespace stgode {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Dense rank-3 array in row-major order, axes (n1, n2, n3).
/// Axis convention throughout the library: 1 = nodes, 2 = time, 3 = features.
struct Tensor3 {
    int n1 = 0, n2 = 0, n3 = 0;
    std::vector<double> data;

    Tensor3() = default;
    Tensor3(int a, int b, int c) : n1(a), n2(b), n3(c), data(static_cast<std::size_t>(a) * b * c, 0.0) {
        if (a <= 0 || b <= 0 || c <= 0) throw ValidationError("Tensor3: dimensions must be positive");
    }
    static Tensor3 from_data(int a, int b, int c, std::vector<double> d) {
        Tensor3 t(a, b, c);
        if (d.size() != t.data.size()) throw ShapeError("Tensor3::from_data: data length does not match dims");
        t.data = std::move(d);
        return t;
    }

    std::size_t size() const { return data.size(); }
    int dim(int mode) const {
        switch (mode) {
            case 1: return n1;
            case 2: return n2;
            case 3: return n3;
            default: throw ValidationError("Tensor3::dim: mode must be 1, 2 or 3");
        }
    }
    double& operator()(int i, int j, int k) { return data[(static_cast<std::size_t>(i) * n2 + j) * n3 + k]; }
    double operator()(int i, int j, int k) const { return data[(static_cast<std::size_t>(i) * n2 + j) * n3 + k]; }

    bool same_dims(const Tensor3& o) const { return n1 == o.n1 && n2 == o.n2 && n3 == o.n3; }
};

/// Dense row-major matrix.
struct DenseMatrix {
    int rows = 0, cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {
        if (r <= 0 || c <= 0) throw ValidationError("DenseMatrix: dimensions must be positive");
    }
    static DenseMatrix from_data(int r, int c, std::vector<double> d) {
        DenseMatrix m(r, c);
        if (d.size() != m.data.size()) throw ShapeError("DenseMatrix::from_data: data length does not match dims");
        m.data = std::move(d);
        return m;
    }
    static DenseMatrix identity(int n) {
        DenseMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    bool square() const { return rows == cols; }
};

/// Eigendecomposition of a symmetric matrix: columns of `vectors` are
/// orthonormal eigenvectors, `values` sorted descending.
struct SymEig {
    DenseMatrix vectors;
    std::vector<double> values;

    int n() const { return vectors.rows; }
};

// ---------------------------------------------------------------------------
// Raw kernels (shared by the value-level API below and by the autograd tape)
// ---------------------------------------------------------------------------

namespace detail {

// C(ra x cb) = A(ra x ca) * B(ca x cb), accumulating into zeroed C.
inline void matmul_kernel(const double* a, int ra, int ca, const double* b, int cb, double* c) {
    std::memset(c, 0, sizeof(double) * static_cast<std::size_t>(ra) * cb);
    for (int i = 0; i < ra; ++i) {
        const double* arow = a + static_cast<std::size_t>(i) * ca;
        double* crow = c + static_cast<std::size_t>(i) * cb;
        for (int k = 0; k < ca; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b + static_cast<std::size_t>(k) * cb;
            for (int j = 0; j < cb; ++j) crow[j] += aik * brow[j];
        }
    }
}

// out = t x_mode m.   t dims (n1,n2,n3); m is (t.dim(mode) x mc) when
// contract_rows, else (mc x t.dim(mode)) contracted against its columns
// (i.e. multiplication by m transposed) so gradients reuse one kernel.
inline void mode_product_kernel(const double* t, int n1, int n2, int n3, const double* m, int mc, int mode,
                                bool contract_rows, double* out) {
    auto mat = [&](int contracted, int l) -> double {
        return contract_rows ? m[static_cast<std::size_t>(contracted) * mc + l]
                             : m[static_cast<std::size_t>(l) * (mode == 1 ? n1 : mode == 2 ? n2 : n3) + contracted];
    };
    if (mode == 1) {
        const std::size_t plane = static_cast<std::size_t>(n2) * n3;
        std::memset(out, 0, sizeof(double) * plane * mc);
        for (int i = 0; i < n1; ++i) {
            const double* src = t + i * plane;
            for (int l = 0; l < mc; ++l) {
                const double w = mat(i, l);
                if (w == 0.0) continue;
                double* dst = out + l * plane;
                for (std::size_t p = 0; p < plane; ++p) dst[p] += w * src[p];
            }
        }
    } else if (mode == 2) {
        std::memset(out, 0, sizeof(double) * static_cast<std::size_t>(n1) * mc * n3);
        for (int i = 0; i < n1; ++i) {
            const double* slab = t + static_cast<std::size_t>(i) * n2 * n3;
            double* oslab = out + static_cast<std::size_t>(i) * mc * n3;
            for (int j = 0; j < n2; ++j) {
                const double* src = slab + static_cast<std::size_t>(j) * n3;
                for (int l = 0; l < mc; ++l) {
                    const double w = mat(j, l);
                    if (w == 0.0) continue;
                    double* dst = oslab + static_cast<std::size_t>(l) * n3;
                    for (int k = 0; k < n3; ++k) dst[k] += w * src[k];
                }
            }
        }
    } else {
        const std::size_t nrows = static_cast<std::size_t>(n1) * n2;
        std::memset(out, 0, sizeof(double) * nrows * mc);
        for (std::size_t r = 0; r < nrows; ++r) {
            const double* src = t + r * n3;
            double* dst = out + r * mc;
            for (int k = 0; k < n3; ++k) {
                const double v = src[k];
                if (v == 0.0) continue;
                for (int l = 0; l < mc; ++l) dst[l] += v * mat(k, l);
            }
        }
    }
}

// dM for out = t x_mode M: dm[c, l] += sum over free indices of t * g,
// where g has dims of the product output (mode axis length mc).
inline void mode_product_matrix_grad_kernel(const double* t, int n1, int n2, int n3, const double* g, int mc,
                                            int mode, double* dm) {
    if (mode == 1) {
        const std::size_t plane = static_cast<std::size_t>(n2) * n3;
        for (int i = 0; i < n1; ++i) {
            const double* trow = t + i * plane;
            double* dmrow = dm + static_cast<std::size_t>(i) * mc;
            for (int l = 0; l < mc; ++l) {
                const double* grow = g + l * plane;
                double acc = 0.0;
                for (std::size_t p = 0; p < plane; ++p) acc += trow[p] * grow[p];
                dmrow[l] += acc;
            }
        }
    } else if (mode == 2) {
        for (int i = 0; i < n1; ++i) {
            const double* slab = t + static_cast<std::size_t>(i) * n2 * n3;
            const double* gslab = g + static_cast<std::size_t>(i) * mc * n3;
            for (int j = 0; j < n2; ++j) {
                const double* trow = slab + static_cast<std::size_t>(j) * n3;
                double* dmrow = dm + static_cast<std::size_t>(j) * mc;
                for (int l = 0; l < mc; ++l) {
                    const double* grow = gslab + static_cast<std::size_t>(l) * n3;
                    double acc = 0.0;
                    for (int k = 0; k < n3; ++k) acc += trow[k] * grow[k];
                    dmrow[l] += acc;
                }
            }
        }
    } else {
        const std::size_t nrows = static_cast<std::size_t>(n1) * n2;
        for (std::size_t r = 0; r < nrows; ++r) {
            const double* trow = t + r * n3;
            const double* grow = g + r * mc;
            for (int k = 0; k < n3; ++k) {
                const double v = trow[k];
                if (v == 0.0) continue;
                double* dmrow = dm + static_cast<std::size_t>(k) * mc;
                for (int l = 0; l < mc; ++l) dmrow[l] += v * grow[l];
            }
        }
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Matrix algebra
// ---------------------------------------------------------------------------

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows) {
        throw ShapeError("matmul: inner dimensions differ (" + std::to_string(a.cols) + " vs " +
                         std::to_string(b.rows) + ")");
    }
    DenseMatrix c(a.rows, b.cols);
    detail::matmul_kernel(a.data.data(), a.rows, a.cols, b.data.data(), b.cols, c.data.data());
    return c;
}

inline DenseMatrix transpose(const DenseMatrix& m) {
    DenseMatrix t(m.cols, m.rows);
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) t(c, r) = m(r, c);
    return t;
}

inline double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw ShapeError("max_abs_diff: matrix dims differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

inline double max_abs_diff(const Tensor3& a, const Tensor3& b) {
    if (!a.same_dims(b)) throw ShapeError("max_abs_diff: tensor dims differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

inline double max_abs(const Tensor3& a) {
    double m = 0.0;
    for (double v : a.data) m = std::max(m, std::abs(v));
    return m;
}

// ---------------------------------------------------------------------------
// Mode-n product
// ---------------------------------------------------------------------------

/// Tensor-matrix multiplication on the given mode: the tensor's mode-th axis
/// is contracted against the rows of m, e.g. (t x2 m)_{ilk} = sum_j t_{ijk} m_{jl}.
inline Tensor3 mode_product(const Tensor3& t, const DenseMatrix& m, int mode) {
    if (mode < 1 || mode > 3) throw ValidationError("mode_product: mode must be 1, 2 or 3");
    if (m.rows != t.dim(mode)) {
        throw ShapeError("mode_product: matrix rows (" + std::to_string(m.rows) + ") do not match tensor mode-" +
                         std::to_string(mode) + " length (" + std::to_string(t.dim(mode)) + ")");
    }
    int d1 = t.n1, d2 = t.n2, d3 = t.n3;
    (mode == 1 ? d1 : mode == 2 ? d2 : d3) = m.cols;
    Tensor3 out(d1, d2, d3);
    detail::mode_product_kernel(t.data.data(), t.n1, t.n2, t.n3, m.data.data(), m.cols, mode, true,
                                out.data.data());
    return out;
}

// ---------------------------------------------------------------------------
// Elementwise tensor helpers
// ---------------------------------------------------------------------------

inline Tensor3 add(const Tensor3& a, const Tensor3& b) {
    if (!a.same_dims(b)) throw ShapeError("add: tensor dims differ");
    Tensor3 c = a;
    for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] += b.data[i];
    return c;
}

inline Tensor3 scale(const Tensor3& a, double s) {
    Tensor3 c = a;
    for (double& v : c.data) v *= s;
    return c;
}

/// a + s*b
inline Tensor3 add_scaled(const Tensor3& a, const Tensor3& b, double s) {
    if (!a.same_dims(b)) throw ShapeError("add_scaled: tensor dims differ");
    Tensor3 c = a;
    for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] += s * b.data[i];
    return c;
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition (cyclic Jacobi)
// ---------------------------------------------------------------------------

/// Eigendecomposition of a symmetric matrix via cyclic Jacobi rotations.
/// Converges when the off-diagonal Frobenius norm falls below
/// 1e-12 * max(1, ||m||_F); at most 100 sweeps. Eigenvalues descending.
inline SymEig sym_eig(const DenseMatrix& m) {
    if (!m.square()) throw ValidationError("sym_eig: matrix is not square");
    const int n = m.rows;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (std::abs(m(i, j) - m(j, i)) > 1e-10) {
                throw ValidationError("sym_eig: matrix is not symmetric at (" + std::to_string(i) + "," +
                                      std::to_string(j) + ")");
            }
        }
    }

    DenseMatrix a = m;
    DenseMatrix v = DenseMatrix::identity(n);
    double frob = 0.0;
    for (double x : m.data) frob += x * x;
    const double tol = 1e-12 * std::max(1.0, std::sqrt(frob));

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
        if (std::sqrt(off) <= tol) break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double sign = theta >= 0.0 ? 1.0 : -1.0;
                const double t = sign / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) > a(y, y); });

    SymEig out;
    out.vectors = DenseMatrix(n, n);
    out.values.resize(n);
    for (int c = 0; c < n; ++c) {
        const int src = order[c];
        out.values[c] = a(src, src);
        // sign convention: largest-magnitude component positive
        int imax = 0;
        for (int r = 1; r < n; ++r)
            if (std::abs(v(r, src)) > std::abs(v(imax, src))) imax = r;
        const double flip = v(imax, src) < 0.0 ? -1.0 : 1.0;
        for (int r = 0; r < n; ++r) out.vectors(r, c) = flip * v(r, src);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Matrix functions in an eigenbasis
// ---------------------------------------------------------------------------

/// Applies f to the eigenvalues and reassembles P diag(f(lambda)) P^T.
template <typename F>
inline DenseMatrix apply_spectral(const SymEig& e, F&& f) {
    const int n = e.n();
    DenseMatrix scaled(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) scaled(r, c) = e.vectors(r, c) * f(e.values[c]);
    }
    return matmul(scaled, transpose(e.vectors));
}

/// e^{M t} from the eigendecomposition of M; t = 0 yields the identity.
inline DenseMatrix expm_scaled(const SymEig& e, double t) {
    if (t == 0.0) return DenseMatrix::identity(e.n());
    return apply_spectral(e, [t](double lam) { return std::exp(lam * t); });
}

/// Matrix power M^p in the eigenbasis (p >= 0).
inline DenseMatrix powm(const SymEig& e, double p) {
    return apply_spectral(e, [p](double lam) { return std::pow(lam, p); });
}

/// ln(M) in the eigenbasis. All eigenvalues must exceed min_eig.
inline DenseMatrix logm(const SymEig& e, double min_eig = 1e-8) {
    for (double lam : e.values) {
        if (lam <= min_eig) {
            throw ValidationError("logm: eigenvalue " + std::to_string(lam) +
                                  " is too close to zero for a matrix logarithm");
        }
    }
    return apply_spectral(e, [](double lam) { return std::log(lam); });
}

// ---------------------------------------------------------------------------
// Random orthogonal matrices
// ---------------------------------------------------------------------------

/// Orthogonalizes the columns of m in place (modified Gram-Schmidt, two
/// passes) keeping a positive projection on the original direction.
inline void orthonormalize_columns(DenseMatrix& m) {
    const int n = m.rows;
    const int k = m.cols;
    for (int c = 0; c < k; ++c) {
        for (int pass = 0; pass < 2; ++pass) {
            for (int p = 0; p < c; ++p) {
                double dot = 0.0;
                for (int r = 0; r < n; ++r) dot += m(r, p) * m(r, c);
                for (int r = 0; r < n; ++r) m(r, c) -= dot * m(r, p);
            }
        }
        double norm = 0.0;
        for (int r = 0; r < n; ++r) norm += m(r, c) * m(r, c);
        norm = std::sqrt(norm);
        if (norm < 1e-300) {
            // degenerate column: fall back to a unit vector orthogonal by construction
            for (int r = 0; r < n; ++r) m(r, c) = (r == c % n) ? 1.0 : 0.0;
            for (int p = 0; p < c; ++p) {
                double dot = 0.0;
                for (int r = 0; r < n; ++r) dot += m(r, p) * m(r, c);
                for (int r = 0; r < n; ++r) m(r, c) -= dot * m(r, p);
            }
            norm = 0.0;
            for (int r = 0; r < n; ++r) norm += m(r, c) * m(r, c);
            norm = std::sqrt(norm);
        }
        for (int r = 0; r < n; ++r) m(r, c) /= norm;
    }
}

/// Deterministic random orthogonal matrix: QR of a seeded standard-normal
/// matrix with the R diagonal kept positive.
inline DenseMatrix random_orthogonal(int n, std::uint64_t seed) {
    if (n < 1) throw ValidationError("random_orthogonal: n must be >= 1");
    Rng rng(seed);
    DenseMatrix q(n, n);
    for (double& v : q.data) v = draw_normal(rng);
    orthonormalize_columns(q);
    return q;
}

}  // namespace stgode

#endif  // STGODE_TENSOR_HPP
