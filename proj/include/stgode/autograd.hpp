#ifndef STGODE_AUTOGRAD_HPP
#define STGODE_AUTOGRAD_HPP

// Reverse-mode tape over flat double arrays. Values live in one arena,
// gradients in a parallel arena; nodes are POD records replayed backwards
// through a switch. reset() keeps capacity so per-sample tapes do not churn
// the allocator.

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "stgode/common.hpp"
#include "stgode/tcn.hpp"
#include "stgode/tensor.hpp"

namespace stgode {

namespace detail {

// C += A * B           (A: m x k, B: k x n)
inline void acc_nn(const double* a, int m, int k, const double* b, int n, double* c) {
    for (int i = 0; i < m; ++i) {
        const double* arow = a + static_cast<std::size_t>(i) * k;
        double* crow = c + static_cast<std::size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            const double v = arow[p];
            if (v == 0.0) continue;
            const double* brow = b + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) crow[j] += v * brow[j];
        }
    }
}

// C += A * B^T         (A: m x k, B: n x k)
inline void acc_nt(const double* a, int m, int k, const double* b, int n, double* c) {
    for (int i = 0; i < m; ++i) {
        const double* arow = a + static_cast<std::size_t>(i) * k;
        double* crow = c + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double* brow = b + static_cast<std::size_t>(j) * k;
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] += acc;
        }
    }
}

// C += A^T * B         (A: k x m, B: k x n)
inline void acc_tn(const double* a, int k, int m, const double* b, int n, double* c) {
    for (int p = 0; p < k; ++p) {
        const double* arow = a + static_cast<std::size_t>(p) * m;
        const double* brow = b + static_cast<std::size_t>(p) * n;
        for (int i = 0; i < m; ++i) {
            const double v = arow[i];
            if (v == 0.0) continue;
            double* crow = c + static_cast<std::size_t>(i) * n;
            for (int j = 0; j < n; ++j) crow[j] += v * brow[j];
        }
    }
}

}  // namespace detail

class Tape {
    enum class Op {
        Leaf,
        Add,
        AddScaled,
        Scale,
        Tanh,
        ModeProduct,
        Matmul,
        MatmulNT,
        ColScale,
        AddDiag,
        AddRowVec,
        Conv1d,
        MaxPair,
        Reshape,
        HuberMean,
    };

    struct Node {
        Op op;
        int a = -1, b = -1, c = -1;  // input ids
        int d0 = 1, d1 = 1, d2 = 1;  // value dims (unused trail as 1)
        std::size_t off = 0;
        double s = 0.0;  // scalar payload: step size, delta, diagonal shift
        int i0 = 0;      // int payload: mode index or dilation
    };

public:
    int size() const { return static_cast<int>(nodes_.size()); }

    void reset() {
        nodes_.clear();
        val_.clear();
        grad_.clear();
    }

    const double* value(int id) const { return val_.data() + nodes_[id].off; }
    const double* gradient(int id) const { return grad_.data() + nodes_[id].off; }
    std::size_t value_size(int id) const { return node_size(nodes_[id]); }
    int dim0(int id) const { return nodes_[id].d0; }
    int dim1(int id) const { return nodes_[id].d1; }
    int dim2(int id) const { return nodes_[id].d2; }

    Tensor3 value_tensor(int id) const {
        const Node& n = nodes_[id];
        Tensor3 t(n.d0, n.d1, n.d2);
        std::memcpy(t.data.data(), val_.data() + n.off, sizeof(double) * t.size());
        return t;
    }

    // ---- graph construction -------------------------------------------------

    int leaf(const double* src, int d0, int d1 = 1, int d2 = 1) {
        Node n = make(Op::Leaf, d0, d1, d2);
        std::memcpy(val_.data() + n.off, src, sizeof(double) * node_size(n));
        return push(n);
    }

    int leaf(const Tensor3& t) { return leaf(t.data.data(), t.n1, t.n2, t.n3); }
    int leaf(const DenseMatrix& m) { return leaf(m.data.data(), m.rows, m.cols, 1); }
    int leaf(const std::vector<double>& v) { return leaf(v.data(), static_cast<int>(v.size()), 1, 1); }

    int add(int a, int b) {
        require_same_shape(a, b, "add");
        Node n = make(Op::Add, nodes_[a].d0, nodes_[a].d1, nodes_[a].d2);
        n.a = a;
        n.b = b;
        const double* pa = value(a);
        const double* pb = value(b);
        double* out = val_.data() + n.off;
        for (std::size_t i = 0; i < node_size(n); ++i) out[i] = pa[i] + pb[i];
        return push(n);
    }

    int add_scaled(int a, int b, double s) {
        require_same_shape(a, b, "add_scaled");
        Node n = make(Op::AddScaled, nodes_[a].d0, nodes_[a].d1, nodes_[a].d2);
        n.a = a;
        n.b = b;
        n.s = s;
        const double* pa = value(a);
        const double* pb = value(b);
        double* out = val_.data() + n.off;
        for (std::size_t i = 0; i < node_size(n); ++i) out[i] = pa[i] + s * pb[i];
        return push(n);
    }

    int scale(int a, double s) {
        Node n = make(Op::Scale, nodes_[a].d0, nodes_[a].d1, nodes_[a].d2);
        n.a = a;
        n.s = s;
        const double* pa = value(a);
        double* out = val_.data() + n.off;
        for (std::size_t i = 0; i < node_size(n); ++i) out[i] = s * pa[i];
        return push(n);
    }

    int tanh_op(int a) {
        Node n = make(Op::Tanh, nodes_[a].d0, nodes_[a].d1, nodes_[a].d2);
        n.a = a;
        const double* pa = value(a);
        double* out = val_.data() + n.off;
        for (std::size_t i = 0; i < node_size(n); ++i) out[i] = std::tanh(pa[i]);
        return push(n);
    }

    /// tensor a (d0,d1,d2) contracted on `mode` with matrix b (rows x cols).
    int mode_product_op(int a, int b, int mode) {
        const Node& ta = nodes_[a];
        const Node& mb = nodes_[b];
        if (mode < 1 || mode > 3) throw ValidationError("tape mode_product: mode must be 1, 2 or 3");
        if (mb.d2 != 1) throw ShapeError("tape mode_product: second input is not a matrix");
        const int mode_len = mode == 1 ? ta.d0 : mode == 2 ? ta.d1 : ta.d2;
        if (mb.d0 != mode_len) {
            throw ShapeError("tape mode_product: matrix rows do not match tensor mode-" +
                             std::to_string(mode) + " length");
        }
        int d0 = ta.d0, d1 = ta.d1, d2 = ta.d2;
        (mode == 1 ? d0 : mode == 2 ? d1 : d2) = mb.d1;
        Node n = make(Op::ModeProduct, d0, d1, d2);
        n.a = a;
        n.b = b;
        n.i0 = mode;
        detail::mode_product_kernel(value(a), ta.d0, ta.d1, ta.d2, value(b), mb.d1, mode, true,
                                    val_.data() + n.off);
        return push(n);
    }

    int matmul_op(int a, int b) {
        const Node& na = nodes_[a];
        const Node& nb = nodes_[b];
        if (na.d2 != 1 || nb.d2 != 1) throw ShapeError("tape matmul: inputs must be matrices");
        if (na.d1 != nb.d0) throw ShapeError("tape matmul: inner dimensions differ");
        Node n = make(Op::Matmul, na.d0, nb.d1, 1);
        n.a = a;
        n.b = b;
        detail::matmul_kernel(value(a), na.d0, na.d1, value(b), nb.d1, val_.data() + n.off);
        return push(n);
    }

    /// a * b^T for matrices a (m x k), b (n x k).
    int matmul_nt(int a, int b) {
        const Node& na = nodes_[a];
        const Node& nb = nodes_[b];
        if (na.d2 != 1 || nb.d2 != 1) throw ShapeError("tape matmul_nt: inputs must be matrices");
        if (na.d1 != nb.d1) throw ShapeError("tape matmul_nt: shared dimension differs");
        Node n = make(Op::MatmulNT, na.d0, nb.d0, 1);
        n.a = a;
        n.b = b;
        detail::acc_nt(value(a), na.d0, na.d1, value(b), nb.d0, val_.data() + n.off);
        return push(n);
    }

    /// matrix a (r x c) with column j scaled by vector b[j].
    int colscale(int a, int b) {
        const Node& na = nodes_[a];
        const Node& nb = nodes_[b];
        if (na.d2 != 1 || nb.d1 != 1 || nb.d2 != 1) throw ShapeError("tape colscale: expects matrix, vector");
        if (nb.d0 != na.d1) throw ShapeError("tape colscale: vector length does not match columns");
        Node n = make(Op::ColScale, na.d0, na.d1, 1);
        n.a = a;
        n.b = b;
        const double* pa = value(a);
        const double* pv = value(b);
        double* out = val_.data() + n.off;
        for (int r = 0; r < na.d0; ++r)
            for (int c = 0; c < na.d1; ++c)
                out[static_cast<std::size_t>(r) * na.d1 + c] =
                    pa[static_cast<std::size_t>(r) * na.d1 + c] * pv[c];
        return push(n);
    }

    /// square matrix a plus s on the diagonal.
    int add_diag(int a, double s) {
        const Node& na = nodes_[a];
        if (na.d2 != 1 || na.d0 != na.d1) throw ShapeError("tape add_diag: input must be square");
        Node n = make(Op::AddDiag, na.d0, na.d1, 1);
        n.a = a;
        n.s = s;
        const double* pa = value(a);
        double* out = val_.data() + n.off;
        std::memcpy(out, pa, sizeof(double) * node_size(n));
        for (int i = 0; i < na.d0; ++i) out[static_cast<std::size_t>(i) * na.d1 + i] += s;
        return push(n);
    }

    /// matrix a (m x n) plus row vector b (n) broadcast over rows.
    int add_rowvec(int a, int b) {
        const Node& na = nodes_[a];
        const Node& nb = nodes_[b];
        if (na.d2 != 1 || nb.d1 != 1 || nb.d2 != 1) throw ShapeError("tape add_rowvec: expects matrix, vector");
        if (nb.d0 != na.d1) throw ShapeError("tape add_rowvec: vector length does not match columns");
        Node n = make(Op::AddRowVec, na.d0, na.d1, 1);
        n.a = a;
        n.b = b;
        const double* pa = value(a);
        const double* pv = value(b);
        double* out = val_.data() + n.off;
        for (int r = 0; r < na.d0; ++r)
            for (int c = 0; c < na.d1; ++c)
                out[static_cast<std::size_t>(r) * na.d1 + c] =
                    pa[static_cast<std::size_t>(r) * na.d1 + c] + pv[c];
        return push(n);
    }

    /// causal dilated conv along dim1 of x (d0, T, Cin) with kernel w
    /// (Cout, Cin, K) and bias (Cout); pre-activation output.
    int conv1d(int x, int w, int bias, int dilation) {
        const Node& nx = nodes_[x];
        const Node& nw = nodes_[w];
        const Node& nb = nodes_[bias];
        if (nw.d1 != nx.d2) throw ShapeError("tape conv1d: kernel in-channels do not match input");
        if (nb.d0 != nw.d0 || nb.d1 != 1 || nb.d2 != 1) throw ShapeError("tape conv1d: bias length mismatch");
        if (dilation < 1) throw ValidationError("tape conv1d: dilation must be >= 1");
        Node n = make(Op::Conv1d, nx.d0, nx.d1, nw.d0);
        n.a = x;
        n.b = w;
        n.c = bias;
        n.i0 = dilation;
        detail::conv1d_forward_kernel(value(x), nx.d0, nx.d1, nx.d2, value(w), nw.d0, nw.d2, dilation,
                                      value(bias), val_.data() + n.off);
        return push(n);
    }

    /// elementwise max; ties route gradient to the first input.
    int max_pair(int a, int b) {
        require_same_shape(a, b, "max_pair");
        Node n = make(Op::MaxPair, nodes_[a].d0, nodes_[a].d1, nodes_[a].d2);
        n.a = a;
        n.b = b;
        const double* pa = value(a);
        const double* pb = value(b);
        double* out = val_.data() + n.off;
        for (std::size_t i = 0; i < node_size(n); ++i) out[i] = pa[i] >= pb[i] ? pa[i] : pb[i];
        return push(n);
    }

    int reshape(int a, int d0, int d1, int d2) {
        const Node& na = nodes_[a];
        if (static_cast<std::size_t>(d0) * d1 * d2 != node_size(na)) {
            throw ShapeError("tape reshape: element count changes");
        }
        Node n = make(Op::Reshape, d0, d1, d2);
        n.a = a;
        std::memcpy(val_.data() + n.off, value(a), sizeof(double) * node_size(n));
        return push(n);
    }

    /// mean Huber loss between pred and target (same shape); scalar output.
    int huber_mean(int pred, int target, double delta) {
        require_same_shape(pred, target, "huber_mean");
        if (delta <= 0.0) throw ValidationError("tape huber_mean: delta must be positive");
        Node n = make(Op::HuberMean, 1, 1, 1);
        n.a = pred;
        n.b = target;
        n.s = delta;
        const double* pp = value(pred);
        const double* pt = value(target);
        const std::size_t count = value_size(pred);
        double acc = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            const double e = std::abs(pp[i] - pt[i]);
            acc += e <= delta ? 0.5 * e * e : delta * e - 0.5 * delta * delta;
        }
        val_[n.off] = acc / static_cast<double>(count);
        return push(n);
    }

    // ---- reverse pass --------------------------------------------------------

    void backward(int id, double seed = 1.0) {
        if (node_size(nodes_[id]) != 1) throw ValidationError("tape backward: root must be a scalar");
        grad_.assign(val_.size(), 0.0);
        grad_[nodes_[id].off] = seed;
        for (int k = id; k >= 0; --k) backward_node(nodes_[k]);
    }

private:
    std::vector<Node> nodes_;
    std::vector<double> val_;
    std::vector<double> grad_;
    std::vector<double> scratch_;

    static std::size_t node_size(const Node& n) { return static_cast<std::size_t>(n.d0) * n.d1 * n.d2; }

    Node make(Op op, int d0, int d1, int d2) {
        if (d0 < 1 || d1 < 1 || d2 < 1) throw ShapeError("tape: node dims must be positive");
        Node n;
        n.op = op;
        n.d0 = d0;
        n.d1 = d1;
        n.d2 = d2;
        n.off = val_.size();
        val_.resize(val_.size() + node_size(n), 0.0);
        return n;
    }

    int push(Node n) {
        nodes_.push_back(n);
        return static_cast<int>(nodes_.size()) - 1;
    }

    void require_same_shape(int a, int b, const char* what) const {
        const Node& na = nodes_[a];
        const Node& nb = nodes_[b];
        if (na.d0 != nb.d0 || na.d1 != nb.d1 || na.d2 != nb.d2) {
            throw ShapeError(std::string("tape ") + what + ": operand shapes differ");
        }
    }

    void backward_node(const Node& n) {
        const double* g = grad_.data() + n.off;
        const std::size_t sz = node_size(n);
        switch (n.op) {
            case Op::Leaf:
                break;
            case Op::Add: {
                double* da = grad_.data() + nodes_[n.a].off;
                double* db = grad_.data() + nodes_[n.b].off;
                for (std::size_t i = 0; i < sz; ++i) {
                    da[i] += g[i];
                    db[i] += g[i];
                }
                break;
            }
            case Op::AddScaled: {
                double* da = grad_.data() + nodes_[n.a].off;
                double* db = grad_.data() + nodes_[n.b].off;
                for (std::size_t i = 0; i < sz; ++i) {
                    da[i] += g[i];
                    db[i] += n.s * g[i];
                }
                break;
            }
            case Op::Scale: {
                double* da = grad_.data() + nodes_[n.a].off;
                for (std::size_t i = 0; i < sz; ++i) da[i] += n.s * g[i];
                break;
            }
            case Op::Tanh: {
                double* da = grad_.data() + nodes_[n.a].off;
                const double* y = val_.data() + n.off;
                for (std::size_t i = 0; i < sz; ++i) da[i] += g[i] * (1.0 - y[i] * y[i]);
                break;
            }
            case Op::ModeProduct: {
                const Node& ta = nodes_[n.a];
                const Node& mb = nodes_[n.b];
                // dT = g x_mode M^T
                scratch_.resize(node_size(ta));
                detail::mode_product_kernel(g, n.d0, n.d1, n.d2, val_.data() + mb.off, mb.d0, n.i0, false,
                                            scratch_.data());
                double* da = grad_.data() + ta.off;
                for (std::size_t i = 0; i < node_size(ta); ++i) da[i] += scratch_[i];
                detail::mode_product_matrix_grad_kernel(val_.data() + ta.off, ta.d0, ta.d1, ta.d2, g, mb.d1,
                                                        n.i0, grad_.data() + mb.off);
                break;
            }
            case Op::Matmul: {
                const Node& na = nodes_[n.a];
                const Node& nb = nodes_[n.b];
                detail::acc_nt(g, n.d0, n.d1, val_.data() + nb.off, na.d1, grad_.data() + na.off);
                detail::acc_tn(val_.data() + na.off, na.d0, na.d1, g, n.d1, grad_.data() + nb.off);
                break;
            }
            case Op::MatmulNT: {
                const Node& na = nodes_[n.a];
                const Node& nb = nodes_[n.b];
                // out = a b^T : da += g b, db += g^T a
                detail::acc_nn(g, n.d0, n.d1, val_.data() + nb.off, na.d1, grad_.data() + na.off);
                detail::acc_tn(g, n.d0, n.d1, val_.data() + na.off, na.d1, grad_.data() + nb.off);
                break;
            }
            case Op::ColScale: {
                const Node& na = nodes_[n.a];
                const Node& nb = nodes_[n.b];
                const double* pa = val_.data() + na.off;
                const double* pv = val_.data() + nb.off;
                double* da = grad_.data() + na.off;
                double* dv = grad_.data() + nb.off;
                for (int r = 0; r < na.d0; ++r) {
                    const std::size_t row = static_cast<std::size_t>(r) * na.d1;
                    for (int c = 0; c < na.d1; ++c) {
                        da[row + c] += g[row + c] * pv[c];
                        dv[c] += g[row + c] * pa[row + c];
                    }
                }
                break;
            }
            case Op::AddDiag: {
                double* da = grad_.data() + nodes_[n.a].off;
                for (std::size_t i = 0; i < sz; ++i) da[i] += g[i];
                break;
            }
            case Op::AddRowVec: {
                const Node& nb = nodes_[n.b];
                double* da = grad_.data() + nodes_[n.a].off;
                double* dv = grad_.data() + nb.off;
                for (int r = 0; r < n.d0; ++r) {
                    const std::size_t row = static_cast<std::size_t>(r) * n.d1;
                    for (int c = 0; c < n.d1; ++c) {
                        da[row + c] += g[row + c];
                        dv[c] += g[row + c];
                    }
                }
                break;
            }
            case Op::Conv1d: {
                const Node& nx = nodes_[n.a];
                const Node& nw = nodes_[n.b];
                detail::conv1d_backward_input_kernel(g, n.d0, n.d1, n.d2, val_.data() + nw.off, nx.d2, nw.d2,
                                                     n.i0, grad_.data() + nx.off);
                detail::conv1d_backward_weights_kernel(g, val_.data() + nx.off, n.d0, n.d1, nx.d2, n.d2,
                                                       nw.d2, n.i0, grad_.data() + nw.off,
                                                       grad_.data() + nodes_[n.c].off);
                break;
            }
            case Op::MaxPair: {
                const double* pa = val_.data() + nodes_[n.a].off;
                const double* pb = val_.data() + nodes_[n.b].off;
                double* da = grad_.data() + nodes_[n.a].off;
                double* db = grad_.data() + nodes_[n.b].off;
                for (std::size_t i = 0; i < sz; ++i) {
                    if (pa[i] >= pb[i]) {
                        da[i] += g[i];
                    } else {
                        db[i] += g[i];
                    }
                }
                break;
            }
            case Op::Reshape: {
                double* da = grad_.data() + nodes_[n.a].off;
                for (std::size_t i = 0; i < sz; ++i) da[i] += g[i];
                break;
            }
            case Op::HuberMean: {
                const Node& np = nodes_[n.a];
                const double* pp = val_.data() + np.off;
                const double* pt = val_.data() + nodes_[n.b].off;
                double* dp = grad_.data() + np.off;
                double* dt = grad_.data() + nodes_[n.b].off;
                const std::size_t count = node_size(np);
                const double w = g[0] / static_cast<double>(count);
                for (std::size_t i = 0; i < count; ++i) {
                    const double e = pp[i] - pt[i];
                    const double psi = std::abs(e) <= n.s ? e : (e > 0.0 ? n.s : -n.s);
                    dp[i] += w * psi;
                    dt[i] -= w * psi;
                }
                break;
            }
        }
    }
};

}  // namespace stgode

#endif  // STGODE_AUTOGRAD_HPP
