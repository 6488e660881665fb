#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "stgode/tensor.hpp"

using namespace stgode;

namespace {

Tensor3 random_tensor(int n1, int n2, int n3, unsigned seed) {
    Rng rng(seed);
    Tensor3 t(n1, n2, n3);
    for (auto& v : t.data) v = draw_normal(rng);
    return t;
}

DenseMatrix random_matrix(int rows, int cols, unsigned seed) {
    Rng rng(seed);
    DenseMatrix m(rows, cols);
    for (auto& v : m.data) v = draw_normal(rng);
    return m;
}

DenseMatrix random_symmetric(int n, unsigned seed) {
    Rng rng(seed);
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = draw_normal(rng);
            m(i, j) = v;
            m(j, i) = v;
        }
    return m;
}

}  // namespace

TEST(ModeProduct, IdentityLeavesTensorUnchanged) {
    const Tensor3 t = random_tensor(3, 4, 2, 11);
    for (int mode = 1; mode <= 3; ++mode) {
        const DenseMatrix eye = DenseMatrix::identity(t.dim(mode));
        const Tensor3 out = mode_product(t, eye, mode);
        EXPECT_EQ(out.data, t.data) << "mode " << mode;
    }
}

TEST(ModeProduct, HandExampleMode2) {
    // t holds [1, 2] along the middle axis; rows of m are contracted against it.
    Tensor3 t = Tensor3::from_data(1, 2, 1, {1.0, 2.0});
    const DenseMatrix m = DenseMatrix::from_data(2, 2, {1.0, 2.0, 3.0, 4.0});
    const Tensor3 out = mode_product(t, m, 2);
    ASSERT_EQ(out.dim(2), 2);
    EXPECT_DOUBLE_EQ(out(0, 0, 0), 7.0);
    EXPECT_DOUBLE_EQ(out(0, 1, 0), 10.0);
}

TEST(ModeProduct, SameModeCompositionFusesToMatrixProduct) {
    const Tensor3 t = random_tensor(3, 4, 2, 5);
    for (int mode = 1; mode <= 3; ++mode) {
        const int n = t.dim(mode);
        const DenseMatrix m1 = random_matrix(n, n, 100 + mode);
        const DenseMatrix m2 = random_matrix(n, n, 200 + mode);
        const Tensor3 chained = mode_product(mode_product(t, m1, mode), m2, mode);
        const Tensor3 fused = mode_product(t, matmul(m1, m2), mode);
        EXPECT_LE(max_abs_diff(chained, fused), 1e-12) << "mode " << mode;
    }
}

TEST(ModeProduct, DistinctModesCommute) {
    const Tensor3 t = random_tensor(3, 4, 2, 9);
    const int pairs[3][2] = {{1, 2}, {1, 3}, {2, 3}};
    for (const auto& p : pairs) {
        const DenseMatrix ma = random_matrix(t.dim(p[0]), t.dim(p[0]), 77);
        const DenseMatrix mb = random_matrix(t.dim(p[1]), t.dim(p[1]), 78);
        const Tensor3 ab = mode_product(mode_product(t, ma, p[0]), mb, p[1]);
        const Tensor3 ba = mode_product(mode_product(t, mb, p[1]), ma, p[0]);
        EXPECT_LE(max_abs_diff(ab, ba), 1e-12) << "modes " << p[0] << "," << p[1];
    }
}

TEST(ModeProduct, RectangularMatrixResizesTheContractedAxis) {
    const Tensor3 t = random_tensor(2, 3, 2, 21);
    const DenseMatrix m = random_matrix(3, 5, 22);
    const Tensor3 out = mode_product(t, m, 2);
    EXPECT_EQ(out.dim(1), 2);
    EXPECT_EQ(out.dim(2), 5);
    EXPECT_EQ(out.dim(3), 2);
    double acc = 0.0;
    for (int j = 0; j < 3; ++j) acc += t(1, j, 0) * m(j, 4);
    EXPECT_NEAR(out(1, 4, 0), acc, 1e-14);
}

TEST(ModeProduct, ShapeMismatchNamesTheMode) {
    const Tensor3 t = random_tensor(2, 3, 2, 4);
    const DenseMatrix m = random_matrix(4, 4, 4);
    try {
        mode_product(t, m, 2);
        FAIL() << "expected ShapeError";
    } catch (const ShapeError& e) {
        EXPECT_NE(std::string(e.what()).find("mode-2"), std::string::npos) << e.what();
    }
    EXPECT_THROW(mode_product(t, m, 0), ValidationError);
    EXPECT_THROW(mode_product(t, m, 4), ValidationError);
}

TEST(SymEig, IdentityHasUnitEigenvalues) {
    const SymEig e = sym_eig(DenseMatrix::identity(3));
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(e.values[i], 1.0, 1e-12);
}

TEST(SymEig, FlatTwoNodeMatrix) {
    const DenseMatrix m = DenseMatrix::from_data(2, 2, {0.4, 0.4, 0.4, 0.4});
    const SymEig e = sym_eig(m);
    EXPECT_NEAR(e.values[0], 0.8, 1e-12);
    EXPECT_NEAR(e.values[1], 0.0, 1e-12);
}

TEST(SymEig, DiagonalMatrixKeepsAxisVectors) {
    const DenseMatrix m = DenseMatrix::from_data(2, 2, {2.0, 0.0, 0.0, -1.0});
    const SymEig e = sym_eig(m);
    EXPECT_NEAR(e.values[0], 2.0, 1e-12);
    EXPECT_NEAR(e.values[1], -1.0, 1e-12);
    EXPECT_NEAR(e.vectors(0, 0), 1.0, 1e-12);
    EXPECT_NEAR(e.vectors(1, 0), 0.0, 1e-12);
    EXPECT_NEAR(e.vectors(0, 1), 0.0, 1e-12);
    EXPECT_NEAR(e.vectors(1, 1), 1.0, 1e-12);
}

TEST(SymEig, ReconstructsAndStaysOrthogonal) {
    for (unsigned seed : {3u, 17u, 29u}) {
        const DenseMatrix m = random_symmetric(5, seed);
        const SymEig e = sym_eig(m);
        DenseMatrix scaled = e.vectors;
        for (int c = 0; c < 5; ++c)
            for (int r = 0; r < 5; ++r) scaled(r, c) *= e.values[c];
        const DenseMatrix rebuilt = matmul(scaled, transpose(e.vectors));
        EXPECT_LE(max_abs_diff(rebuilt, m), 1e-8);
        const DenseMatrix gram = matmul(transpose(e.vectors), e.vectors);
        EXPECT_LE(max_abs_diff(gram, DenseMatrix::identity(5)), 1e-8);
        for (int i = 1; i < 5; ++i) EXPECT_GE(e.values[i - 1], e.values[i]);
    }
}

TEST(SymEig, RejectsAsymmetricAndNonSquare) {
    DenseMatrix bad = DenseMatrix::identity(2);
    bad(0, 1) = 0.5;
    EXPECT_THROW(sym_eig(bad), ValidationError);
    EXPECT_THROW(sym_eig(DenseMatrix(2, 3)), ValidationError);
}

TEST(MatrixExp, ZeroTimeIsIdentity) {
    const SymEig e = sym_eig(random_symmetric(4, 8));
    const DenseMatrix out = expm_scaled(e, 0.0);
    EXPECT_LE(max_abs_diff(out, DenseMatrix::identity(4)), 1e-14);
}

TEST(MatrixExp, ScalarDecay) {
    const SymEig e = sym_eig(DenseMatrix::from_data(1, 1, {-1.0}));
    const DenseMatrix out = expm_scaled(e, 1.0);
    EXPECT_NEAR(out(0, 0), std::exp(-1.0), 1e-14);
}

TEST(MatrixExp, MatchesTruncatedPowerSeries) {
    // generator: the flat two-node matrix shifted by -I, eigenvalues -0.2 and -1.
    const DenseMatrix gen = DenseMatrix::from_data(2, 2, {-0.6, 0.4, 0.4, -0.6});
    const SymEig e = sym_eig(gen);
    const double t = 1.0;
    DenseMatrix series = DenseMatrix::identity(2);
    DenseMatrix term = DenseMatrix::identity(2);
    for (int k = 1; k <= 20; ++k) {
        term = matmul(term, gen);
        for (auto& v : term.data) v *= t / k;
        for (std::size_t i = 0; i < series.data.size(); ++i) series.data[i] += term.data[i];
    }
    EXPECT_LE(max_abs_diff(expm_scaled(e, t), series), 1e-12);
}

TEST(MatrixExp, SemigroupProperty) {
    const SymEig e = sym_eig(random_symmetric(4, 13));
    const DenseMatrix split = matmul(expm_scaled(e, 0.3), expm_scaled(e, 0.5));
    const DenseMatrix whole = expm_scaled(e, 0.8);
    EXPECT_LE(max_abs_diff(split, whole), 1e-8);
}

TEST(MatrixPow, FlatMatrixFifthPower) {
    const DenseMatrix m = DenseMatrix::from_data(2, 2, {0.4, 0.4, 0.4, 0.4});
    const DenseMatrix p5 = powm(sym_eig(m), 5);
    for (double v : p5.data) EXPECT_NEAR(v, 0.16384, 1e-12);
}

TEST(MatrixPow, MatchesRepeatedMultiplication) {
    const DenseMatrix m = random_symmetric(4, 31);
    const SymEig e = sym_eig(m);
    DenseMatrix acc = DenseMatrix::identity(4);
    for (int p = 0; p <= 4; ++p) {
        EXPECT_LE(max_abs_diff(powm(e, p), acc), 1e-8) << "power " << p;
        acc = matmul(acc, m);
    }
}

TEST(MatrixLog, RejectsNearSingularMatrix) {
    const SymEig e = sym_eig(DenseMatrix::from_data(2, 2, {0.4, 0.4, 0.4, 0.4}));
    EXPECT_THROW(logm(e), ValidationError);
}

TEST(MatrixLog, InvertsExp) {
    const SymEig e = sym_eig(DenseMatrix::from_data(2, 2, {0.7, 0.1, 0.1, 0.7}));
    const DenseMatrix lg = logm(e);
    const DenseMatrix back = expm_scaled(sym_eig(lg), 1.0);
    DenseMatrix orig = DenseMatrix::from_data(2, 2, {0.7, 0.1, 0.1, 0.7});
    EXPECT_LE(max_abs_diff(back, orig), 1e-10);
}

TEST(RandomOrthogonal, SingleColumnIsSignOnly) {
    const DenseMatrix q = random_orthogonal(1, 42);
    EXPECT_NEAR(std::abs(q(0, 0)), 1.0, 1e-14);
}

TEST(RandomOrthogonal, ColumnsAreOrthonormal) {
    const DenseMatrix q = random_orthogonal(4, 7);
    const DenseMatrix gram = matmul(transpose(q), q);
    EXPECT_LE(max_abs_diff(gram, DenseMatrix::identity(4)), 1e-10);
}

TEST(RandomOrthogonal, SeedIsDeterministic) {
    const DenseMatrix a = random_orthogonal(5, 123);
    const DenseMatrix b = random_orthogonal(5, 123);
    EXPECT_EQ(a.data, b.data);
    const DenseMatrix c = random_orthogonal(5, 124);
    EXPECT_NE(a.data, c.data);
}

TEST(OrthonormalizeColumns, RepairsLinearlyIndependentSet) {
    DenseMatrix m = random_matrix(4, 4, 55);
    orthonormalize_columns(m);
    EXPECT_LE(max_abs_diff(matmul(transpose(m), m), DenseMatrix::identity(4)), 1e-10);
}

TEST(TensorContainers, ValidateShapes) {
    EXPECT_THROW(Tensor3(0, 1, 1), ValidationError);
    EXPECT_THROW(Tensor3::from_data(2, 2, 2, {1.0}), ShapeError);
    EXPECT_THROW(DenseMatrix::from_data(2, 2, {1.0, 2.0}), ShapeError);
    EXPECT_THROW(matmul(DenseMatrix(2, 3), DenseMatrix(2, 3)), ShapeError);
    const Tensor3 t = random_tensor(2, 3, 4, 1);
    EXPECT_EQ(t.dim(1), 2);
    EXPECT_EQ(t.dim(2), 3);
    EXPECT_EQ(t.dim(3), 4);
    EXPECT_EQ(t.size(), 24u);
    EXPECT_THROW(add(t, random_tensor(2, 3, 5, 2)), ShapeError);
}

TEST(TensorArithmetic, AddScaleCompose) {
    const Tensor3 a = random_tensor(2, 2, 2, 61);
    const Tensor3 b = random_tensor(2, 2, 2, 62);
    const Tensor3 sum = add_scaled(a, b, 0.5);
    const Tensor3 manual = add(a, scale(b, 0.5));
    EXPECT_LE(max_abs_diff(sum, manual), 1e-15);
    EXPECT_GT(max_abs(sum), 0.0);
}
