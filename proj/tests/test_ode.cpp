#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "stgode/ode.hpp"
#include "stgode/verify.hpp"

using namespace stgode;

namespace {

OdeParams identity_instance(int n1, int n2, int n3, unsigned seed) {
    OdeParams p;
    p.a_hat = adjacency_from_matrix(DenseMatrix::identity(n1), 0.8, AdjacencyKind::Spatial);
    p.u = FactoredTransform::identity_fixture(n2);
    p.w = FactoredTransform::identity_fixture(n3);
    Rng rng(seed);
    p.h0 = Tensor3(n1, n2, n3);
    for (auto& v : p.h0.data) v = draw_normal(rng);
    return p;
}

OdeParams scalar_instance(double a, double h0) {
    OdeParams p;
    p.a_hat = adjacency_from_matrix(DenseMatrix::from_data(1, 1, {a}), 0.8, AdjacencyKind::Spatial);
    p.u = FactoredTransform::identity_fixture(1);
    p.w = FactoredTransform::identity_fixture(1);
    p.h0 = Tensor3::from_data(1, 1, 1, {h0});
    return p;
}

Tensor3 state_like(const Tensor3& shape, unsigned seed) {
    Rng rng(seed);
    Tensor3 h(shape.n1, shape.n2, shape.n3);
    for (auto& v : h.data) v = draw_normal(rng);
    return h;
}

}  // namespace

TEST(Dynamics, AllIdentityTransformsLeaveOnlyRestartTerm) {
    const OdeParams p = identity_instance(3, 4, 2, 2);
    const Tensor3 h = state_like(p.h0, 3);
    const Tensor3 out = dynamics_taylor(h, p);
    EXPECT_EQ(out.data, p.h0.data);
}

TEST(Dynamics, ZeroStateYieldsRestartTerm) {
    Rng rng(4);
    const OdeParams p = detail::random_ode_instance(rng, 4, 3, 2);
    Tensor3 zero(4, 3, 2);
    const Tensor3 out = dynamics_taylor(zero, p);
    EXPECT_EQ(out.data, p.h0.data);
}

TEST(Dynamics, ScalarHandValue) {
    const OdeParams p = scalar_instance(0.8, 1.0);
    const Tensor3 h = Tensor3::from_data(1, 1, 1, {1.0});
    // (0.8 - 1) * 1 + 0 + 0 + 1
    EXPECT_NEAR(dynamics_taylor(h, p)(0, 0, 0), 0.8, 1e-15);
}

TEST(Dynamics, ExactLogScalarHandValue) {
    OdeParams p = scalar_instance(0.8, 0.0);
    const Tensor3 h = Tensor3::from_data(1, 1, 1, {1.0});
    EXPECT_NEAR(dynamics_exact_log(h, p)(0, 0, 0), std::log(0.8), 1e-12);
}

TEST(Dynamics, LinearizationGapShrinksQuadratically) {
    // a_hat = I - eps*S stays symmetric positive definite for small eps, so the
    // exact-log generator is defined; the two dynamics should agree to O(eps^2).
    Rng rng(12);
    DenseMatrix s(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            const double v = draw_uniform(rng, 0.01, 0.1);
            s(i, j) = v;
            s(j, i) = v;
        }
    const Tensor3 h = state_like(Tensor3(3, 2, 2), 13);
    auto gap_at = [&](double eps) {
        DenseMatrix a = DenseMatrix::identity(3);
        for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] -= eps * s.data[i];
        OdeParams p;
        p.a_hat = adjacency_from_matrix(a, 0.8, AdjacencyKind::Spatial);
        p.u = FactoredTransform::identity_fixture(2);
        p.w = FactoredTransform::identity_fixture(2);
        p.h0 = Tensor3(3, 2, 2);
        return max_abs_diff(dynamics_taylor(h, p), dynamics_exact_log(h, p));
    };
    const double g1 = gap_at(0.08);
    const double g2 = gap_at(0.04);
    EXPECT_GT(g1, 0.0);
    EXPECT_NEAR(g1 / g2, 4.0, 0.5);
}

TEST(EulerSolve, SingleStepOnIdentityInstanceDoublesState) {
    const OdeParams p = identity_instance(2, 3, 2, 6);
    SolverConfig cfg;
    cfg.t_end = 1.0;
    cfg.steps = 1;
    const Tensor3 out = euler_solve(p, cfg);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        EXPECT_NEAR(out.data[i], 2.0 * p.h0.data[i], 1e-15);
}

TEST(EulerSolve, ScalarClosedFormOracle) {
    // dh/dt = -0.2 h + 1 from h(0)=1 gives h(1) = 5 - 4 exp(-0.2).
    const OdeParams p = scalar_instance(0.8, 1.0);
    const double want = 5.0 - 4.0 * std::exp(-0.2);
    EXPECT_NEAR(analytic_solution(p, 1.0)(0, 0, 0), want, 1e-9);
    SolverConfig cfg;
    cfg.t_end = 1.0;
    cfg.steps = 1024;
    EXPECT_NEAR(euler_solve(p, cfg)(0, 0, 0), want, 1e-3);
}

TEST(EulerSolve, FirstOrderErrorDecayOnScalarInstance) {
    const OdeParams p = scalar_instance(0.8, 1.0);
    const double want = 5.0 - 4.0 * std::exp(-0.2);
    auto err_at = [&](int steps) {
        SolverConfig cfg;
        cfg.t_end = 1.0;
        cfg.steps = steps;
        return std::abs(euler_solve(p, cfg)(0, 0, 0) - want);
    };
    const double e256 = err_at(256), e512 = err_at(512), e1024 = err_at(1024);
    EXPECT_GT(e256 / e512, 1.8);
    EXPECT_LT(e256 / e512, 2.2);
    EXPECT_GT(e512 / e1024, 1.8);
    EXPECT_LT(e512 / e1024, 2.2);
}

TEST(AnalyticSolution, TimeZeroReturnsInitialState) {
    Rng rng(8);
    const OdeParams p = detail::random_ode_instance(rng, 3, 2, 2);
    EXPECT_EQ(analytic_solution(p, 0.0).data, p.h0.data);
    const Tensor3 z = analytic_solution(p, 0.0, true);
    for (double v : z.data) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(analytic_solution(p, -0.5), ValidationError);
}

TEST(AnalyticSolution, MatchesQuadratureOnRandomInstances) {
    Rng rng(15);
    for (int rep = 0; rep < 3; ++rep) {
        const OdeParams p = detail::random_ode_instance(rng, 3, 3, 2);
        const Tensor3 a = analytic_solution(p, 1.0);
        const Tensor3 q = ode_quadrature_solution(p, 1.0, 2000);
        EXPECT_LE(max_abs_diff(a, q), 1e-6);
    }
}

TEST(AnalyticSolution, MatchesHighResolutionEuler) {
    Rng rng(16);
    const OdeParams p = detail::random_ode_instance(rng, 4, 3, 2);
    SolverConfig cfg;
    cfg.t_end = 1.0;
    cfg.steps = 20000;
    EXPECT_LE(max_abs_diff(analytic_solution(p, 1.0), euler_solve(p, cfg)), 1e-3);
}

TEST(Rk4Solve, FarMoreAccurateThanEulerAtEqualSteps) {
    Rng rng(19);
    const OdeParams p = detail::random_ode_instance(rng, 3, 2, 2);
    const Tensor3 truth = analytic_solution(p, 1.0);
    SolverConfig cfg;
    cfg.t_end = 1.0;
    cfg.steps = 64;
    const double err_euler = max_abs_diff(euler_solve(p, cfg), truth);
    const double err_rk4 = max_abs_diff(rk4_solve_with(p, cfg, dynamics_taylor), truth);
    EXPECT_LT(err_rk4, err_euler / 50.0);
    EXPECT_LT(err_rk4, 1e-6);
}

TEST(DiscreteRecursion, DepthZeroIsInitialState) {
    Rng rng(21);
    const OdeParams p = detail::random_ode_instance(rng, 3, 2, 2);
    EXPECT_EQ(discrete_recursion(p, 0).data, p.h0.data);
    EXPECT_THROW(discrete_recursion(p, -1), ValidationError);
}

TEST(DiscreteRecursion, IdentityInstanceGrowsLinearly) {
    const OdeParams p = identity_instance(2, 2, 2, 24);
    for (int l = 0; l <= 4; ++l) {
        const Tensor3 out = discrete_recursion(p, l);
        for (std::size_t i = 0; i < out.data.size(); ++i)
            EXPECT_NEAR(out.data[i], (l + 1) * p.h0.data[i], 1e-12) << "depth " << l;
    }
}

TEST(DiscreteRecursion, MatchesClosedFormExpansion) {
    Rng rng(25);
    for (int rep = 0; rep < 3; ++rep) {
        const OdeParams p = detail::random_ode_instance(rng, 3, 3, 2);
        for (int l = 0; l <= 6; ++l)
            EXPECT_LE(max_abs_diff(discrete_recursion(p, l), discrete_expansion(p, l)), 1e-10)
                << "depth " << l;
    }
}

TEST(PowerCollapse, FlatMatrixFifthPower) {
    const RegularizedAdjacency adj = regularize(DenseMatrix::from_data(2, 2, {0.0, 1.0, 1.0, 0.0}),
                                                0.8, AdjacencyKind::Spatial);
    const auto [p5, ratio] = power_collapse_demo(adj, 5);
    for (double v : p5.data) EXPECT_NEAR(v, 0.16384, 1e-12);
    EXPECT_NEAR(ratio, 0.0, 1e-12);
}

TEST(PowerCollapse, SpectralRatioDecaysWithPower) {
    Rng rng(29);
    const RegularizedAdjacency adj =
        build_regularized(detail::random_weight_graph(rng, 5, 0.8), 0.8, AdjacencyKind::Spatial);
    double prev = 2.0;
    for (int n = 1; n <= 4; ++n) {
        const auto [pn, ratio] = power_collapse_demo(adj, n);
        EXPECT_LT(ratio, prev);
        prev = ratio;
    }
}

TEST(Reproject, ClampsEigenvaluesIntoOpenUnitInterval) {
    FactoredTransform ft = FactoredTransform::random(4, 33);
    ft.eigvals[0] = 1.5;
    ft.eigvals[3] = -0.5;
    ft = reproject(ft);
    EXPECT_DOUBLE_EQ(ft.eigvals[0], kEigClampHi);
    EXPECT_DOUBLE_EQ(ft.eigvals[3], kEigClampLo);
    for (double v : ft.eigvals) {
        EXPECT_GE(v, kEigClampLo);
        EXPECT_LE(v, kEigClampHi);
    }
}

TEST(Reproject, RestoresOrthogonalityAfterDrift) {
    FactoredTransform ft = FactoredTransform::random(5, 34);
    Rng rng(35);
    for (auto& v : ft.basis.data) v += 1e-4 * draw_normal(rng);
    ft = reproject(ft);
    const DenseMatrix gram = matmul(transpose(ft.basis), ft.basis);
    EXPECT_LE(max_abs_diff(gram, DenseMatrix::identity(5)), 1e-10);
}

TEST(Reproject, LeavesValidTransformNearlyUntouched) {
    FactoredTransform ft = FactoredTransform::random(4, 36);
    const FactoredTransform before = ft;
    ft = reproject(ft);
    EXPECT_LE(max_abs_diff(ft.basis, before.basis), 1e-10);
    for (std::size_t i = 0; i < ft.eigvals.size(); ++i)
        EXPECT_NEAR(ft.eigvals[i], before.eigvals[i], 1e-12);
}

TEST(FactoredTransform, MatrixAndLogMatrixAreConsistent) {
    const FactoredTransform ft = FactoredTransform::random(3, 40);
    const DenseMatrix m = ft.matrix();
    const DenseMatrix lg = ft.log_matrix();
    // exp(log M) recovers M through the shared eigenbasis.
    const DenseMatrix back = expm_scaled(sym_eig(lg), 1.0);
    EXPECT_LE(max_abs_diff(back, m), 1e-9);
}

TEST(SolverConfig, Validates) {
    SolverConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.steps = 0;
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg.steps = 6;
    cfg.t_end = 0.0;
    EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(OdeParams, ValidateCatchesShapeMismatches) {
    const OdeParams good = identity_instance(2, 3, 2, 50);
    EXPECT_NO_THROW(good.validate());
    OdeParams bad = good;
    bad.h0 = Tensor3(2, 3, 3);
    EXPECT_THROW(bad.validate(), ShapeError);
    bad = good;
    bad.u = FactoredTransform::identity_fixture(4);
    EXPECT_THROW(bad.validate(), ShapeError);
}
