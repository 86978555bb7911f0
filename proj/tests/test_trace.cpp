#include "lbfem/estimators.hpp"
#include "lbfem/trace.hpp"

#include <gtest/gtest.h>

using namespace lbfem;

TEST(TraceForcing, TangentFaceReducesToF)
{
    const auto s = ImplicitSurface::sphere(1.0);
    const auto p = make_trace_problem(s, 1.6, 8, manufactured(s));
    const Vec3 y = Vec3(1, -2, 2) / 3.0;
    EXPECT_NEAR(trace_forcing(p, y, y), p.solution.f(y), 1e-14);
}

TEST(TraceForcing, IntegralsTransport)
{
    const auto s = ImplicitSurface::sphere(1.0);
    const auto p = make_trace_problem(s, 1.6, 32, manufactured(s));
    const auto r = trace_assemble(p);
    double fmax = 0.0;
    for (double v : r.forcing) fmax = std::max(fmax, std::abs(v));
    EXPECT_LT(std::abs(r.load.sum()), 1e-3 * fmax);

    const auto pc = make_trace_problem(s, 1.6, 32, forcing_only("c", [](const Vec3&) { return 1.5; }));
    EXPECT_NEAR(trace_assemble(pc).load.sum(), 1.5 * 4.0 * kPi, 0.02 * 1.5 * 4.0 * kPi);
}

TEST(TraceSolve, ZeroForcing)
{
    const auto s = ImplicitSurface::sphere(1.0);
    const auto r = trace_solve(make_trace_problem(s, 1.6, 8, zero_solution()));
    EXPECT_EQ(r.field.coefficients.norm(), 0.0);
}

TEST(TraceSolve, ConstantsInKernelAndSymmetric)
{
    const auto s = ImplicitSurface::torus(1.0, 0.4);
    const auto r = trace_assemble(make_trace_problem(s, 1.6, 16, manufactured(s)));
    EXPECT_TRUE(r.stiffness.is_symmetric());
    const Vector one = Vector::Ones(r.stiffness.rows());
    EXPECT_LE(r.stiffness.multiply(one).lpNorm<Eigen::Infinity>(), 1e-12 * r.stiffness.max_abs());
}

TEST(TraceSolve, LinearBulkFunctionGradient)
{
    const auto s = ImplicitSurface::sphere(1.0);
    const auto p = make_trace_problem(s, 1.6, 8, manufactured(s));
    const Vec3 a(0.3, -0.7, 1.1);
    Vector u(p.bulk->num_vertices());
    for (Index v = 0; v < u.size(); ++v) u[v] = a.dot(p.bulk->vertices()[v]);
    const auto facets = facets_from_cut(p.cut, *p.bulk, u);
    for (std::size_t f = 0; f < facets.size(); ++f)
        EXPECT_LT((facets[f].tangential_gradient() - tangent_projector(p.cut.faces[f].normal) * a).norm(), 1e-12);
}

TEST(TraceSolve, RatesAndResolution)
{
    const auto s = ImplicitSurface::sphere(1.0);
    const auto r1 = trace_solve(make_trace_problem(s, 1.6, 16, manufactured(s)));
    const auto r2 = trace_solve(make_trace_problem(s, 1.6, 32, manufactured(s)));
    const double hr = std::log(2.0);
    EXPECT_NEAR(std::log(r1.report.err_H1 / r2.report.err_H1) / hr, 1.0, 0.15);
    EXPECT_NEAR(std::log(r1.report.err_L2 / r2.report.err_L2) / hr, 2.0, 0.3);
    // resolution constants stable across refinement
    const double cd1 = r1.resolution.max_distance / (0.2 * 0.2), cd2 = r2.resolution.max_distance / (0.1 * 0.1);
    const double cn1 = r1.resolution.max_normal_deviation / 0.2, cn2 = r2.resolution.max_normal_deviation / 0.1;
    EXPECT_GE(cd2 / cd1, 0.3);
    EXPECT_LE(cd2 / cd1, 3.0);
    EXPECT_GE(cn2 / cn1, 0.3);
    EXPECT_LE(cn2 / cn1, 3.0);
    // surface-dimensional dof growth
    const double ratio = double(r2.report.n_dof) / double(r1.report.n_dof);
    EXPECT_GT(ratio, 3.0);
    EXPECT_LT(ratio, 5.0);
}

// d_h is a bulk P1 function with zero trace, so coefficients are only fixed up to
// multiples of it and of 1; the oracle pins both and the traces are compared.
TEST(TraceSolve, MatchesDenseOracleOnSmallSystem)
{
    const auto s = ImplicitSurface::sphere(1.0);
    const auto p = make_trace_problem(s, 1.6, 6, manufactured(s));
    const auto r = trace_solve(p);
    const Index n = r.stiffness.rows();
    ASSERT_LE(n, 200);
    const Vector& m = r.field.mass;
    Vector dh(n);
    for (Index i = 0; i < n; ++i) dh[i] = p.cut.vertex_values[r.field.dof_map[i]];
    EXPECT_LT(r.stiffness.multiply(dh).lpNorm<Eigen::Infinity>(), 1e-12 * r.stiffness.to_dense().lpNorm<Eigen::Infinity>());

    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n + 2, n + 2);
    k.topLeftCorner(n, n) = r.stiffness.to_dense();
    k.block(0, n, n, 1) = m;
    k.block(n, 0, 1, n) = m.transpose();
    k.block(0, n + 1, n, 1) = dh;
    k.block(n + 1, 0, 1, n) = dh.transpose();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 2);
    rhs.head(n) = r.load - (r.load.sum() / m.sum()) * m;
    const Eigen::VectorXd sol = k.fullPivLu().solve(rhs);
    EXPECT_LT((k * sol - rhs).norm(), 1e-12 * rhs.norm());

    auto traces = [&](const Vector& x) {
        SolutionField f = r.field;
        f.coefficients = x;
        const auto facets = facets_from_cut(p.cut, *p.bulk, f.scatter(p.bulk->num_vertices()));
        std::vector<double> out;
        for (const auto& fa : facets)
            for (const Vec3& c : fa.corners) out.push_back(fa.eval(c));
        return Eigen::Map<const Vector>(out.data(), static_cast<Index>(out.size())).eval();
    };
    const Vector ref = traces(sol.head(n));
    EXPECT_LT((traces(r.field.coefficients) - ref).norm(), 1e-8 * ref.norm());
}

TEST(TraceSolve, SkinLayerContained)
{
    const auto s = ImplicitSurface::sphere(1.0);
    EXPECT_GT(skin_layer_containment(make_trace_problem(s, 1.6, 16, manufactured(s))), 0.99);
    EXPECT_EQ(skin_layer_containment(make_trace_problem(s, 1.6, 32, manufactured(s))), 1.0);
}

TEST(TraceSolve, EllipsoidRuns)
{
    const auto s = ImplicitSurface::ellipsoid(1.3, 1.0, 0.8);
    const auto r1 = trace_solve(make_trace_problem(s, 2.1, 16, manufactured(s)));
    const auto r2 = trace_solve(make_trace_problem(s, 2.1, 32, manufactured(s)));
    EXPECT_LT(r2.report.err_H1, 0.65 * r1.report.err_H1);
}
