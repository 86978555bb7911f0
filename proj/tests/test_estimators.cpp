#include "lbfem/estimators.hpp"
#include "lbfem/harness.hpp"

#include <gtest/gtest.h>

using namespace lbfem;

TEST(ResidualEstimator, CoplanarLinearHasNoIndicator)
{
    const SurfaceMesh m({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)}, {Tri{0, 1, 2}, Tri{0, 2, 3}});
    Vector u(4);
    for (Index i = 0; i < 4; ++i) u[i] = 0.3 * m.vertices()[i].x() - 1.7 * m.vertices()[i].y();
    const std::vector<double> f(2 * triangle_rule_deg4().size(), 0.0);
    const auto est = residual_estimator_parametric(m, u, f);
    for (double e : est.eta) EXPECT_NEAR(e, 0.0, 1e-14);
}

TEST(ResidualEstimator, SingleFacetBulkTerm)
{
    const SurfaceMesh m({Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(0, 1, 0.5)}, {Tri{0, 1, 2}});
    const std::vector<double> f(triangle_rule_deg4().size(), 1.0);
    const auto est = residual_estimator_parametric(m, Vector::Zero(3), f);
    EXPECT_NEAR(est.eta[0], m.h(0) * std::sqrt(m.area(0)), 1e-14);
    EXPECT_NEAR(est.osc[0], 0.0, 1e-14);
}

TEST(ResidualEstimator, JumpSplitsHalfPerSide)
{
    // bent pair of facets: U = hat at a shared vertex; total eta^2 counts each edge once
    const SurfaceMesh m({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0.4)}, {Tri{0, 1, 2}, Tri{1, 3, 2}});
    Vector u = Vector::Zero(4);
    u[0] = 1.0;
    const std::vector<double> f(2 * triangle_rule_deg4().size(), 0.0);
    const auto est = residual_estimator_parametric(m, u, f);
    const auto& e = m.edges();
    double full = 0.0;
    for (const MeshEdge& edge : e) {
        if (edge.count != 2) continue;
        const auto g = p1_facet_gradients(m.corners(edge.tri[0]));
        const Tri& t = m.triangles()[edge.tri[0]];
        Vec3 grad = Vec3::Zero();
        for (int i = 0; i < 3; ++i) grad += u[t[i]] * g[i];
        const Vec3 mu = edge_conormal(m.corners(edge.tri[0]), m.normal(edge.tri[0]), edge.local[0]);
        const double len = (m.vertices()[edge.a] - m.vertices()[edge.b]).norm();
        const double jump = grad.dot(mu); // the other side has zero gradient
        full += len * jump * jump;
    }
    // eta_T^2 = h_T * 1/2 |e| J^2 on each side
    EXPECT_NEAR(est.eta[0] * est.eta[0] / m.h(0) + est.eta[1] * est.eta[1] / m.h(1), full, 1e-14);
}

TEST(GeometricEstimators, FlatLimit)
{
    const auto s = ImplicitSurface::sphere(1e6);
    const double r = 1e6;
    auto on = [&](double a, double b) { return Vec3(a, b, std::sqrt(r * r - a * a - b * b)); };
    const SurfaceMesh m({on(0, 0), on(1e-4, 0), on(0, 1e-4)}, {Tri{0, 1, 2}});
    const auto est = geometric_estimators_parametric(s, m, LiftKind::ClosestPoint);
    EXPECT_LE(est.lambda[0], 1e-9);
    EXPECT_LE(est.beta[0], 1e-9);
}

TEST(GeometricEstimators, VertexSamplesDoNotMove)
{
    const auto s = ImplicitSurface::sphere(1.0);
    const auto m = build_sphere_mesh(s, 2);
    for (const Vec3& v : m.vertices()) EXPECT_LT((generic_lift(s, LiftKind::ClosestPoint, v) - v).norm(), 1e-15);
}

TEST(GeometricEstimators, RatesOnSphere)
{
    const auto s = ImplicitSurface::sphere(1.0);
    std::vector<double> h, lam, beta, mu;
    for (int level : {2, 3, 4}) {
        const auto m = build_sphere_mesh(s, level);
        const auto g = geometric_estimators_parametric(s, m, LiftKind::ClosestPoint);
        h.push_back(m.h_max());
        lam.push_back(g.lambda_total());
        beta.push_back(g.beta_total());
        mu.push_back(g.mu_total());
        for (std::size_t t = 0; t < g.mu.size(); ++t) EXPECT_NEAR(g.mu[t], g.beta[t] + g.lambda[t] * g.lambda[t], 1e-15);
    }
    for (double r : compute_eoc(lam, h)) EXPECT_NEAR(r, 1.0, 0.1);
    for (double r : compute_eoc(beta, h)) EXPECT_NEAR(r, 2.0, 0.2);
    for (double r : compute_eoc(mu, h)) EXPECT_NEAR(r, 2.0, 0.2);
}

TEST(GeometricEstimators, IndependentOfData)
{
    const auto s = ImplicitSurface::ellipsoid(1.3, 1.0, 0.8);
    const auto m = build_sphere_mesh(s, 2);
    const auto a = geometric_estimators_parametric(s, m, LiftKind::ScaledRadial);
    (void)parametric_solve({s, m, LiftKind::ScaledRadial, manufactured(s)});
    const auto b = geometric_estimators_parametric(s, m, LiftKind::ScaledRadial);
    EXPECT_EQ(a.lambda, b.lambda);
    EXPECT_EQ(a.beta, b.beta);
}

TEST(ResidualEstimator, EfficiencyStableOnSphere)
{
    const auto s = ImplicitSurface::sphere(1.0);
    std::vector<double> h, eta, index;
    for (int level : {2, 3, 4}) {
        const ParametricProblem p{s, build_sphere_mesh(s, level), LiftKind::ClosestPoint, manufactured(s)};
        const auto r = parametric_solve(p);
        const auto est = residual_estimator_parametric(p.mesh, r.field.coefficients, r.forcing);
        h.push_back(r.report.h_max);
        eta.push_back(est.eta_total());
        index.push_back(est.eta_total() / r.report.err_H1);
        for (double e : est.eta) EXPECT_GE(e, 0.0);
    }
    for (double r : compute_eoc(eta, h)) EXPECT_NEAR(r, 1.0, 0.1);
    for (double i : index) {
        EXPECT_GE(i, 1.0);
        EXPECT_LE(i, 20.0);
    }
    EXPECT_LE(*std::max_element(index.begin(), index.end()) / *std::min_element(index.begin(), index.end()), 2.0);
}

TEST(ResidualEstimator, ScalesLinearlyWithForcing)
{
    const auto s = ImplicitSurface::sphere(1.0);
    const auto mesh = build_sphere_mesh(s, 2);
    const auto a = parametric_solve({s, mesh, LiftKind::ClosestPoint, manufactured(s)});
    const auto b = parametric_solve({s, mesh, LiftKind::ClosestPoint, manufactured(s).scaled(2.5)});
    const auto ea = residual_estimator_parametric(mesh, a.field.coefficients, a.forcing);
    const auto eb = residual_estimator_parametric(mesh, b.field.coefficients, b.forcing);
    for (std::size_t t = 0; t < ea.eta.size(); ++t) EXPECT_NEAR(eb.eta[t], 2.5 * ea.eta[t], 1e-9 * eb.eta[t] + 1e-15);
}

TEST(TraceEstimators, Rates)
{
    const auto s = ImplicitSurface::sphere(1.0);
    std::vector<double> h, eta, xi;
    for (int n : {8, 16, 32}) {
        const auto p = make_trace_problem(s, 1.6, n, manufactured(s));
        const auto r = trace_solve(p);
        const auto est = trace_estimators(p.cut, *p.bulk, r.field.scatter(p.bulk->num_vertices()), r.forcing, s);
        h.push_back(p.bulk->h());
        eta.push_back(est.eta_total());
        xi.push_back(est.xi_total());
        for (std::size_t f = 0; f < est.xi.size(); ++f) EXPECT_GE(est.xi[f], 0.0);
    }
    EXPECT_NEAR(compute_eoc(xi, h).back(), 2.0, 0.3);
    EXPECT_NEAR(compute_eoc(eta, h).back(), 1.0, 0.15);
}

TEST(TraceEstimators, CoplanarFacesOfOneTetHaveNoJump)
{
    const auto s = ImplicitSurface::sphere(1.0);
    const auto p = make_trace_problem(s, 1.6, 8, manufactured(s));
    Vector u(p.bulk->num_vertices());
    for (Index v = 0; v < u.size(); ++v) u[v] = p.bulk->vertices()[v].dot(Vec3(1.0, 2.0, -0.5));
    const auto facets = facets_from_cut(p.cut, *p.bulk, u);
    for (std::size_t f = 0; f + 1 < p.cut.faces.size(); ++f) {
        if (p.cut.faces[f].tet != p.cut.faces[f + 1].tet) continue;
        // shared diagonal: identical planes and identical tangential gradients
        EXPECT_LT((facets[f].tangential_gradient() - facets[f + 1].tangential_gradient()).norm(), 1e-12);
    }
}

TEST(Dorfler, Examples)
{
    EXPECT_EQ(dorfler_mark(std::vector<double>(10, 1.0), 0.5).size(), 5u);
    // squared indicators 9, 4, 1, 1, 1
    const auto m = dorfler_mark({3.0, 2.0, 1.0, 1.0, 1.0}, 0.6);
    EXPECT_EQ(m, (std::vector<Index>{0, 1}));
    const auto all = dorfler_mark({0.5, 0.0, 2.0, 1.0}, 1.0);
    EXPECT_EQ(all, (std::vector<Index>{2, 3, 0}));
    // ties broken by id
    EXPECT_EQ(dorfler_mark({1.0, 2.0, 2.0}, 0.3), (std::vector<Index>{1}));
}

TEST(AdaptLoop, ZeroIterations)
{
    const auto s = ImplicitSurface::sphere(1.0);
    const auto h = adapt_loop(s, build_sphere_mesh(s, 1), manufactured(s), 0.5, 0);
    EXPECT_EQ(h.size(), 1u);
}

TEST(AdaptLoop, HistoryMonotoneAndOptimal)
{
    const auto s = ImplicitSurface::sphere(1.0);
    const auto h = adapt_loop(s, build_sphere_mesh(s, 1), manufactured(s), 0.5, 8);
    ASSERT_EQ(h.size(), 9u);
    for (std::size_t i = 1; i < h.size(); ++i) EXPECT_GT(h[i].n_dof, h[i - 1].n_dof);
    for (std::size_t i = 3; i < h.size(); ++i) EXPECT_LE(h[i].eta, 1.1 * h[i - 1].eta);
    std::vector<double> n, e;
    for (const auto& st : h) {
        n.push_back(double(st.n_dof));
        e.push_back(st.err_H1);
    }
    const double slope = loglog_slope(n, e);
    EXPECT_GT(slope, -0.65);
    EXPECT_LT(slope, -0.35);
}
