#include "lbfem/harness.hpp"
#include "lbfem/narrowband.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lbfem;

TEST(MismatchMap, IdentityWhereInterpolationIsExact)
{
    const auto s = ImplicitSurface::sphere(1.0);
    const Vec3 x(0.3, 0.8, 0.9);
    EXPECT_LT((mismatch_map(s, signed_distance(s, x), x) - x).norm(), 1e-15);
    const auto bulk = build_bulk_mesh(s, 1.6, 16);
    const auto val = interpolated_distance(bulk, s);
    for (Index v = 0; v < bulk.num_vertices(); v += 97) {
        const Vec3& p = bulk.vertices()[v];
        if (std::abs(val[v]) < 0.4) {
            EXPECT_LT((mismatch_map(s, val[v], p) - p).norm(), 1e-14);
        }
    }
}

TEST(MismatchMap, SecondOrderDisplacement)
{
    const auto s = ImplicitSurface::sphere(1.0);
    std::vector<double> c;
    for (int n : {12, 24, 48}) {
        const auto p = make_narrowband_problem(s, 1.6, n, 1.5, manufactured(s));
        const auto& quad = band_rule();
        double worst = 0.0;
        for (std::size_t k = 0; k < p.band.tets.size(); k += 5) {
            const Index t = p.band.tets[k];
            const auto cr = p.bulk->corners(t);
            for (std::size_t q = 0; q < quad.size(); ++q) {
                double dh = 0.0;
                for (int i = 0; i < 4; ++i) dh += quad.points[q][i] * p.band.vertex_values[p.bulk->tets()[t][i]];
                if (std::abs(dh) >= p.delta) continue;
                const Vec3 x = barycentric_point<4>(cr, quad.points[q]);
                worst = std::max(worst, (mismatch_map(s, dh, x) - x).norm());
            }
        }
        c.push_back(worst / (p.bulk->h() * p.bulk->h()));
    }
    for (std::size_t i = 1; i < c.size(); ++i) {
        EXPECT_LE(c[i] / c[i - 1], 2.0);
        EXPECT_GE(c[i] / c[i - 1], 0.5);
    }
}

TEST(NarrowBandForcing, ConstantForcingVanishes)
{
    const auto s = ImplicitSurface::sphere(1.0);
    const auto p = make_narrowband_problem(s, 1.6, 16, 1.5, forcing_only("c", [](const Vec3&) { return 4.0; }));
    const auto f = narrowband_forcing(p);
    for (double v : f.values) EXPECT_NEAR(v, 0.0, 1e-13);
    EXPECT_NEAR(f.mean, 4.0, 1e-13);
}

TEST(NarrowBandForcing, MeanZeroAtQuadraturePrecision)
{
    const auto s = ImplicitSurface::torus(1.0, 0.4);
    const auto p = make_narrowband_problem(s, 1.6, 32, 1.5, manufactured(s));
    const auto f = narrowband_forcing(p);
    double sum = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        sum += f.weights[i] * f.values[i];
        scale += f.weights[i] * std::abs(f.values[i]);
    }
    EXPECT_LT(std::abs(sum), 1e-12 * scale);
}

TEST(NarrowBandForcing, MeanCorrectionDecays)
{
    // polynomials invariant under the grid symmetries integrate to zero on any band,
    // so the forcing avoids them; its mean over the unit sphere is still zero
    const auto s = ImplicitSurface::sphere(1.0);
    const auto sol = forcing_only("mixed", [](const Vec3& y) { return y.x() * y.y() + 0.7 * y.y() * y.z() + 0.3 * y.x(); });
    std::vector<double> hs, means;
    for (int n : {12, 16, 24, 32, 48}) {
        const auto p = make_narrowband_problem(s, 1.6, n, 1.5, sol);
        hs.push_back(p.bulk->h());
        means.push_back(std::abs(narrowband_forcing(p).mean));
    }
    for (std::size_t i = 1; i < means.size(); ++i) EXPECT_LT(means[i], means[i - 1]);
    const auto rates = compute_eoc(means, hs);
    EXPECT_GT(rates.back(), 1.5);
}

TEST(NarrowBandProblem, AdmissibilityAndWindow)
{
    const auto s = ImplicitSurface::sphere(1.0);
    try {
        (void)make_narrowband_problem(s, 1.6, 8, 1.5, manufactured(s));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::OutsideTube);
    }
    EXPECT_THROW((void)make_narrowband_problem(s, 1.6, 32, 2.5, manufactured(s)), Error);
    const auto p = make_narrowband_problem(s, 1.6, 12, 1.5, manufactured(s));
    EXPECT_NEAR(p.delta, 1.5 * p.bulk->h(), 1e-15);
}

TEST(NarrowBandSolve, ZeroForcing)
{
    const auto s = ImplicitSurface::sphere(1.0);
    const auto r = narrowband_solve(make_narrowband_problem(s, 1.6, 12, 1.5, zero_solution()));
    EXPECT_EQ(r.field.coefficients.norm(), 0.0);
}

TEST(NarrowBandSolve, OnSurfaceRate)
{
    const auto s = ImplicitSurface::sphere(1.0);
    const auto a = narrowband_solve(make_narrowband_problem(s, 1.6, 16, 1.5, manufactured(s)));
    const auto b = narrowband_solve(make_narrowband_problem(s, 1.6, 32, 1.5, manufactured(s)));
    EXPECT_NEAR(std::log(a.gamma_report.err_H1 / b.gamma_report.err_H1) / std::log(2.0), 1.0, 0.15);
    EXPECT_GT(std::log(a.band_report.err_H1 / b.band_report.err_H1) / std::log(2.0), 1.2);
    EXPECT_TRUE(a.stiffness.is_symmetric());
    const Vector one = Vector::Ones(a.stiffness.rows());
    EXPECT_LE(a.stiffness.multiply(one).lpNorm<Eigen::Infinity>(), 1e-12 * a.stiffness.max_abs());
}

TEST(NarrowBandSolve, MatchesDenseOracleOnSmallSystem)
{
    // smallest admissible band on the unit sphere (474 dofs)
    const auto s = ImplicitSurface::sphere(1.0);
    const auto p = make_narrowband_problem(s, 1.6, 9, 1.0, manufactured(s));
    const auto r = narrowband_solve(p);
    const Index n = r.stiffness.rows();
    ASSERT_LE(n, 500);
    const Vector& m = r.field.mass;
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n + 1, n + 1);
    k.topLeftCorner(n, n) = r.stiffness.to_dense();
    k.block(0, n, n, 1) = m;
    k.block(n, 0, 1, n) = m.transpose();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    rhs.head(n) = r.load - (r.load.sum() / m.sum()) * m;
    const Vector x = k.partialPivLu().solve(rhs).head(n);
    EXPECT_LT((r.field.coefficients - x).norm(), 1e-8 * x.norm());
}
