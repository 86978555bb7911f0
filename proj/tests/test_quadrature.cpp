#include "lbfem/p1.hpp"
#include "lbfem/quadrature.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lbfem;

namespace {

double factorial(int n)
{
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// Integral over the reference simplex of prod lambda_i^alpha_i (lambda_0 omitted):
// prod alpha_i! * d! / (|alpha| + d)! times the reference measure 1/d!.
double monomial_integral(const std::vector<int>& alpha)
{
    const int d = static_cast<int>(alpha.size());
    int sum = 0;
    double num = 1.0;
    for (int a : alpha) {
        sum += a;
        num *= factorial(a);
    }
    return num / factorial(sum + d);
}

void check_exactness(const QuadratureRule& rule, int dim)
{
    for (int a = 0; a <= rule.degree; ++a)
        for (int b = 0; a + b <= rule.degree; ++b)
            for (int c = 0; a + b + c <= rule.degree; ++c) {
                if (dim == 2 && c > 0) continue;
                double q = 0.0;
                for (std::size_t i = 0; i < rule.size(); ++i) {
                    const auto& l = rule.points[i];
                    q += rule.weights[i] * std::pow(l[1], a) * std::pow(l[2], b) * (dim == 3 ? std::pow(l[3], c) : 1.0);
                }
                const double exact = dim == 2 ? monomial_integral({a, b}) : monomial_integral({a, b, c});
                EXPECT_NEAR(q, exact, 1e-14) << a << b << c;
            }
}

} // namespace

TEST(Quadrature, TriangleDegreeFour)
{
    const auto& r = triangle_rule_deg4();
    EXPECT_EQ(r.size(), 6u);
    EXPECT_EQ(r.degree, 4);
    check_exactness(r, 2);
    for (double w : r.weights) EXPECT_GT(w, 0.0);
}

TEST(Quadrature, TetDegreeTwo)
{
    const auto& r = tet_rule_deg2();
    EXPECT_EQ(r.size(), 4u);
    check_exactness(r, 3);
    for (double w : r.weights) EXPECT_GT(w, 0.0);
}

TEST(Quadrature, TetDegreeFive)
{
    const auto& r = tet_rule_deg5();
    EXPECT_EQ(r.size(), 14u);
    EXPECT_EQ(r.degree, 5);
    check_exactness(r, 3);
    for (double w : r.weights) EXPECT_GT(w, 0.0);
}

TEST(Quadrature, BarycentricsSumToOne)
{
    for (const QuadratureRule* r : {&triangle_rule_deg4(), &tet_rule_deg2(), &tet_rule_deg5()})
        for (const auto& p : r->points) EXPECT_NEAR(p[0] + p[1] + p[2] + p[3], 1.0, 1e-15);
}

TEST(P1Gradients, ReferenceTriangle)
{
    const auto g = p1_facet_gradients({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)});
    EXPECT_NEAR((g[0] - Vec3(-1, -1, 0)).norm(), 0.0, 1e-15);
    EXPECT_NEAR((g[1] - Vec3(1, 0, 0)).norm(), 0.0, 1e-15);
    EXPECT_NEAR((g[2] - Vec3(0, 1, 0)).norm(), 0.0, 1e-15);
}

TEST(P1Gradients, RandomTriangleReproducesLinearFunctions)
{
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n;
    for (int i = 0; i < 100; ++i) {
        const std::array<Vec3, 3> v{Vec3(n(rng), n(rng), n(rng)), Vec3(n(rng), n(rng), n(rng)), Vec3(n(rng), n(rng), n(rng))};
        const Vec3 a(n(rng), n(rng), n(rng));
        const auto g = p1_facet_gradients(v);
        EXPECT_LT((g[0] + g[1] + g[2]).norm(), 1e-12);
        const Vec3 nu = triangle_normal(v[0], v[1], v[2]);
        const Vec3 rec = a.dot(v[0]) * g[0] + a.dot(v[1]) * g[1] + a.dot(v[2]) * g[2];
        EXPECT_LT((rec - tangent_projector(nu) * a).norm(), 1e-10 * (1.0 + a.norm()));
        for (int k = 0; k < 3; ++k) {
            EXPECT_LT(std::abs(g[k].dot(nu)), 1e-10 * g[k].norm());
            EXPECT_LT(std::abs(g[k].dot(v[(k + 2) % 3] - v[(k + 1) % 3])), 1e-10 * g[k].norm());
        }
    }
}

TEST(P1Gradients, TetReproducesLinearFunctions)
{
    const std::array<Vec3, 4> v{Vec3(0.1, 0, 0), Vec3(1, 0.2, 0), Vec3(0, 1, 0.3), Vec3(0.2, 0.1, 1)};
    const Vec3 a(0.3, -1.2, 2.0);
    const auto g = p1_tet_gradients(v);
    Vec3 rec = Vec3::Zero();
    for (int i = 0; i < 4; ++i) rec += a.dot(v[i]) * g[i];
    EXPECT_LT((rec - a).norm(), 1e-13);
}

TEST(P1Gradients, DegenerateRejected)
{
    try {
        (void)p1_facet_gradients({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateSimplex);
    }
    try {
        (void)p1_tet_gradients({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateSimplex);
    }
}

TEST(Stiffness, SquarePatchMatchesHandAssembly)
{
    // unit square split along (1,0)-(0,1); standard P1 stiffness of the patch
    std::vector<TriangleElement> el{{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {0, 1, 3}},
                                    {{Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)}, {1, 2, 3}}};
    const Eigen::MatrixXd a = assemble_stiffness<3>(4, el).to_dense();
    Eigen::Matrix4d expect;
    expect << 1.0, -0.5, 0.0, -0.5,
             -0.5, 1.0, -0.5, 0.0,
              0.0, -0.5, 1.0, -0.5,
             -0.5, 0.0, -0.5, 1.0;
    EXPECT_LT((a - expect).norm(), 1e-14);
}

TEST(Stiffness, ConstantsInKernel)
{
    std::vector<TriangleElement> el{{{Vec3(0.1, 0.3, 0.2), Vec3(1, 0, 0.4), Vec3(0, 1, -0.3)}, {0, 1, 2}}};
    const auto a = assemble_stiffness<3>(3, el);
    EXPECT_LT(a.multiply(Vector::Ones(3)).norm(), 1e-14);
    EXPECT_TRUE(a.is_symmetric());
}

TEST(Load, Examples)
{
    const TriangleElement unit{{Vec3(0, 0, 0), Vec3(std::sqrt(2.0), 0, 0), Vec3(0, std::sqrt(2.0), 0)}, {0, 1, 2}};
    const auto& q = triangle_rule_deg4();
    const Vector zero = assemble_load<3>(3, {unit}, q, [](const Vec3&) { return 0.0; });
    EXPECT_EQ(zero.norm(), 0.0);
    const Vector one = assemble_load<3>(3, {unit}, q, [](const Vec3&) { return 1.0; });
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(one[i], 1.0 / 3.0, 1e-15);
    // F = x on T: int phi_i x = |T| (sum_j x_j + x_i) / 12
    const Vector lin = assemble_load<3>(3, {unit}, q, [](const Vec3& x) { return x.x(); });
    const double xs[3] = {0.0, std::sqrt(2.0), 0.0};
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(lin[i], 1.0 * (std::sqrt(2.0) + xs[i]) / 12.0, 1e-15);
}

TEST(Load, TetLinearExact)
{
    const TetElement t{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}, {0, 1, 2, 3}};
    const Vector b = assemble_load<4>(4, {t}, tet_rule_deg2(), [](const Vec3& x) { return 1.0 + x.y(); });
    // int phi_i (1 + y) = |T|/4 + |T| (sum_j y_j + y_i) / 20
    const double vol = 1.0 / 6.0, ys[4] = {0, 0, 1, 0};
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(b[i], vol / 4.0 + vol * (1.0 + ys[i]) / 20.0, 1e-15);
}
