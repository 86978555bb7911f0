#pragma once

#include "lbfem/core.hpp"

#include <array>
#include <vector>

namespace lbfem {

enum class SimplexDomain { Triangle, Tetrahedron };

/// Quadrature on the reference simplex in barycentric form. Weights sum to the
/// reference measure (1/2 for the triangle, 1/6 for the tetrahedron).
struct QuadratureRule {
    SimplexDomain domain = SimplexDomain::Triangle;
    int degree = 0;
    std::vector<std::array<double, 4>> points; // barycentric; 4th entry 0 on triangles
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const noexcept { return weights.size(); }

    [[nodiscard]] double reference_measure() const noexcept
    {
        return domain == SimplexDomain::Triangle ? 0.5 : 1.0 / 6.0;
    }

    /// Weight relative to the element measure: sum over q equals 1.
    [[nodiscard]] double unit_weight(std::size_t q) const noexcept { return weights[q] / reference_measure(); }
};

namespace detail {

inline void add_orbit3(QuadratureRule& r, double a, double w)
{
    const double b = 1.0 - 2.0 * a;
    r.points.push_back({b, a, a, 0.0});
    r.points.push_back({a, b, a, 0.0});
    r.points.push_back({a, a, b, 0.0});
    for (int i = 0; i < 3; ++i) r.weights.push_back(w);
}

inline void add_orbit4(QuadratureRule& r, double a, double w)
{
    const double b = 1.0 - 3.0 * a;
    r.points.push_back({b, a, a, a});
    r.points.push_back({a, b, a, a});
    r.points.push_back({a, a, b, a});
    r.points.push_back({a, a, a, b});
    for (int i = 0; i < 4; ++i) r.weights.push_back(w);
}

inline void add_orbit6(QuadratureRule& r, double a, double w)
{
    const double b = 0.5 - a;
    r.points.push_back({a, a, b, b});
    r.points.push_back({a, b, a, b});
    r.points.push_back({a, b, b, a});
    r.points.push_back({b, a, a, b});
    r.points.push_back({b, a, b, a});
    r.points.push_back({b, b, a, a});
    for (int i = 0; i < 6; ++i) r.weights.push_back(w);
}

} // namespace detail

/// 6-point rule, exact for degree 4 (Dunavant).
inline const QuadratureRule& triangle_rule_deg4()
{
    static const QuadratureRule rule = [] {
        QuadratureRule r;
        r.domain = SimplexDomain::Triangle;
        r.degree = 4;
        detail::add_orbit3(r, 0.44594849091596488632, 0.5 * 0.22338158967801146570);
        detail::add_orbit3(r, 0.091576213509770743460, 0.5 * 0.10995174365532186764);
        return r;
    }();
    return rule;
}

/// 4-point rule, exact for degree 2.
inline const QuadratureRule& tet_rule_deg2()
{
    static const QuadratureRule rule = [] {
        QuadratureRule r;
        r.domain = SimplexDomain::Tetrahedron;
        r.degree = 2;
        detail::add_orbit4(r, (5.0 - std::sqrt(5.0)) / 20.0, 1.0 / 24.0);
        return r;
    }();
    return rule;
}

/// 14-point rule with positive weights, exact for degree 5.
inline const QuadratureRule& tet_rule_deg5()
{
    static const QuadratureRule rule = [] {
        QuadratureRule r;
        r.domain = SimplexDomain::Tetrahedron;
        r.degree = 5;
        detail::add_orbit4(r, 0.31088591926330060980, 0.018781320953002641800);
        detail::add_orbit4(r, 0.092735250310891226402, 0.012248840519393658257);
        detail::add_orbit6(r, 0.045503704125649649492, 0.0070910034628469110730);
        return r;
    }();
    return rule;
}

} // namespace lbfem
