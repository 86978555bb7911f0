#pragma once

// P1 shape function gradients on triangles embedded in R^3 and on tetrahedra,
// and the generic stiffness / load assembly over such elements.

#include "lbfem/quadrature.hpp"
#include "lbfem/sparse.hpp"

#include <array>
#include <functional>
#include <vector>

namespace lbfem {

template <std::size_t N>
struct P1Element {
    std::array<Vec3, N> vertices;
    std::array<Index, N> dofs;
};

using TriangleElement = P1Element<3>;
using TetElement = P1Element<4>;

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c)
{
    return 0.5 * (b - a).cross(c - a).norm();
}

inline Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c)
{
    return (b - a).cross(c - a).normalized();
}

inline double tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d)
{
    return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

/// Tangential gradients of the three barycentric hat functions of a triangle.
inline std::array<Vec3, 3> p1_facet_gradients(const std::array<Vec3, 3>& v)
{
    const Vec3 cross = (v[1] - v[0]).cross(v[2] - v[0]);
    const double twice_area = cross.norm();
    const double h = std::max({(v[1] - v[0]).norm(), (v[2] - v[1]).norm(), (v[0] - v[2]).norm()});
    LBFEM_THROW_IF(!(0.5 * twice_area >= 1e-14 * h * h) || h == 0.0, ErrorCode::DegenerateSimplex,
                   "degenerate triangle");
    const Vec3 n = cross / twice_area;
    return {n.cross(v[2] - v[1]) / twice_area, n.cross(v[0] - v[2]) / twice_area,
            n.cross(v[1] - v[0]) / twice_area};
}

/// Gradients of the four barycentric hat functions of a tetrahedron.
inline std::array<Vec3, 4> p1_tet_gradients(const std::array<Vec3, 4>& v)
{
    Mat3 jac;
    jac.col(0) = v[1] - v[0];
    jac.col(1) = v[2] - v[0];
    jac.col(2) = v[3] - v[0];
    double h = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) h = std::max(h, (v[i] - v[j]).norm());
    LBFEM_THROW_IF(!(std::abs(jac.determinant()) / 6.0 >= 1e-14 * h * h * h) || h == 0.0,
                   ErrorCode::DegenerateSimplex, "degenerate tetrahedron");
    const Mat3 inv = jac.inverse();
    std::array<Vec3, 4> g;
    g[1] = inv.row(0).transpose();
    g[2] = inv.row(1).transpose();
    g[3] = inv.row(2).transpose();
    g[0] = -(g[1] + g[2] + g[3]);
    return g;
}

template <std::size_t N>
std::array<Vec3, N> p1_gradients(const std::array<Vec3, N>& v)
{
    if constexpr (N == 3) return p1_facet_gradients(v);
    else return p1_tet_gradients(v);
}

template <std::size_t N>
double simplex_measure(const std::array<Vec3, N>& v)
{
    if constexpr (N == 3) return triangle_area(v[0], v[1], v[2]);
    else return std::abs(tet_signed_volume(v[0], v[1], v[2], v[3]));
}

/// Adds measure * g_i . g_j for every local pair.
template <std::size_t N>
void add_element_stiffness(std::vector<Triplet>& out, const std::array<Vec3, N>& grads,
                           const std::array<Index, N>& dofs, double measure)
{
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) out.push_back({dofs[i], dofs[j], measure * grads[i].dot(grads[j])});
}

template <std::size_t N>
SparseMatrix assemble_stiffness(Index n_dofs, const std::vector<P1Element<N>>& elements)
{
    std::vector<Triplet> trip;
    trip.reserve(elements.size() * N * N);
    for (const auto& e : elements) add_element_stiffness<N>(trip, p1_gradients<N>(e.vertices), e.dofs,
                                                            simplex_measure<N>(e.vertices));
    return SparseMatrix::from_triplets(n_dofs, std::move(trip));
}

template <std::size_t N>
Vec3 barycentric_point(const std::array<Vec3, N>& v, const std::array<double, 4>& lambda)
{
    Vec3 x = Vec3::Zero();
    for (std::size_t i = 0; i < N; ++i) x += lambda[i] * v[i];
    return x;
}

/// b_i = sum_T sum_q w_q F(x_q) phi_i(x_q).
template <std::size_t N>
Vector assemble_load(Index n_dofs, const std::vector<P1Element<N>>& elements, const QuadratureRule& quad,
                     const std::function<double(const Vec3&)>& forcing)
{
    LBFEM_THROW_IF((N == 3) != (quad.domain == SimplexDomain::Triangle), ErrorCode::InvalidArgument,
                   "quadrature domain does not match element type");
    Vector b = Vector::Zero(n_dofs);
    for (const auto& e : elements) {
        const double meas = simplex_measure<N>(e.vertices);
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const double fx = forcing(barycentric_point<N>(e.vertices, quad.points[q]));
            const double w = quad.unit_weight(q) * meas * fx;
            for (std::size_t i = 0; i < N; ++i) b[e.dofs[i]] += w * quad.points[q][i];
        }
    }
    return b;
}

/// Row sums of the consistent mass: sum_T |T| / (N) per vertex.
template <std::size_t N>
Vector lumped_mass(Index n_dofs, const std::vector<P1Element<N>>& elements)
{
    Vector m = Vector::Zero(n_dofs);
    for (const auto& e : elements) {
        const double share = simplex_measure<N>(e.vertices) / static_cast<double>(N);
        for (std::size_t i = 0; i < N; ++i) m[e.dofs[i]] += share;
    }
    return m;
}

} // namespace lbfem
