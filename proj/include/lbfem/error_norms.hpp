#pragma once

#include "lbfem/bulk_mesh.hpp"
#include "lbfem/manufactured.hpp"
#include "lbfem/sparse.hpp"
#include "lbfem/surface_mesh.hpp"

#include <optional>
#include <vector>

namespace lbfem {

enum class DomainKind { SurfaceMesh, CutSurface, BandMesh };

/// Discrete solution: one coefficient per active DOF, dof_map[i] is the mesh
/// vertex (surface or bulk) carrying DOF i.
struct SolutionField {
    Vector coefficients;
    std::vector<Index> dof_map;
    DomainKind domain = DomainKind::SurfaceMesh;
    Vector mass; // lumped mass used for the mean-zero constraint

    [[nodiscard]] double weighted_mean() const
    {
        const double m = mass.sum();
        return m > 0.0 ? mass.dot(coefficients) / m : 0.0;
    }

    /// Coefficients scattered to a vector over all mesh vertices (zeros elsewhere).
    [[nodiscard]] Vector scatter(Index n_vertices) const
    {
        Vector full = Vector::Zero(n_vertices);
        for (std::size_t i = 0; i < dof_map.size(); ++i) full[dof_map[i]] = coefficients[static_cast<Index>(i)];
        return full;
    }
};

/// Per-run numbers; estimator totals are filled when computed.
struct ErrorReport {
    double h_max = 0.0;
    Index n_dof = 0;
    double err_L2 = 0.0;
    double err_H1 = 0.0;
    Index iterations = 0;
    std::optional<double> eta;
    std::optional<double> osc;
    std::optional<double> lambda;
    std::optional<double> beta;
    std::optional<double> mu;
    std::optional<double> xi;
};

/// A flat triangle carrying an affine function U(x) = value + gradient . (x - origin).
/// Surface P1 functions and traces of bulk P1 functions both have this form.
struct AffineFacet {
    std::array<Vec3, 3> corners;
    Vec3 normal;
    double area = 0.0;
    Vec3 origin;
    double value = 0.0;
    Vec3 gradient;

    [[nodiscard]] double eval(const Vec3& x) const { return value + gradient.dot(x - origin); }
    [[nodiscard]] Vec3 tangential_gradient() const { return gradient - normal.dot(gradient) * normal; }
};

inline std::vector<AffineFacet> facets_from_surface(const SurfaceMesh& mesh, const Vector& u_vertices)
{
    std::vector<AffineFacet> out;
    out.reserve(static_cast<std::size_t>(mesh.num_triangles()));
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const auto c = mesh.corners(t);
        const auto g = p1_facet_gradients(c);
        const Tri& tri = mesh.triangles()[t];
        Vec3 grad = Vec3::Zero();
        for (int i = 0; i < 3; ++i) grad += u_vertices[tri[i]] * g[i];
        out.push_back({c, mesh.normal(t), mesh.area(t), c[0], u_vertices[tri[0]], grad});
    }
    return out;
}

/// Trace on the cut faces of a bulk P1 function given at all bulk vertices.
inline std::vector<AffineFacet> facets_from_cut(const CutSurface& cut, const BulkMesh& bulk, const Vector& u_bulk)
{
    std::vector<AffineFacet> out;
    out.reserve(cut.faces.size());
    for (std::size_t f = 0; f < cut.faces.size(); ++f) {
        const CutFace& face = cut.faces[f];
        const Tet& tet = bulk.tets()[face.tet];
        const auto c = bulk.corners(face.tet);
        const auto g = p1_tet_gradients(c);
        Vec3 grad = Vec3::Zero();
        for (int i = 0; i < 4; ++i) grad += u_bulk[tet[i]] * g[i];
        out.push_back({cut.corners(f), face.normal, face.area, c[0], u_bulk[tet[0]], grad});
    }
    return out;
}

struct SurfaceErrors {
    double err_L2 = 0.0;
    double err_H1 = 0.0;
    double mean_offset = 0.0; // Gamma-mean of u o P_d - U
};

/// L2 (mean-normalized) and H1-seminorm errors of U against u o P_d on a
/// polyhedral surface. The exact gradient is lifted with Pi_Gamma (I - d W) Pi.
inline SurfaceErrors surface_error_norms(const std::vector<AffineFacet>& facets, const ManufacturedSolution& exact,
                                         const ImplicitSurface& s, const QuadratureRule& quad = triangle_rule_deg4())
{
    std::vector<double> e;
    std::vector<double> w;
    e.reserve(facets.size() * quad.size());
    w.reserve(facets.size() * quad.size());
    double h1 = 0.0;
    for (const AffineFacet& f : facets) {
        const Vec3 grad_h = f.tangential_gradient();
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const Vec3 x = barycentric_point<3>(f.corners, quad.points[q]);
            const double wq = quad.unit_weight(q) * f.area;
            const Vec3 y = closest_point(s, x);
            e.push_back(exact.u(y) - f.eval(x));
            w.push_back(wq);
            const Vec3 g_exact = lifted_tangential_gradient(s, x, f.normal, exact.grad_gamma_u(y));
            h1 += wq * (g_exact - grad_h).squaredNorm();
        }
    }
    double sw = 0.0, swe = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        sw += w[i];
        swe += w[i] * e[i];
    }
    SurfaceErrors out;
    out.mean_offset = sw > 0.0 ? swe / sw : 0.0;
    double l2 = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) l2 += w[i] * (e[i] - out.mean_offset) * (e[i] - out.mean_offset);
    out.err_L2 = std::sqrt(l2);
    out.err_H1 = std::sqrt(h1);
    return out;
}

} // namespace lbfem
