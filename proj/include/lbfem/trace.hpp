#pragma once

// Trace (cut) FEM: the bulk P1 space restricted to the zero set of d_h.

#include "lbfem/error_norms.hpp"
#include "lbfem/solver.hpp"

#include <memory>

namespace lbfem {

struct TraceProblem {
    ImplicitSurface surface;
    std::shared_ptr<const BulkMesh> bulk;
    CutSurface cut;
    ManufacturedSolution solution;
};

inline TraceProblem make_trace_problem(const ImplicitSurface& s, double box_half_width, int cells_per_axis,
                                       ManufacturedSolution solution)
{
    auto bulk = std::make_shared<const BulkMesh>(build_bulk_mesh(s, box_half_width, cells_per_axis));
    CutSurface cut = extract_cut_surface(*bulk, s);
    LBFEM_THROW_IF(cut.faces.empty(), ErrorCode::InvalidArgument, "the surface does not cut the bulk mesh");
    return {s, std::move(bulk), std::move(cut), std::move(solution)};
}

/// F_Gamma(x) = q/q_Gamma(x) f(P_d x).
inline double trace_forcing(const TraceProblem& p, const Vec3& x, const Vec3& nu_face)
{
    return area_ratio(p.surface, x, nu_face) * p.solution.f(closest_point(p.surface, x));
}

/// max over face samples of |d| and |nu - nu_F|.
struct GeometricResolution {
    double max_distance = 0.0;
    double max_normal_deviation = 0.0;
};

struct TraceResult {
    SolutionField field;
    ErrorReport report;
    SparseMatrix stiffness;
    Vector load;
    /// F_Gamma at the face quadrature points, stride triangle_rule_deg4().size().
    std::vector<double> forcing;
    GeometricResolution resolution;
};

/// Samples used for sup-norms on a triangle: the 6 quadrature nodes and 3 vertices.
inline std::vector<Vec3> facet_samples(const std::array<Vec3, 3>& c)
{
    const QuadratureRule& quad = triangle_rule_deg4();
    std::vector<Vec3> out;
    out.reserve(quad.size() + 3);
    for (std::size_t q = 0; q < quad.size(); ++q) out.push_back(barycentric_point<3>(c, quad.points[q]));
    out.insert(out.end(), c.begin(), c.end());
    return out;
}

inline GeometricResolution geometric_resolution(const CutSurface& cut, const ImplicitSurface& s)
{
    GeometricResolution g;
    for (std::size_t f = 0; f < cut.faces.size(); ++f) {
        for (const Vec3& x : facet_samples(cut.corners(f))) {
            const DistanceJet jet = distance_jet(s, x);
            g.max_distance = std::max(g.max_distance, std::abs(jet.d));
            g.max_normal_deviation = std::max(g.max_normal_deviation, (jet.grad - cut.faces[f].normal).norm());
        }
    }
    return g;
}

inline TraceResult trace_assemble(const TraceProblem& p)
{
    const BulkMesh& bulk = *p.bulk;
    const CutSurface& cut = p.cut;
    const QuadratureRule& quad = triangle_rule_deg4();

    std::vector<Index> local(static_cast<std::size_t>(bulk.num_vertices()), -1);
    for (std::size_t i = 0; i < cut.active_vertices.size(); ++i) local[cut.active_vertices[i]] = static_cast<Index>(i);
    const Index n = static_cast<Index>(cut.active_vertices.size());

    TraceResult r;
    r.load = Vector::Zero(n);
    r.field.mass = Vector::Zero(n);
    r.forcing.resize(cut.faces.size() * quad.size());
    std::vector<Triplet> trip;
    trip.reserve(cut.faces.size() * 16);
    for (std::size_t f = 0; f < cut.faces.size(); ++f) {
        const CutFace& face = cut.faces[f];
        const Tet& tet = bulk.tets()[face.tet];
        const auto tc = bulk.corners(face.tet);
        const auto g = p1_tet_gradients(tc);
        std::array<Vec3, 4> gp;
        std::array<Index, 4> dofs{};
        for (int i = 0; i < 4; ++i) {
            gp[i] = g[i] - face.normal.dot(g[i]) * face.normal;
            dofs[i] = local[tet[i]];
        }
        add_element_stiffness<4>(trip, gp, dofs, face.area);

        const auto fc = cut.corners(f);
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const Vec3 x = barycentric_point<3>(fc, quad.points[q]);
            const double fx = trace_forcing(p, x, face.normal);
            r.forcing[f * quad.size() + q] = fx;
            const double wq = quad.unit_weight(q) * face.area;
            for (int i = 0; i < 4; ++i) {
                const double phi = (i == 0 ? 1.0 : 0.0) + g[i].dot(x - tc[0]);
                r.load[dofs[i]] += wq * fx * phi;
                r.field.mass[dofs[i]] += wq * phi;
            }
        }
    }
    r.stiffness = SparseMatrix::from_triplets(n, std::move(trip));
    r.field.domain = DomainKind::CutSurface;
    r.field.dof_map = cut.active_vertices;
    return r;
}

inline TraceResult trace_solve(const TraceProblem& p, const SolveOptions& opt = {})
{
    TraceResult r = trace_assemble(p);
    const SolveResult sol = solve_mean_zero(r.stiffness, r.load, r.field.mass, opt);
    r.field.coefficients = sol.x;
    const Vector full = r.field.scatter(p.bulk->num_vertices());
    const SurfaceErrors err = surface_error_norms(facets_from_cut(p.cut, *p.bulk, full), p.solution, p.surface);
    r.report.h_max = p.bulk->h();
    r.report.n_dof = static_cast<Index>(r.field.dof_map.size());
    r.report.err_L2 = err.err_L2;
    r.report.err_H1 = err.err_H1;
    r.report.iterations = sol.info.iterations;
    r.resolution = geometric_resolution(p.cut, p.surface);
    return r;
}

/// Fraction of sampled segments x -> P_d(x) (face quadrature points, 5 samples each)
/// lying entirely in cut tetrahedra.
inline double skin_layer_containment(const TraceProblem& p)
{
    const QuadratureRule& quad = triangle_rule_deg4();
    std::size_t inside = 0, total = 0;
    for (std::size_t f = 0; f < p.cut.faces.size(); ++f) {
        const auto fc = p.cut.corners(f);
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const Vec3 x = barycentric_point<3>(fc, quad.points[q]);
            const Vec3 y = closest_point(p.surface, x);
            bool ok = true;
            for (int k = 0; k <= 4 && ok; ++k) {
                const Vec3 z = x + 0.25 * k * (y - x);
                ok = std::binary_search(p.cut.cut_tets.begin(), p.cut.cut_tets.end(), p.bulk->locate(z));
            }
            inside += ok ? 1 : 0;
            ++total;
        }
    }
    return total ? static_cast<double>(inside) / static_cast<double>(total) : 1.0;
}

} // namespace lbfem
