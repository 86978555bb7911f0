#pragma once

// Parametric surface FEM: P1 on a polyhedral surface whose vertices lie on the
// exact surface, forcing F = f o P * q / q_Gamma pulled back through a lift P.

#include "lbfem/error_norms.hpp"
#include "lbfem/solver.hpp"

namespace lbfem {

struct ParametricProblem {
    ImplicitSurface surface;
    SurfaceMesh mesh;
    LiftKind lift = LiftKind::ClosestPoint;
    ManufacturedSolution solution;
};

/// True when the lift is the map P_d itself (the radial lift on spheres and tori).
inline bool lift_is_closest_point(const ImplicitSurface& s, LiftKind lift)
{
    return lift == LiftKind::ClosestPoint || s.kind() != SurfaceKind::Ellipsoid;
}

/// Area ratio q / q_Gamma of a lift at x on a facet with normal nu. ClosestPoint
/// uses det(I - dW)(nu . nu_Gamma); other lifts differentiate the lift along two
/// facet-tangential directions with central differences of step fd_step.
inline double lift_area_ratio(const ImplicitSurface& s, LiftKind lift, const Vec3& x, const Vec3& nu,
                              double fd_step)
{
    if (lift_is_closest_point(s, lift)) return area_ratio(s, x, nu);
    const auto [t1, t2] = plane_basis(nu);
    const Vec3 c1 = (generic_lift(s, lift, x + fd_step * t1) - generic_lift(s, lift, x - fd_step * t1)) / (2 * fd_step);
    const Vec3 c2 = (generic_lift(s, lift, x + fd_step * t2) - generic_lift(s, lift, x - fd_step * t2)) / (2 * fd_step);
    return c1.cross(c2).norm();
}

/// Tangential differential D P restricted to the facet plane, as a 3x2 matrix in
/// the basis plane_basis(nu).
inline Eigen::Matrix<double, 3, 2> lift_tangential_jacobian(const ImplicitSurface& s, LiftKind lift, const Vec3& x,
                                                            const Vec3& nu, double fd_step)
{
    const auto [t1, t2] = plane_basis(nu);
    Eigen::Matrix<double, 3, 2> j;
    if (lift_is_closest_point(s, lift)) {
        const DistanceJet jet = distance_jet(s, x);
        const Mat3 dp = tangent_projector(jet.grad) - jet.d * jet.hess;
        j.col(0) = dp * t1;
        j.col(1) = dp * t2;
    } else {
        j.col(0) = (generic_lift(s, lift, x + fd_step * t1) - generic_lift(s, lift, x - fd_step * t1)) / (2 * fd_step);
        j.col(1) = (generic_lift(s, lift, x + fd_step * t2) - generic_lift(s, lift, x - fd_step * t2)) / (2 * fd_step);
    }
    return j;
}

inline double parametric_fd_step(double h) { return 1e-6 * h; }

/// F(x) = f(P(x)) q/q_Gamma(x). `h` sets the finite-difference step for lifts
/// without an analytic Jacobian.
inline double parametric_forcing(const ParametricProblem& p, const Vec3& x, const Vec3& nu, double h)
{
    const Vec3 y = lift_is_closest_point(p.surface, p.lift) ? closest_point(p.surface, x) : generic_lift(p.surface, p.lift, x);
    return p.solution.f(y) * lift_area_ratio(p.surface, p.lift, x, nu, parametric_fd_step(h));
}

struct ParametricResult {
    SolutionField field;
    ErrorReport report;
    SparseMatrix stiffness;
    Vector load; // before deflation
    /// F at the triangle quadrature points, stride triangle_rule_deg4().size().
    std::vector<double> forcing;
};

inline ParametricResult parametric_assemble(const ParametricProblem& p)
{
    const SurfaceMesh& mesh = p.mesh;
    const QuadratureRule& quad = triangle_rule_deg4();
    const Index n = mesh.num_vertices();
    const auto elements = mesh.elements();

    ParametricResult r;
    r.stiffness = assemble_stiffness<3>(n, elements);
    r.load = Vector::Zero(n);
    r.forcing.resize(elements.size() * quad.size());
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const auto& e = elements[t];
        const double ht = mesh.h(t);
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const Vec3 x = barycentric_point<3>(e.vertices, quad.points[q]);
            const double fx = parametric_forcing(p, x, mesh.normal(t), ht);
            r.forcing[t * quad.size() + q] = fx;
            const double w = quad.unit_weight(q) * mesh.area(t) * fx;
            for (int i = 0; i < 3; ++i) r.load[e.dofs[i]] += w * quad.points[q][i];
        }
    }
    r.field.domain = DomainKind::SurfaceMesh;
    r.field.mass = lumped_mass<3>(n, elements);
    r.field.dof_map.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) r.field.dof_map[i] = i;
    return r;
}

/// Assemble, solve on the mean-zero space and measure errors against u o P_d.
inline ParametricResult parametric_solve(const ParametricProblem& p, const SolveOptions& opt = {})
{
    ParametricResult r = parametric_assemble(p);
    const SolveResult sol = solve_mean_zero(r.stiffness, r.load, r.field.mass, opt);
    r.field.coefficients = sol.x;

    const SurfaceErrors err = surface_error_norms(facets_from_surface(p.mesh, sol.x), p.solution, p.surface);
    r.report.h_max = p.mesh.h_max();
    r.report.n_dof = p.mesh.num_vertices();
    r.report.err_L2 = err.err_L2;
    r.report.err_H1 = err.err_H1;
    r.report.iterations = sol.info.iterations;
    return r;
}

} // namespace lbfem
