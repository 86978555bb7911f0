#pragma once

// A posteriori indicators: residual and geometric indicators for the parametric
// method, residual and geometric indicators for the trace method, Doerfler
// marking and the adaptive loop (parametric only).

#include "lbfem/parametric.hpp"
#include "lbfem/trace.hpp"

#include <numeric>

namespace lbfem {

/// Per-element indicator values. Residual indicators combine by l2 sum,
/// geometric ones by max. Empty vectors mean "not computed".
struct IndicatorField {
    std::vector<double> eta;
    std::vector<double> osc;
    std::vector<double> lambda;
    std::vector<double> beta;
    std::vector<double> mu;
    std::vector<double> xi;

    [[nodiscard]] static double l2_total(const std::vector<double>& v)
    {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    }

    [[nodiscard]] static double max_total(const std::vector<double>& v)
    {
        double m = 0.0;
        for (double x : v) m = std::max(m, x);
        return m;
    }

    [[nodiscard]] double eta_total() const { return l2_total(eta); }
    [[nodiscard]] double osc_total() const { return l2_total(osc); }
    [[nodiscard]] double lambda_total() const { return max_total(lambda); }
    [[nodiscard]] double beta_total() const { return max_total(beta); }
    [[nodiscard]] double mu_total() const { return max_total(mu); }
    [[nodiscard]] double xi_total() const { return max_total(xi); }
};

/// Outward co-normal of local edge k (t[k] -> t[k+1]) in the plane of the triangle.
inline Vec3 edge_conormal(const std::array<Vec3, 3>& c, const Vec3& normal, int k)
{
    const Vec3 e = c[(k + 1) % 3] - c[k];
    return e.cross(normal).normalized();
}

/// eta_T^2 = h_T^2 ||F||^2_T + h_T sum_{e in dT} 1/2 |e| J_e^2 with the jump
/// J_e = grad U+ . mu+ + grad U- . mu- (co-normals in each facet's own plane).
/// `forcing` holds F at the triangle quadrature points (stride 6).
inline IndicatorField residual_estimator_parametric(const SurfaceMesh& mesh, const Vector& u,
                                                    const std::vector<double>& forcing)
{
    const QuadratureRule& quad = triangle_rule_deg4();
    const Index nt = mesh.num_triangles();
    LBFEM_THROW_IF(forcing.size() != static_cast<std::size_t>(nt) * quad.size(), ErrorCode::InvalidArgument,
                   "forcing values do not match the mesh");
    std::vector<Vec3> grads(static_cast<std::size_t>(nt));
    for (Index t = 0; t < nt; ++t) {
        const auto g = p1_facet_gradients(mesh.corners(t));
        const Tri& tri = mesh.triangles()[t];
        grads[t] = u[tri[0]] * g[0] + u[tri[1]] * g[1] + u[tri[2]] * g[2];
    }

    std::vector<double> eta2(static_cast<std::size_t>(nt), 0.0);
    IndicatorField out;
    out.osc.resize(static_cast<std::size_t>(nt));
    for (Index t = 0; t < nt; ++t) {
        double f2 = 0.0, fbar = 0.0;
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const double fq = forcing[t * quad.size() + q];
            f2 += quad.unit_weight(q) * fq * fq;
            fbar += quad.unit_weight(q) * fq;
        }
        const double ht = mesh.h(t);
        eta2[t] = ht * ht * f2 * mesh.area(t);
        double osc2 = 0.0;
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const double dq = forcing[t * quad.size() + q] - fbar;
            osc2 += quad.unit_weight(q) * dq * dq;
        }
        out.osc[t] = ht * std::sqrt(osc2 * mesh.area(t));
    }

    for (const MeshEdge& e : mesh.edges()) {
        if (e.count != 2) continue;
        const Index tp = e.tri[0], tm = e.tri[1];
        const Vec3 mp = edge_conormal(mesh.corners(tp), mesh.normal(tp), e.local[0]);
        const Vec3 mm = edge_conormal(mesh.corners(tm), mesh.normal(tm), e.local[1]);
        const double jump = grads[tp].dot(mp) + grads[tm].dot(mm);
        const double len = (mesh.vertices()[e.a] - mesh.vertices()[e.b]).norm();
        const double half = 0.5 * len * jump * jump;
        eta2[tp] += mesh.h(tp) * half;
        eta2[tm] += mesh.h(tm) * half;
    }
    out.eta.resize(eta2.size());
    for (std::size_t t = 0; t < eta2.size(); ++t) out.eta[t] = std::sqrt(eta2[t]);
    return out;
}

/// beta_T = max |P(x) - x|, lambda_T = max ||D_T P(x) - Pi_T||_2 over the 6
/// quadrature nodes and 3 vertices of each facet; mu_T = beta_T + lambda_T^2.
inline IndicatorField geometric_estimators_parametric(const ImplicitSurface& s, const SurfaceMesh& mesh, LiftKind lift)
{
    const Index nt = mesh.num_triangles();
    IndicatorField out;
    out.lambda.assign(static_cast<std::size_t>(nt), 0.0);
    out.beta.assign(static_cast<std::size_t>(nt), 0.0);
    out.mu.assign(static_cast<std::size_t>(nt), 0.0);
    for (Index t = 0; t < nt; ++t) {
        const Vec3& nu = mesh.normal(t);
        const auto [t1, t2] = plane_basis(nu);
        Eigen::Matrix<double, 3, 2> basis;
        basis.col(0) = t1;
        basis.col(1) = t2;
        const double step = parametric_fd_step(mesh.h(t));
        double beta = 0.0, lambda = 0.0;
        for (const Vec3& x : facet_samples(mesh.corners(t))) {
            beta = std::max(beta, (generic_lift(s, lift, x) - x).norm());
            const Eigen::Matrix<double, 3, 2> diff = lift_tangential_jacobian(s, lift, x, nu, step) - basis;
            Eigen::JacobiSVD<Eigen::Matrix<double, 3, 2>> svd(diff);
            lambda = std::max(lambda, svd.singularValues()(0));
        }
        out.beta[t] = beta;
        out.lambda[t] = lambda;
        out.mu[t] = beta + lambda * lambda;
    }
    return out;
}

/// eta_F = h_F ||F_Gamma||_F + h_F^(1/2) ||[grad_Gamma U]||_{dF} and
/// xi_F = ||d||_inf(F) ||K||_inf(P_d F) + ||nu - nu_F||_inf(F)^2.
inline IndicatorField trace_estimators(const CutSurface& cut, const BulkMesh& bulk, const Vector& u_bulk,
                                       const std::vector<double>& forcing, const ImplicitSurface& s)
{
    const QuadratureRule& quad = triangle_rule_deg4();
    const std::size_t nf = cut.faces.size();
    LBFEM_THROW_IF(forcing.size() != nf * quad.size(), ErrorCode::InvalidArgument, "forcing values do not match");
    const auto facets = facets_from_cut(cut, bulk, u_bulk);

    struct Side {
        std::size_t face;
        int local;
    };
    std::unordered_map<std::uint64_t, std::vector<Side>> edge_faces;
    for (std::size_t f = 0; f < nf; ++f)
        for (int k = 0; k < 3; ++k)
            edge_faces[edge_key(cut.faces[f].points[k], cut.faces[f].points[(k + 1) % 3])].push_back({f, k});

    std::vector<double> jump2(nf, 0.0);
    for (const auto& [key, sides] : edge_faces) {
        if (sides.size() != 2) continue;
        double jump = 0.0;
        for (const Side& sd : sides) {
            const Vec3 mu = edge_conormal(cut.corners(sd.face), cut.faces[sd.face].normal, sd.local);
            jump += facets[sd.face].tangential_gradient().dot(mu);
        }
        const auto c = cut.corners(sides[0].face);
        const double len = (c[(sides[0].local + 1) % 3] - c[sides[0].local]).norm();
        for (const Side& sd : sides) jump2[sd.face] += len * jump * jump;
    }

    IndicatorField out;
    out.eta.resize(nf);
    out.xi.resize(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        const CutFace& face = cut.faces[f];
        double f2 = 0.0;
        for (std::size_t q = 0; q < quad.size(); ++q) f2 += quad.unit_weight(q) * forcing[f * quad.size() + q] * forcing[f * quad.size() + q];
        out.eta[f] = face.h * std::sqrt(f2 * face.area) + std::sqrt(face.h) * std::sqrt(jump2[f]);

        double dmax = 0.0, kmax = 0.0, nmax = 0.0;
        for (const Vec3& x : facet_samples(cut.corners(f))) {
            const Footpoint fp = detail::tube_foot(s, x);
            dmax = std::max(dmax, std::abs(fp.distance));
            nmax = std::max(nmax, (fp.normal - face.normal).norm());
            const auto k = detail::tangential_eigenvalues(fp.weingarten, fp.normal);
            kmax = std::max({kmax, std::abs(k[0]), std::abs(k[1])});
        }
        out.xi[f] = dmax * kmax + nmax * nmax;
    }
    return out;
}

/// Smallest set of elements, by decreasing eta^2 (ties by id), whose squared
/// indicators sum to at least theta * total.
inline std::vector<Index> dorfler_mark(const std::vector<double>& eta, double theta)
{
    LBFEM_THROW_IF(eta.empty(), ErrorCode::InvalidArgument, "no indicators to mark");
    LBFEM_THROW_IF(!(theta > 0.0 && theta <= 1.0), ErrorCode::InvalidArgument, "theta must lie in (0, 1]");
    std::vector<Index> order(eta.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return eta[a] * eta[a] > eta[b] * eta[b]; });
    double total = 0.0;
    for (double e : eta) total += e * e;
    std::vector<Index> marked;
    double acc = 0.0;
    for (Index id : order) {
        if (acc >= theta * total) break;
        if (eta[id] == 0.0) break;
        marked.push_back(id);
        acc += eta[id] * eta[id];
    }
    return marked;
}

struct AdaptStep {
    int iteration = 0;
    Index n_dof = 0;
    double h_max = 0.0;
    double err_H1 = 0.0;
    double err_L2 = 0.0;
    double eta = 0.0;
    double lambda = 0.0;
    double beta = 0.0;
    double mu = 0.0;
};

/// solve -> estimate -> mark (Doerfler on eta_T^2) -> bisect, until max_iters
/// refinements or eta below eta_tol.
inline std::vector<AdaptStep> adapt_loop(const ImplicitSurface& s, const SurfaceMesh& initial,
                                         const ManufacturedSolution& solution, double theta, int max_iters,
                                         LiftKind lift = LiftKind::ClosestPoint, double eta_tol = 0.0,
                                         const SolveOptions& opt = {})
{
    LBFEM_THROW_IF(!(theta > 0.0 && theta < 1.0), ErrorCode::InvalidArgument, "theta must lie in (0, 1)");
    std::vector<AdaptStep> history;
    ParametricProblem prob{s, initial, lift, solution};
    for (int it = 0;; ++it) {
        const ParametricResult res = parametric_solve(prob, opt);
        const IndicatorField est = residual_estimator_parametric(prob.mesh, res.field.coefficients, res.forcing);
        const IndicatorField geo = geometric_estimators_parametric(s, prob.mesh, lift);
        history.push_back({it, res.report.n_dof, res.report.h_max, res.report.err_H1, res.report.err_L2,
                           est.eta_total(), geo.lambda_total(), geo.beta_total(), geo.mu_total()});
        if (it >= max_iters || est.eta_total() <= eta_tol) break;
        prob.mesh = refine_bisection(prob.mesh, dorfler_mark(est.eta, theta), s);
    }
    return history;
}

} // namespace lbfem
