#pragma once

// Narrow band FEM: bulk P1 Laplacian on N_h(delta) = {|d_h| < delta} with the
// mean-corrected forcing F = f o M_h - mean(f o M_h).
//
// Band integrals run over each band tetrahedron clipped to |d_h| < delta.

#include "lbfem/error_norms.hpp"
#include "lbfem/solver.hpp"

#include <memory>

namespace lbfem {

struct NarrowBandProblem {
    ImplicitSurface surface;
    std::shared_ptr<const BulkMesh> bulk;
    BandMesh band;
    double delta = 0.0;
    ManufacturedSolution solution;
};

/// Interpolation constant used in the admissibility check delta + c_I |d|_{W2,inf} h^2 <= 1/(2 K_inf).
inline constexpr double kInterpolationConstant = 0.5;

inline void check_band_admissible(const ImplicitSurface& s, double delta, double h)
{
    // |D^2 d| <= K / (1 - |d| K) <= 2 K_inf inside the tube
    const double w2 = 2.0 * s.max_curvature();
    LBFEM_THROW_IF(!(delta + kInterpolationConstant * w2 * h * h <= s.tube_half_width()), ErrorCode::OutsideTube,
                   "band delta=" + std::to_string(delta) + " with h=" + std::to_string(h) +
                       " leaves the tube; refine the bulk mesh");
}

inline NarrowBandProblem make_narrowband_problem(const ImplicitSurface& s, double box_half_width, int cells_per_axis,
                                                 double delta_over_h, ManufacturedSolution solution)
{
    auto bulk = std::make_shared<const BulkMesh>(build_bulk_mesh(s, box_half_width, cells_per_axis));
    const double delta = delta_over_h * bulk->h();
    check_delta_window(delta, bulk->h());
    check_band_admissible(s, delta, bulk->h());
    BandMesh band = extract_band(*bulk, s, delta);
    return {s, std::move(bulk), std::move(band), delta, std::move(solution)};
}

/// M_h(x) = x + (d_h(x) - d(x)) grad d(x).
inline Vec3 mismatch_map(const ImplicitSurface& s, double d_h_value, const Vec3& x)
{
    const DistanceJet jet = distance_jet(s, x);
    return x + (d_h_value - jet.d) * jet.grad;
}

/// Forcing at the band quadrature points.
struct BandForcing {
    std::vector<BandPoint> points;
    std::vector<double> values;  // f o M_h - mean at each point
    std::vector<double> weights; // quadrature weight of each point
    double raw_integral = 0.0;   // integral of f o M_h
    double measure = 0.0;        // |N_h(delta)|
    double mean = 0.0;           // raw_integral / measure
};

inline BandForcing narrowband_forcing(const NarrowBandProblem& p)
{
    BandForcing out;
    out.points = band_quadrature(*p.bulk, p.band);
    out.values.resize(out.points.size());
    out.weights.resize(out.points.size());
    for (std::size_t i = 0; i < out.points.size(); ++i) {
        const BandPoint& bp = out.points[i];
        const Vec3 m = mismatch_map(p.surface, bp.d_h, bp.x);
        // f extends the surface forcing constantly along normals
        const double fx = p.solution.f(closest_point(p.surface, m));
        out.values[i] = fx;
        out.weights[i] = bp.weight;
        out.raw_integral += bp.weight * fx;
        out.measure += bp.weight;
    }
    LBFEM_THROW_IF(!(out.measure > 0.0), ErrorCode::EmptyBand, "the band has zero measure");
    out.mean = out.raw_integral / out.measure;
    for (double& v : out.values) v -= out.mean;
    return out;
}

struct NarrowBandResult {
    SolutionField field;
    ErrorReport band_report;  // err_H1 = ||grad(u o P_d - U)||_{L2(N_h(delta))}
    ErrorReport gamma_report; // errors on the cut surface inside the band
    SparseMatrix stiffness;
    Vector load;
    BandForcing forcing;
};

inline NarrowBandResult narrowband_assemble(const NarrowBandProblem& p)
{
    const BulkMesh& bulk = *p.bulk;
    std::vector<Index> local(static_cast<std::size_t>(bulk.num_vertices()), -1);
    for (std::size_t i = 0; i < p.band.active_vertices.size(); ++i)
        local[p.band.active_vertices[i]] = static_cast<Index>(i);
    const Index n = static_cast<Index>(p.band.active_vertices.size());

    NarrowBandResult r;
    r.forcing = narrowband_forcing(p);
    r.load = Vector::Zero(n);
    r.field.mass = Vector::Zero(n);
    std::vector<double> vol_in(p.band.tets.size(), 0.0);
    for (std::size_t i = 0; i < r.forcing.points.size(); ++i) {
        const BandPoint& bp = r.forcing.points[i];
        const Tet& tet = bulk.tets()[p.band.tets[bp.slot]];
        vol_in[bp.slot] += bp.weight;
        for (int a = 0; a < 4; ++a) {
            r.load[local[tet[a]]] += bp.weight * r.forcing.values[i] * bp.lambda[a];
            r.field.mass[local[tet[a]]] += bp.weight * bp.lambda[a];
        }
    }
    std::vector<Triplet> trip;
    trip.reserve(p.band.tets.size() * 16);
    for (std::size_t k = 0; k < p.band.tets.size(); ++k) {
        if (!(vol_in[k] > 0.0)) continue;
        const Index t = p.band.tets[k];
        const Tet& tet = bulk.tets()[t];
        std::array<Index, 4> dofs{};
        for (int i = 0; i < 4; ++i) dofs[i] = local[tet[i]];
        add_element_stiffness<4>(trip, p1_tet_gradients(bulk.corners(t)), dofs, vol_in[k]);
    }
    r.stiffness = SparseMatrix::from_triplets(n, std::move(trip));
    r.field.domain = DomainKind::BandMesh;
    r.field.dof_map = p.band.active_vertices;
    return r;
}

inline NarrowBandResult narrowband_solve(const NarrowBandProblem& p, const SolveOptions& opt = {})
{
    NarrowBandResult r = narrowband_assemble(p);
    const SolveResult sol = solve_mean_zero(r.stiffness, r.load, r.field.mass, opt);
    r.field.coefficients = sol.x;
    const BulkMesh& bulk = *p.bulk;
    const Vector full = r.field.scatter(bulk.num_vertices());

    // band norms against u o P_d, whose gradient is (I - d D^2 d) grad_gamma u
    std::vector<Vec3> grad_u(p.band.tets.size());
    for (std::size_t k = 0; k < p.band.tets.size(); ++k) {
        const Tet& tet = bulk.tets()[p.band.tets[k]];
        const auto g = p1_tet_gradients(bulk.corners(p.band.tets[k]));
        grad_u[k] = Vec3::Zero();
        for (int i = 0; i < 4; ++i) grad_u[k] += full[tet[i]] * g[i];
    }
    double h1 = 0.0, sw = 0.0, swe = 0.0;
    std::vector<double> e, w;
    e.reserve(r.forcing.points.size());
    w.reserve(r.forcing.points.size());
    for (const BandPoint& bp : r.forcing.points) {
        const Tet& tet = bulk.tets()[p.band.tets[bp.slot]];
        const DistanceJet jet = distance_jet(p.surface, bp.x);
        const Vec3 gg = p.solution.grad_gamma_u(jet.foot);
        const Vec3 g_exact = gg - jet.d * (jet.hess * gg);
        h1 += bp.weight * (g_exact - grad_u[bp.slot]).squaredNorm();
        double uh = 0.0;
        for (int i = 0; i < 4; ++i) uh += bp.lambda[i] * full[tet[i]];
        e.push_back(p.solution.u(jet.foot) - uh);
        w.push_back(bp.weight);
        sw += bp.weight;
        swe += bp.weight * e.back();
    }
    double l2 = 0.0;
    const double mean = sw > 0.0 ? swe / sw : 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) l2 += w[i] * (e[i] - mean) * (e[i] - mean);

    r.band_report.h_max = bulk.h();
    r.band_report.n_dof = static_cast<Index>(r.field.dof_map.size());
    r.band_report.err_L2 = std::sqrt(l2);
    r.band_report.err_H1 = std::sqrt(h1);
    r.band_report.iterations = sol.info.iterations;

    const CutSurface cut = extract_cut_surface(bulk, p.surface);
    const SurfaceErrors se = surface_error_norms(facets_from_cut(cut, bulk, full), p.solution, p.surface);
    r.gamma_report = r.band_report;
    r.gamma_report.err_L2 = se.err_L2;
    r.gamma_report.err_H1 = se.err_H1;
    return r;
}

} // namespace lbfem
