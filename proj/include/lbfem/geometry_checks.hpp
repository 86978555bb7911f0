#pragma once

// Randomized property suite for the distance-function geometry. Every check
// compares against an independent route: unit-length and orthogonality of the
// analytic jet, idempotence of P_d, finite-difference Hessians for the
// parallel-curvature identity and finite-difference Jacobians of P_d for the
// area ratio.

#include "lbfem/geometry.hpp"

#include <random>
#include <string>
#include <vector>

namespace lbfem {

struct PropertyCheck {
    std::string name;
    double max_error = 0.0;
    double tolerance = 0.0;
    [[nodiscard]] bool passed() const { return max_error < tolerance; }
};

/// Random point on the surface.
inline Vec3 sample_surface_point(const ImplicitSurface& s, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    if (s.kind() == SurfaceKind::Torus) {
        const double ph = 2.0 * kPi * uni(rng);
        const double th = 2.0 * kPi * uni(rng);
        const double ring = s.major_radius() + s.minor_radius() * std::cos(th);
        return {ring * std::cos(ph), ring * std::sin(ph), s.minor_radius() * std::sin(th)};
    }
    std::normal_distribution<double> gauss;
    Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
    while (dir.norm() < 1e-8) dir = Vec3(gauss(rng), gauss(rng), gauss(rng));
    return scaled_radial_lift(s, dir.normalized());
}

/// Random point of the tube at signed distance in (-0.9, 0.9) * tube half-width.
inline Vec3 sample_tube_point(const ImplicitSurface& s, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> off(-0.9, 0.9);
    const Vec3 y = sample_surface_point(s, rng);
    const Vec3 n = detail::foot(s, y).normal;
    return y + off(rng) * s.tube_half_width() * n;
}

/// Central finite-difference Hessian of d from the analytic gradient.
inline Mat3 fd_hessian(const ImplicitSurface& s, const Vec3& x)
{
    const double step = 1e-5 * (1.0 + x.norm());
    Mat3 h;
    for (int k = 0; k < 3; ++k) {
        Vec3 e = Vec3::Zero();
        e[k] = step;
        h.col(k) = (distance_jet(s, x + e).grad - distance_jet(s, x - e).grad) / (2.0 * step);
    }
    return 0.5 * (h + h.transpose());
}

/// Area factor of P_d restricted to the plane orthogonal to nu, by central differences.
inline double fd_projection_area_factor(const ImplicitSurface& s, const Vec3& x, const Vec3& nu, double step = 1e-6)
{
    const auto [t1, t2] = plane_basis(nu);
    const Vec3 c1 = (closest_point(s, x + step * t1) - closest_point(s, x - step * t1)) / (2.0 * step);
    const Vec3 c2 = (closest_point(s, x + step * t2) - closest_point(s, x - step * t2)) / (2.0 * step);
    return c1.cross(c2).norm();
}

inline std::vector<PropertyCheck> check_geometry(const ImplicitSurface& s, int n_points, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    PropertyCheck unit{"|grad d| - 1", 0.0, 1e-10};
    PropertyCheck ortho{"|D2d grad d|", 0.0, 1e-8};
    PropertyCheck idem{"P_d idempotence", 0.0, 1e-12};
    PropertyCheck dist{"|x - P_d x| - |d|", 0.0, 1e-10};
    PropertyCheck kappa{"parallel curvatures (relative)", 0.0, 1e-6};
    PropertyCheck ratio{"area ratio vs Jacobian (relative)", 0.0, 1e-4};

    for (int i = 0; i < n_points; ++i) {
        const Vec3 x = sample_tube_point(s, rng);
        const DistanceJet jet = distance_jet(s, x);
        unit.max_error = std::max(unit.max_error, std::abs(jet.grad.norm() - 1.0));
        ortho.max_error = std::max(ortho.max_error, (jet.hess * jet.grad).norm());

        const Vec3 p = closest_point(s, x);
        idem.max_error = std::max(idem.max_error, (closest_point(s, p) - p).norm());
        dist.max_error = std::max(dist.max_error, std::abs((x - p).norm() - std::abs(jet.d)));

        const auto k_foot = principal_curvatures(s, p);
        const auto k_fd = detail::tangential_eigenvalues(fd_hessian(s, x), jet.grad);
        std::array<double, 2> expect{k_foot[0] / (1.0 + jet.d * k_foot[0]), k_foot[1] / (1.0 + jet.d * k_foot[1])};
        if (expect[0] < expect[1]) std::swap(expect[0], expect[1]);
        for (int j = 0; j < 2; ++j)
            kappa.max_error = std::max(kappa.max_error, std::abs(k_fd[j] - expect[j]) / std::max(1.0, std::abs(expect[j])));

        // tilt the facet normal by up to 0.5 rad about a random tangent axis
        const auto [t1, t2] = plane_basis(jet.grad);
        const double phi = 2.0 * kPi * uni(rng);
        const Vec3 axis = std::cos(phi) * t1 + std::sin(phi) * t2;
        const double tilt = 0.5 * uni(rng);
        const Vec3 nu_gamma = Eigen::AngleAxisd(tilt, axis) * jet.grad;
        const double q = area_ratio(s, x, nu_gamma);
        const double q_fd = fd_projection_area_factor(s, x, nu_gamma);
        ratio.max_error = std::max(ratio.max_error, std::abs(q - q_fd) / q_fd);
    }
    return {unit, ortho, idem, dist, kappa, ratio};
}

} // namespace lbfem
