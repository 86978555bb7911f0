#pragma once

#include "lbfem/geometry.hpp"

#include <functional>
#include <string>

namespace lbfem {

/// Exact solution u of -Lap_gamma u = f with zero surface mean, its tangential
/// gradient, and the forcing. All three are evaluated at points of the surface.
struct ManufacturedSolution {
    std::string name;
    std::function<double(const Vec3&)> u;
    std::function<Vec3(const Vec3&)> grad_gamma_u;
    std::function<double(const Vec3&)> f;

    /// Same u scaled by s (forcing scales linearly).
    [[nodiscard]] ManufacturedSolution scaled(double s) const
    {
        ManufacturedSolution m = *this;
        m.name = name + "*" + std::to_string(s);
        m.u = [u = u, s](const Vec3& x) { return s * u(x); };
        m.grad_gamma_u = [g = grad_gamma_u, s](const Vec3& x) -> Vec3 { return s * g(x); };
        m.f = [f = f, s](const Vec3& x) { return s * f(x); };
        return m;
    }
};

inline ManufacturedSolution zero_solution()
{
    return {"zero",
            [](const Vec3&) { return 0.0; },
            [](const Vec3&) -> Vec3 { return Vec3::Zero(); },
            [](const Vec3&) { return 0.0; }};
}

/// Forcing only; u is unknown (used for forcing/transport checks).
inline ManufacturedSolution forcing_only(std::string name, std::function<double(const Vec3&)> f)
{
    return {std::move(name),
            [](const Vec3&) { return 0.0; },
            [](const Vec3&) -> Vec3 { return Vec3::Zero(); },
            std::move(f)};
}

namespace detail {

// u = xyz restricted to the surface. For an ambient extension v,
// Lap_gamma v = Lap v - nu^T D^2 v nu - (grad v . nu) H with H = tr W.
inline ManufacturedSolution xyz_solution(const ImplicitSurface& s)
{
    ManufacturedSolution m;
    m.name = "xyz";
    m.u = [](const Vec3& x) { return x.x() * x.y() * x.z(); };
    m.grad_gamma_u = [s](const Vec3& x) -> Vec3 {
        const Vec3 grad(x.y() * x.z(), x.x() * x.z(), x.x() * x.y());
        const Vec3 n = surface_normal(s, x);
        return grad - grad.dot(n) * n;
    };
    m.f = [s](const Vec3& x) {
        const Footpoint fp = detail::tube_foot(s, x);
        const Vec3& n = fp.normal;
        const Vec3 grad(x.y() * x.z(), x.x() * x.z(), x.x() * x.y());
        Mat3 hess;
        hess << 0.0, x.z(), x.y(), x.z(), 0.0, x.x(), x.y(), x.x(), 0.0;
        const double mean_curv = fp.weingarten.trace();
        return n.dot(hess * n) + mean_curv * grad.dot(n);
    };
    return m;
}

// u = sin(3 phi) cos(theta) in toroidal/poloidal angles.
inline ManufacturedSolution torus_solution(const ImplicitSurface& s)
{
    const double big_r = s.major_radius();
    const double small_r = s.minor_radius();
    struct Angles {
        double phi, theta;
    };
    auto angles = [big_r](const Vec3& x) {
        const double rho = std::hypot(x.x(), x.y());
        return Angles{std::atan2(x.y(), x.x()), std::atan2(x.z(), rho - big_r)};
    };

    ManufacturedSolution m;
    m.name = "sin3phi_cos_theta";
    m.u = [angles](const Vec3& x) {
        const Angles a = angles(x);
        return std::sin(3.0 * a.phi) * std::cos(a.theta);
    };
    m.grad_gamma_u = [angles, big_r, small_r](const Vec3& x) -> Vec3 {
        const Angles a = angles(x);
        const double ring = big_r + small_r * std::cos(a.theta);
        const Vec3 e_phi(-std::sin(a.phi), std::cos(a.phi), 0.0);
        const Vec3 t_theta(-std::sin(a.theta) * std::cos(a.phi), -std::sin(a.theta) * std::sin(a.phi),
                           std::cos(a.theta));
        const double du_dphi = 3.0 * std::cos(3.0 * a.phi) * std::cos(a.theta);
        const double du_dtheta = -std::sin(3.0 * a.phi) * std::sin(a.theta);
        return (du_dphi / ring) * e_phi + (du_dtheta / small_r) * t_theta;
    };
    m.f = [angles, big_r, small_r](const Vec3& x) {
        const Angles a = angles(x);
        const double c = std::cos(a.theta);
        const double ring = big_r + small_r * c;
        const double lap = std::sin(3.0 * a.phi) *
                           (-9.0 * c / (ring * ring) -
                            (big_r * c + small_r * std::cos(2.0 * a.theta)) / (small_r * small_r * ring));
        return -lap;
    };
    return m;
}

} // namespace detail

/// Default manufactured problem per surface kind.
inline ManufacturedSolution manufactured(const ImplicitSurface& s)
{
    switch (s.kind()) {
    case SurfaceKind::Sphere:
    case SurfaceKind::Ellipsoid: return detail::xyz_solution(s);
    case SurfaceKind::Torus: return detail::torus_solution(s);
    }
    throw Error(ErrorCode::Unsupported, "no manufactured solution for this surface kind");
}

} // namespace lbfem
