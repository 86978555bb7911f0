#pragma once

// Analytic closed surfaces (sphere, torus, ellipsoid centred at the origin)
// and the differential geometry of their signed distance function d:
// closest point projection, Weingarten map, parallel-surface curvatures,
// lifted tangential gradients and area element ratios.
//
// Sign convention: d < 0 inside, d > 0 outside, grad d is the outward normal.

#include "lbfem/core.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <string>

namespace lbfem {

enum class SurfaceKind { Sphere, Torus, Ellipsoid };

enum class LiftKind { ClosestPoint, ScaledRadial };

inline std::string_view to_string(LiftKind k)
{
    return k == LiftKind::ClosestPoint ? "closest_point" : "scaled_radial";
}

class ImplicitSurface {
public:
    static ImplicitSurface sphere(double radius)
    {
        LBFEM_THROW_IF(!(radius > 0.0), ErrorCode::InvalidArgument, "sphere radius must be > 0");
        return ImplicitSurface(SurfaceKind::Sphere, {radius, 0.0, 0.0});
    }

    static ImplicitSurface torus(double major_radius, double minor_radius)
    {
        LBFEM_THROW_IF(!(major_radius > minor_radius && minor_radius > 0.0), ErrorCode::InvalidArgument,
                       "torus requires R > r > 0");
        return ImplicitSurface(SurfaceKind::Torus, {major_radius, minor_radius, 0.0});
    }

    static ImplicitSurface ellipsoid(double a, double b, double c)
    {
        LBFEM_THROW_IF(!(a > 0.0 && b > 0.0 && c > 0.0), ErrorCode::InvalidArgument,
                       "ellipsoid semi-axes must be > 0");
        return ImplicitSurface(SurfaceKind::Ellipsoid, {a, b, c});
    }

    [[nodiscard]] SurfaceKind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::array<double, 3>& params() const noexcept { return p_; }

    [[nodiscard]] double radius() const noexcept { return p_[0]; }
    [[nodiscard]] double major_radius() const noexcept { return p_[0]; }
    [[nodiscard]] double minor_radius() const noexcept { return p_[1]; }
    [[nodiscard]] Vec3 semi_axes() const noexcept { return {p_[0], p_[1], p_[2]}; }

    /// K_inf, the largest principal curvature magnitude over the surface.
    [[nodiscard]] double max_curvature() const noexcept
    {
        switch (kind_) {
        case SurfaceKind::Sphere: return 1.0 / p_[0];
        case SurfaceKind::Torus: return std::max(1.0 / p_[1], 1.0 / (p_[0] - p_[1]));
        case SurfaceKind::Ellipsoid: {
            const double amax = std::max({p_[0], p_[1], p_[2]});
            const double amin = std::min({p_[0], p_[1], p_[2]});
            return amax / (amin * amin);
        }
        }
        return 0.0;
    }

    /// Half-width of the tube N in which d is smooth and P_d is unique.
    [[nodiscard]] double tube_half_width() const noexcept { return 0.5 / max_curvature(); }

    /// Half extents of the axis-aligned bounding box of the surface.
    [[nodiscard]] Vec3 extent() const noexcept
    {
        switch (kind_) {
        case SurfaceKind::Sphere: return Vec3::Constant(p_[0]);
        case SurfaceKind::Torus: return {p_[0] + p_[1], p_[0] + p_[1], p_[1]};
        case SurfaceKind::Ellipsoid: return semi_axes();
        }
        return Vec3::Zero();
    }

    [[nodiscard]] double exact_area_hint() const noexcept
    {
        // Only sphere and torus have elementary closed forms.
        if (kind_ == SurfaceKind::Sphere) return 4.0 * kPi * p_[0] * p_[0];
        if (kind_ == SurfaceKind::Torus) return 4.0 * kPi * kPi * p_[0] * p_[1];
        return std::nan("");
    }

    [[nodiscard]] std::string name() const
    {
        switch (kind_) {
        case SurfaceKind::Sphere: return "sphere";
        case SurfaceKind::Torus: return "torus";
        case SurfaceKind::Ellipsoid: return "ellipsoid";
        }
        return "unknown";
    }

private:
    ImplicitSurface(SurfaceKind k, std::array<double, 3> p) : kind_(k), p_(p) {}

    SurfaceKind kind_;
    std::array<double, 3> p_;
};

/// Footpoint data: closest point y on the surface, outward normal at y,
/// Weingarten map W(y) (3x3, W nu = 0) and the signed distance of the query.
struct Footpoint {
    Vec3 point;
    Vec3 normal;
    Mat3 weingarten;
    double distance = 0.0;
};

struct DistanceJet {
    double d = 0.0;
    Vec3 grad;
    Mat3 hess;
    Vec3 foot;
};

namespace detail {

inline constexpr int kEllipsoidMaxIter = 50;
inline constexpr double kEllipsoidTol = 1e-13;

/// Closest point on an ellipsoid via the Lagrange condition y_i = a_i^2 x_i / (a_i^2 + t),
/// safeguarded Newton on the multiplier t. Returns nullopt when no root exists in
/// (-min a_i^2, inf) (medial region) or when max_iter is exhausted.
inline std::optional<Vec3> ellipsoid_closest(const Vec3& axes, const Vec3& x, int max_iter)
{
    const Vec3 a2 = axes.cwiseProduct(axes);
    const Vec3 q = axes.cwiseProduct(x);
    const double amin2 = a2.minCoeff();
    const double amax2 = a2.maxCoeff();

    auto f = [&](double t) {
        return (q.array() / (a2.array() + t)).square().sum() - 1.0;
    };
    auto df = [&](double t) {
        return -2.0 * (q.array().square() / (a2.array() + t).cube()).sum();
    };

    const double f0 = f(0.0);
    if (f0 == 0.0) return x;

    double lo, hi, t = 0.0;
    if (f0 > 0.0) {
        lo = 0.0;
        hi = std::sqrt(amax2) * x.norm() + amax2;
    } else {
        lo = -amin2;
        hi = 0.0;
    }

    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
        const double ft = f(t);
        if (ft == 0.0) {
            converged = true;
            break;
        }
        if (ft > 0.0) lo = t; else hi = t;
        double tn = t - ft / df(t);
        if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
        const bool small = std::abs(tn - t) <= kEllipsoidTol * (amax2 + std::abs(t));
        t = tn;
        if (small) {
            converged = true;
            break;
        }
    }
    if (!converged) return std::nullopt;
    if (std::abs(f(t)) > 1e-8) return std::nullopt;
    return Vec3((a2.array() * x.array() / (a2.array() + t)).matrix());
}

inline Mat3 ellipsoid_weingarten(const Vec3& axes, const Vec3& y)
{
    const Vec3 inv_a2 = axes.cwiseProduct(axes).cwiseInverse();
    const Vec3 grad = y.cwiseProduct(inv_a2);
    const double gnorm = grad.norm();
    const Vec3 n = grad / gnorm;
    const Mat3 proj = tangent_projector(n);
    Mat3 w = proj * inv_a2.asDiagonal() * proj / gnorm;
    return 0.5 * (w + w.transpose());
}

inline Footpoint sphere_foot(double radius, const Vec3& x)
{
    const double rho = x.norm();
    LBFEM_THROW_IF(rho == 0.0, ErrorCode::OutsideTube, "sphere centre has no closest point");
    Footpoint fp;
    fp.normal = x / rho;
    fp.point = radius * fp.normal;
    fp.distance = rho - radius;
    fp.weingarten = tangent_projector(fp.normal) / radius;
    return fp;
}

inline Footpoint torus_foot(double big_r, double small_r, const Vec3& x)
{
    const double rho = std::hypot(x.x(), x.y());
    LBFEM_THROW_IF(rho == 0.0, ErrorCode::OutsideTube, "torus axis has no closest point");
    const Vec3 e_phi(-x.y() / rho, x.x() / rho, 0.0);
    const Vec3 core(big_r * x.x() / rho, big_r * x.y() / rho, 0.0);
    const Vec3 off = x - core;
    const double s = off.norm();
    LBFEM_THROW_IF(s == 0.0, ErrorCode::OutsideTube, "torus core circle has no closest point");
    Footpoint fp;
    fp.normal = off / s;
    fp.point = core + small_r * fp.normal;
    fp.distance = s - small_r;
    const double cos_theta = (std::hypot(fp.point.x(), fp.point.y()) - big_r) / small_r;
    const Vec3 t_theta = fp.normal.cross(e_phi);
    const double k_phi = cos_theta / (big_r + small_r * cos_theta);
    fp.weingarten = (1.0 / small_r) * t_theta * t_theta.transpose() + k_phi * e_phi * e_phi.transpose();
    return fp;
}

/// Footpoint without the tube guard. Throws NewtonDivergence if the ellipsoid
/// projector does not converge.
inline Footpoint foot(const ImplicitSurface& s, const Vec3& x, int max_iter = kEllipsoidMaxIter)
{
    switch (s.kind()) {
    case SurfaceKind::Sphere: return sphere_foot(s.radius(), x);
    case SurfaceKind::Torus: return torus_foot(s.major_radius(), s.minor_radius(), x);
    case SurfaceKind::Ellipsoid: {
        const Vec3 axes = s.semi_axes();
        auto y = ellipsoid_closest(axes, x, max_iter);
        LBFEM_THROW_IF(!y, ErrorCode::NewtonDivergence, "ellipsoid closest point did not converge");
        Footpoint fp;
        fp.point = *y;
        fp.normal = y->cwiseQuotient(axes.cwiseProduct(axes)).normalized();
        const double implicit = x.cwiseQuotient(axes).squaredNorm() - 1.0;
        fp.distance = (implicit < 0.0 ? -1.0 : 1.0) * (x - *y).norm();
        fp.weingarten = ellipsoid_weingarten(axes, *y);
        return fp;
    }
    }
    throw Error(ErrorCode::Unsupported, "unknown surface kind");
}

inline Footpoint tube_foot(const ImplicitSurface& s, const Vec3& x)
{
    const double tube = s.tube_half_width();
    Footpoint fp;
    if (s.kind() == SurfaceKind::Ellipsoid) {
        const Vec3 axes = s.semi_axes();
        const Vec3 grad = 2.0 * x.cwiseQuotient(axes.cwiseProduct(axes));
        const double estimate = (x.cwiseQuotient(axes).squaredNorm() - 1.0) / std::max(grad.norm(), 1e-300);
        try {
            fp = foot(s, x);
        } catch (const Error& e) {
            if (std::abs(estimate) >= tube)
                throw Error(ErrorCode::OutsideTube, "point outside the tube |d| < 1/(2 K_inf)");
            throw;
        }
    } else {
        fp = foot(s, x);
    }
    LBFEM_THROW_IF(!(std::abs(fp.distance) < tube), ErrorCode::OutsideTube,
                   "point outside the tube |d| < 1/(2 K_inf)");
    return fp;
}

} // namespace detail

/// Signed distance with gradient and Hessian. The Hessian uses the identity
/// (I + d W(P_d x)) D^2 d(x) = W(P_d x).
inline DistanceJet distance_jet(const ImplicitSurface& s, const Vec3& x)
{
    const Footpoint fp = detail::tube_foot(s, x);
    DistanceJet jet;
    jet.d = fp.distance;
    jet.grad = fp.normal;
    jet.foot = fp.point;
    const Mat3 m = Mat3::Identity() + fp.distance * fp.weingarten;
    Mat3 h = fp.weingarten * m.inverse();
    jet.hess = 0.5 * (h + h.transpose());
    return jet;
}

inline double signed_distance(const ImplicitSurface& s, const Vec3& x)
{
    return detail::tube_foot(s, x).distance;
}

/// Global level-set value used for interpolation on background meshes: the exact
/// signed distance where it is computable, otherwise a same-signed value whose
/// magnitude is at least the tube half-width.
inline double level_set(const ImplicitSurface& s, const Vec3& x)
{
    switch (s.kind()) {
    case SurfaceKind::Sphere: return x.norm() - s.radius();
    case SurfaceKind::Torus: {
        const double rho = std::hypot(x.x(), x.y());
        return std::hypot(rho - s.major_radius(), x.z()) - s.minor_radius();
    }
    case SurfaceKind::Ellipsoid: {
        const Vec3 axes = s.semi_axes();
        if (auto y = detail::ellipsoid_closest(axes, x, 200)) {
            const double implicit = x.cwiseQuotient(axes).squaredNorm() - 1.0;
            return (implicit < 0.0 ? -1.0 : 1.0) * (x - *y).norm();
        }
        const double implicit = x.cwiseQuotient(axes).squaredNorm() - 1.0;
        return (implicit < 0.0 ? -1.0 : 1.0) * std::max(s.tube_half_width(), axes.minCoeff() * std::abs(implicit));
    }
    }
    return 0.0;
}

inline Vec3 closest_point(const ImplicitSurface& s, const Vec3& x)
{
    return detail::tube_foot(s, x).point;
}

inline Vec3 surface_normal(const ImplicitSurface& s, const Vec3& x)
{
    return detail::tube_foot(s, x).normal;
}

/// Ray/level-set intersection from the surface centre (torus: from the nearest
/// core-circle point, within the minor disc).
inline Vec3 scaled_radial_lift(const ImplicitSurface& s, const Vec3& x)
{
    switch (s.kind()) {
    case SurfaceKind::Sphere:
    case SurfaceKind::Ellipsoid: {
        const double len = x.norm();
        LBFEM_THROW_IF(len == 0.0, ErrorCode::RayMiss, "ray from the centre is undefined at the centre");
        const Vec3 dir = x / len;
        const Vec3 axes = s.semi_axes();
        const double k = s.kind() == SurfaceKind::Sphere
                             ? 1.0 / (s.radius() * s.radius())
                             : dir.cwiseQuotient(axes).squaredNorm();
        // phi(t) = k t^2 - 1 along the ray; Newton from t = |x| is monotone.
        double t = len;
        for (int it = 0; it < 50; ++it) {
            const double phi = k * t * t - 1.0;
            const double step = phi / (2.0 * k * t);
            t -= step;
            if (std::abs(step) <= 1e-15 * t) return t * dir;
        }
        throw Error(ErrorCode::RayMiss, "radial Newton did not converge");
    }
    case SurfaceKind::Torus: {
        const double rho = std::hypot(x.x(), x.y());
        LBFEM_THROW_IF(rho == 0.0, ErrorCode::RayMiss, "torus axis has no radial image");
        const Vec3 core(s.major_radius() * x.x() / rho, s.major_radius() * x.y() / rho, 0.0);
        const Vec3 off = x - core;
        LBFEM_THROW_IF(off.norm() == 0.0, ErrorCode::RayMiss, "core circle has no radial image");
        return core + s.minor_radius() * off.normalized();
    }
    }
    throw Error(ErrorCode::Unsupported, "unknown surface kind");
}

inline Vec3 generic_lift(const ImplicitSurface& s, LiftKind kind, const Vec3& x)
{
    if (kind == LiftKind::ClosestPoint) return closest_point(s, x);
    LBFEM_THROW_IF(!(std::abs(level_set(s, x)) < s.tube_half_width()), ErrorCode::OutsideTube,
                   "lift argument outside the tube");
    return scaled_radial_lift(s, x);
}

/// Projection onto the surface for mesh construction: closest point when the
/// global projector converges, radial lift otherwise. No tube guard.
inline Vec3 project_to_surface(const ImplicitSurface& s, const Vec3& x)
{
    if (s.kind() == SurfaceKind::Ellipsoid) {
        if (auto y = detail::ellipsoid_closest(s.semi_axes(), x, 200)) return *y;
        return scaled_radial_lift(s, x);
    }
    return detail::foot(s, x).point;
}

namespace detail {

/// Eigenvalues of the symmetric map m on the plane orthogonal to n, sorted descending.
inline std::array<double, 2> tangential_eigenvalues(const Mat3& m, const Vec3& n)
{
    Eigen::SelfAdjointEigenSolver<Mat3> eig(m);
    const auto& vecs = eig.eigenvectors();
    int skip = 0;
    double best = -1.0;
    for (int i = 0; i < 3; ++i) {
        const double align = std::abs(vecs.col(i).dot(n));
        if (align > best) {
            best = align;
            skip = i;
        }
    }
    std::array<double, 2> out{};
    int k = 0;
    for (int i = 0; i < 3; ++i)
        if (i != skip) out[k++] = eig.eigenvalues()(i);
    if (out[0] < out[1]) std::swap(out[0], out[1]);
    return out;
}

} // namespace detail

/// Principal curvatures at a point of the surface, descending.
inline std::array<double, 2> principal_curvatures(const ImplicitSurface& s, const Vec3& y)
{
    const Footpoint fp = detail::tube_foot(s, y);
    return detail::tangential_eigenvalues(fp.weingarten, fp.normal);
}

/// Tangential eigenvalues of D^2 d(x): the principal curvatures of the parallel
/// surface through x, descending.
inline std::array<double, 2> parallel_curvatures(const ImplicitSurface& s, const Vec3& x)
{
    const DistanceJet jet = distance_jet(s, x);
    return detail::tangential_eigenvalues(jet.hess, jet.grad);
}

/// Pi_Gamma (I - d W)(x) Pi(x) grad_gamma: the tangential gradient on a discrete
/// facet with normal nu_gamma of the lifted function v o P_d.
inline Vec3 lifted_tangential_gradient(const ImplicitSurface& s, const Vec3& x, const Vec3& nu_gamma,
                                       const Vec3& grad_gamma)
{
    const DistanceJet jet = distance_jet(s, x);
    const Vec3 t = tangent_projector(jet.grad) * grad_gamma;
    const Vec3 g = t - jet.d * (jet.hess * t);
    return g - nu_gamma.dot(g) * nu_gamma;
}

/// q / q_Gamma = det(I - d W)(x) (nu(x) . nu_Gamma).
inline double area_ratio(const ImplicitSurface& s, const Vec3& x, const Vec3& nu_gamma)
{
    const DistanceJet jet = distance_jet(s, x);
    const double c = jet.grad.dot(nu_gamma);
    LBFEM_THROW_IF(!(c > 0.0), ErrorCode::NormalFlip, "discrete normal points against the surface normal");
    return (Mat3::Identity() - jet.d * jet.hess).determinant() * c;
}

} // namespace lbfem
