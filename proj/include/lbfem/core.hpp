#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lbfem {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Index = std::ptrdiff_t;

enum class ErrorCode {
    InvalidArgument,
    OutsideTube,
    NewtonDivergence,
    RayMiss,
    NormalFlip,
    Unsupported,
    BoxTooSmall,
    DegenerateSimplex,
    DegenerateCut,
    EmptyBand,
    NoConvergence,
    BadSeries,
    ValenceBound,
    Config,
};

inline std::string_view to_string(ErrorCode c)
{
    switch (c) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutsideTube: return "OutsideTube";
    case ErrorCode::NewtonDivergence: return "NewtonDivergence";
    case ErrorCode::RayMiss: return "RayMiss";
    case ErrorCode::NormalFlip: return "NormalFlip";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::BoxTooSmall: return "BoxTooSmall";
    case ErrorCode::DegenerateSimplex: return "DegenerateSimplex";
    case ErrorCode::DegenerateCut: return "DegenerateCut";
    case ErrorCode::EmptyBand: return "EmptyBand";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::BadSeries: return "BadSeries";
    case ErrorCode::ValenceBound: return "ValenceBound";
    case ErrorCode::Config: return "Config";
    }
    return "Unknown";
}

/// Exception carrying a machine-checkable error code; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what)
        , code_(code)
        , detail_(what)
    {
    }

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    /// The message without the code prefix.
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

#define LBFEM_THROW_IF(cond, code, msg)                  \
    do {                                                 \
        if (cond) throw ::lbfem::Error((code), (msg));   \
    } while (0)

/// I - n n^T for a unit vector n.
inline Mat3 tangent_projector(const Vec3& n)
{
    return Mat3::Identity() - n * n.transpose();
}

/// Orthonormal pair spanning the plane orthogonal to the unit vector n.
inline std::pair<Vec3, Vec3> plane_basis(const Vec3& n)
{
    const Vec3 seed = std::abs(n.x()) < 0.6 ? Vec3::UnitX() : (std::abs(n.y()) < 0.6 ? Vec3::UnitY() : Vec3::UnitZ());
    Vec3 t1 = (seed - seed.dot(n) * n).normalized();
    Vec3 t2 = n.cross(t1);
    return {t1, t2};
}

inline constexpr double kPi = 3.14159265358979323846;

} // namespace lbfem
