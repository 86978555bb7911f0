#pragma once

// Background Kuhn (Freudenthal) tetrahedral mesh of a cube, the zero set of the
// piecewise linear interpolant d_h of the distance function (cut surface), and
// the narrow band of tetrahedra meeting {|d_h| < delta}.

#include "lbfem/geometry.hpp"
#include "lbfem/p1.hpp"
#include "lbfem/quadrature.hpp"
#include "lbfem/surface_mesh.hpp"

#include <algorithm>
#include <unordered_map>
#include <vector>

namespace lbfem {

using Tet = std::array<Index, 4>;

class BulkMesh {
public:
    BulkMesh(double half_width, int cells_per_axis) : a_(half_width), n_(cells_per_axis)
    {
        LBFEM_THROW_IF(n_ < 2, ErrorCode::InvalidArgument, "cells_per_axis must be >= 2");
        LBFEM_THROW_IF(!(a_ > 0.0), ErrorCode::InvalidArgument, "box half width must be > 0");
        h_ = 2.0 * a_ / n_;
        const Index np = n_ + 1;
        vertices_.reserve(static_cast<std::size_t>(np * np * np));
        for (Index k = 0; k < np; ++k)
            for (Index j = 0; j < np; ++j)
                for (Index i = 0; i < np; ++i) vertices_.emplace_back(-a_ + i * h_, -a_ + j * h_, -a_ + k * h_);

        tets_.reserve(static_cast<std::size_t>(6 * n_ * n_ * n_));
        for (Index k = 0; k < n_; ++k)
            for (Index j = 0; j < n_; ++j)
                for (Index i = 0; i < n_; ++i)
                    for (int p = 0; p < 6; ++p) tets_.push_back(kuhn_tet(i, j, k, p));

        std::vector<Index> count(vertices_.size() + 1, 0);
        for (const Tet& t : tets_)
            for (Index v : t) ++count[v + 1];
        for (std::size_t i = 1; i < count.size(); ++i) count[i] += count[i - 1];
        vt_offsets_ = count;
        vt_ids_.resize(static_cast<std::size_t>(count.back()));
        for (Index t = 0; t < num_tets(); ++t)
            for (Index v : tets_[t]) vt_ids_[count[v]++] = t;
    }

    [[nodiscard]] double half_width() const noexcept { return a_; }
    [[nodiscard]] int cells_per_axis() const noexcept { return n_; }
    /// Cube edge length.
    [[nodiscard]] double h() const noexcept { return h_; }
    [[nodiscard]] const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const std::vector<Tet>& tets() const noexcept { return tets_; }
    [[nodiscard]] Index num_vertices() const noexcept { return static_cast<Index>(vertices_.size()); }
    [[nodiscard]] Index num_tets() const noexcept { return static_cast<Index>(tets_.size()); }

    [[nodiscard]] std::array<Vec3, 4> corners(Index t) const
    {
        const Tet& tt = tets_[t];
        return {vertices_[tt[0]], vertices_[tt[1]], vertices_[tt[2]], vertices_[tt[3]]};
    }

    /// Longest edge of a Kuhn tetrahedron (the cube diagonal).
    [[nodiscard]] double tet_diameter() const noexcept { return std::sqrt(3.0) * h_; }

    /// Tetrahedra incident to vertex v.
    [[nodiscard]] std::pair<const Index*, const Index*> vertex_tets(Index v) const
    {
        return {vt_ids_.data() + vt_offsets_[v], vt_ids_.data() + vt_offsets_[v + 1]};
    }

    /// Tetrahedron containing p (clamped into the box).
    [[nodiscard]] Index locate(const Vec3& p) const
    {
        std::array<Index, 3> cell{};
        std::array<double, 3> frac{};
        for (int d = 0; d < 3; ++d) {
            const double s = (p[d] + a_) / h_;
            Index c = static_cast<Index>(std::floor(s));
            c = std::clamp<Index>(c, 0, n_ - 1);
            cell[d] = c;
            frac[d] = std::clamp(s - c, 0.0, 1.0);
        }
        std::array<int, 3> order{0, 1, 2};
        std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return frac[x] > frac[y]; });
        int perm = 0;
        for (int p2 = 0; p2 < 6; ++p2)
            if (kPerms[p2] == order) perm = p2;
        return 6 * (cell[0] + n_ * (cell[1] + n_ * cell[2])) + perm;
    }

private:
    static constexpr std::array<std::array<int, 3>, 6> kPerms{
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

    [[nodiscard]] Index vid(Index i, Index j, Index k) const { return i + (n_ + 1) * (j + (n_ + 1) * k); }

    [[nodiscard]] Tet kuhn_tet(Index i, Index j, Index k, int p) const
    {
        std::array<Index, 3> c{i, j, k};
        Tet t{};
        t[0] = vid(c[0], c[1], c[2]);
        for (int s = 0; s < 3; ++s) {
            ++c[kPerms[p][s]];
            t[s + 1] = vid(c[0], c[1], c[2]);
        }
        // odd permutations have negative orientation
        if (p == 1 || p == 2 || p == 5) std::swap(t[1], t[2]);
        return t;
    }

    double a_;
    int n_;
    double h_ = 0.0;
    std::vector<Vec3> vertices_;
    std::vector<Tet> tets_;
    std::vector<Index> vt_offsets_;
    std::vector<Index> vt_ids_;
};

inline BulkMesh build_bulk_mesh(double box_half_width, int cells_per_axis)
{
    return BulkMesh(box_half_width, cells_per_axis);
}

/// Same, but checks that the box strictly contains the tube around the surface.
inline BulkMesh build_bulk_mesh(const ImplicitSurface& s, double box_half_width, int cells_per_axis)
{
    const Vec3 reach = s.extent().array() + s.tube_half_width();
    LBFEM_THROW_IF(!(reach.maxCoeff() < box_half_width), ErrorCode::BoxTooSmall,
                   "box half width " + std::to_string(box_half_width) + " does not contain the tube");
    return BulkMesh(box_half_width, cells_per_axis);
}

/// Vertex values of d_h; exact zeros are moved to +1e-12 h.
inline std::vector<double> interpolated_distance(const BulkMesh& bulk, const ImplicitSurface& s)
{
    std::vector<double> val(static_cast<std::size_t>(bulk.num_vertices()));
    for (Index v = 0; v < bulk.num_vertices(); ++v) {
        double d = level_set(s, bulk.vertices()[v]);
        if (d == 0.0) d = 1e-12 * bulk.h();
        val[v] = d;
    }
    return val;
}

struct CutFace {
    std::array<Index, 3> points;
    Index tet = -1;
    Vec3 normal;
    double area = 0.0;
    double h = 0.0; // diameter of the parent tetrahedron
};

struct CutSurface {
    std::vector<Vec3> points;
    std::vector<CutFace> faces;
    std::vector<Index> cut_tets;        // sorted
    std::vector<Index> active_vertices; // sorted bulk vertex ids of cut tets
    std::vector<double> vertex_values;  // d_h at every bulk vertex
    Index dropped_faces = 0;

    [[nodiscard]] std::array<Vec3, 3> corners(std::size_t f) const
    {
        const auto& p = faces[f].points;
        return {points[p[0]], points[p[1]], points[p[2]]};
    }

    [[nodiscard]] double total_area() const
    {
        double s = 0.0;
        for (const CutFace& f : faces) s += f.area;
        return s;
    }

    /// Every face edge is shared by exactly two faces.
    [[nodiscard]] bool is_closed() const
    {
        std::unordered_map<std::uint64_t, int> count;
        for (const CutFace& f : faces)
            for (int k = 0; k < 3; ++k) ++count[edge_key(f.points[k], f.points[(k + 1) % 3])];
        for (const auto& [key, c] : count)
            if (c != 2) return false;
        return true;
    }
};

/// Zero set of d_h: one triangle per 3-1 sign split, two per 2-2 split (quad cut
/// along its shorter diagonal). Faces are oriented along grad d_h.
inline CutSurface extract_cut_surface(const BulkMesh& bulk, const ImplicitSurface& s)
{
    CutSurface cut;
    cut.vertex_values = interpolated_distance(bulk, s);
    const auto& val = cut.vertex_values;
    const auto& verts = bulk.vertices();
    const double h = bulk.h();
    std::unordered_map<std::uint64_t, Index> crossing;
    std::unordered_map<Index, Index> snapped;

    // crossings at a vertex with |d_h| <= 1e-12 h are welded to that vertex so
    // slivers around it collapse instead of leaving holes
    auto cross_point = [&](Index a, Index b) {
        for (Index v : {a, b}) {
            if (std::abs(val[v]) > 1e-12 * h) continue;
            auto [it, fresh] = snapped.try_emplace(v, static_cast<Index>(cut.points.size()));
            if (fresh) cut.points.push_back(verts[v]);
            return it->second;
        }
        auto [it, fresh] = crossing.try_emplace(edge_key(a, b), static_cast<Index>(cut.points.size()));
        if (fresh) {
            const Index lo = std::min(a, b), hi = std::max(a, b);
            const double t = val[lo] / (val[lo] - val[hi]);
            cut.points.push_back(verts[lo] + t * (verts[hi] - verts[lo]));
        }
        return it->second;
    };

    std::vector<char> is_active(static_cast<std::size_t>(bulk.num_vertices()), 0);
    for (Index t = 0; t < bulk.num_tets(); ++t) {
        const Tet& tet = bulk.tets()[t];
        std::array<Index, 4> neg{}, pos{};
        int nn = 0, np = 0;
        for (Index v : tet) {
            if (val[v] < 0.0) neg[nn++] = v;
            else pos[np++] = v;
        }
        if (nn == 0 || np == 0) continue;
        cut.cut_tets.push_back(t);
        for (Index v : tet) is_active[v] = 1;

        const auto c = bulk.corners(t);
        const auto g = p1_tet_gradients(c);
        Vec3 grad_dh = Vec3::Zero();
        for (int i = 0; i < 4; ++i) grad_dh += val[tet[i]] * g[i];

        std::vector<std::array<Index, 3>> tris;
        if (nn == 1 || np == 1) {
            const Index lone = nn == 1 ? neg[0] : pos[0];
            const auto& others = nn == 1 ? pos : neg;
            tris.push_back({cross_point(lone, others[0]), cross_point(lone, others[1]), cross_point(lone, others[2])});
        } else {
            const Index q0 = cross_point(neg[0], pos[0]);
            const Index q1 = cross_point(neg[0], pos[1]);
            const Index q2 = cross_point(neg[1], pos[1]);
            const Index q3 = cross_point(neg[1], pos[0]);
            const auto& P = cut.points;
            if ((P[q0] - P[q2]).squaredNorm() <= (P[q1] - P[q3]).squaredNorm()) {
                tris.push_back({q0, q1, q2});
                tris.push_back({q0, q2, q3});
            } else {
                tris.push_back({q1, q2, q3});
                tris.push_back({q1, q3, q0});
            }
        }
        for (auto tri : tris) {
            const auto& P = cut.points;
            Vec3 cr = (P[tri[1]] - P[tri[0]]).cross(P[tri[2]] - P[tri[0]]);
            if (cr.dot(grad_dh) < 0.0) {
                std::swap(tri[1], tri[2]);
                cr = -cr;
            }
            const double area = 0.5 * cr.norm();
            if (tri[0] == tri[1] || tri[1] == tri[2] || tri[2] == tri[0] || area < 1e-14 * h * h) {
                ++cut.dropped_faces;
                continue;
            }
            // the zero set of d_h is planar in t; its normal does not suffer from tiny faces
            cut.faces.push_back({tri, t, grad_dh.normalized(), area, bulk.tet_diameter()});
        }
    }
    for (Index v = 0; v < bulk.num_vertices(); ++v)
        if (is_active[v]) cut.active_vertices.push_back(v);
    return cut;
}

struct BandMesh {
    std::vector<Index> tets; // sorted
    double delta = 0.0;
    std::vector<Index> active_vertices; // sorted
    std::vector<double> vertex_values;  // d_h at every bulk vertex
    /// |N_h(delta)|, tets clipped exactly.
    double measure = 0.0;
};

/// delta must satisfy c1 h <= delta <= c2 h.
inline void check_delta_window(double delta, double h, double c1 = 1.0, double c2 = 2.0)
{
    LBFEM_THROW_IF(!(delta >= c1 * h * (1.0 - 1e-12) && delta <= c2 * h * (1.0 + 1e-12)),
                   ErrorCode::InvalidArgument,
                   "delta outside the window [" + std::to_string(c1) + " h, " + std::to_string(c2) + " h]");
}

/// Quadrature rule used on each clipped piece of a band tetrahedron.
inline const QuadratureRule& band_rule() { return tet_rule_deg5(); }

namespace detail {

/// Vertex of a clipped piece: barycentric coordinates in the parent tet and d_h there.
struct ClipVertex {
    Eigen::Vector4d lambda;
    double d = 0.0;
};
using ClipTet = std::array<ClipVertex, 4>;

/// Appends the part of t where g = delta + sign * d_h >= 0, split into tetrahedra.
inline void clip_tet(const ClipTet& t, double sign, double delta, std::vector<ClipTet>& out)
{
    std::array<double, 4> g{};
    std::array<int, 4> in{}, ex{};
    int ni = 0, ne = 0;
    for (int i = 0; i < 4; ++i) {
        g[i] = delta + sign * t[i].d;
        if (g[i] >= 0.0) in[ni++] = i;
        else ex[ne++] = i;
    }
    if (ne == 0) {
        out.push_back(t);
        return;
    }
    if (ni == 0) return;
    auto at = [&](int a, int b) {
        const double s = g[a] / (g[a] - g[b]);
        return ClipVertex{t[a].lambda + s * (t[b].lambda - t[a].lambda), t[a].d + s * (t[b].d - t[a].d)};
    };
    if (ni == 1) {
        const int a = in[0];
        out.push_back({t[a], at(a, ex[0]), at(a, ex[1]), at(a, ex[2])});
    } else if (ni == 3) {
        // prism between the kept face and its cut
        const int o = ex[0];
        const ClipVertex pa = at(in[0], o), pb = at(in[1], o), pc = at(in[2], o);
        out.push_back({t[in[0]], t[in[1]], t[in[2]], pa});
        out.push_back({t[in[1]], t[in[2]], pa, pb});
        out.push_back({t[in[2]], pa, pb, pc});
    } else {
        const int a = in[0], b = in[1];
        const ClipVertex ac = at(a, ex[0]), ad = at(a, ex[1]), bc = at(b, ex[0]), bd = at(b, ex[1]);
        out.push_back({t[a], t[b], ac, ad});
        out.push_back({t[b], ac, ad, bd});
        out.push_back({t[b], ac, bc, bd});
    }
}

} // namespace detail

/// A quadrature point of N_h(delta) inside band tet `slot`.
struct BandPoint {
    std::size_t slot = 0;
    std::array<double, 4> lambda{}; // barycentric in the parent tet
    Vec3 x;
    double d_h = 0.0;
    double weight = 0.0;
};

/// Quadrature on {|d_h| < delta} restricted to one tetrahedron. d_h is linear
/// there, so the region is the tet clipped by two planes.
inline void band_points_in_tet(const std::array<Vec3, 4>& c, const std::array<double, 4>& d, double delta,
                               std::size_t slot, std::vector<BandPoint>& out)
{
    detail::ClipTet whole;
    for (int i = 0; i < 4; ++i) whole[i] = {Eigen::Vector4d::Unit(i), d[i]};
    std::vector<detail::ClipTet> upper, pieces;
    detail::clip_tet(whole, -1.0, delta, upper);
    for (const auto& u : upper) detail::clip_tet(u, 1.0, delta, pieces);

    const double vol = simplex_measure<4>(c);
    const QuadratureRule& quad = band_rule();
    for (const auto& piece : pieces) {
        Mat3 jac;
        for (int k = 0; k < 3; ++k) jac.col(k) = (piece[k + 1].lambda - piece[0].lambda).tail<3>();
        // volume fraction of the piece = |det| of its barycentric edge matrix
        const double piece_vol = vol * std::abs(jac.determinant());
        if (!(piece_vol > 0.0)) continue;
        for (std::size_t q = 0; q < quad.size(); ++q) {
            Eigen::Vector4d lam = Eigen::Vector4d::Zero();
            double dq = 0.0;
            for (int i = 0; i < 4; ++i) {
                lam += quad.points[q][i] * piece[i].lambda;
                dq += quad.points[q][i] * piece[i].d;
            }
            BandPoint bp;
            bp.slot = slot;
            bp.x = Vec3::Zero();
            for (int i = 0; i < 4; ++i) {
                bp.lambda[i] = lam[i];
                bp.x += lam[i] * c[i];
            }
            bp.d_h = dq;
            bp.weight = quad.unit_weight(q) * piece_vol;
            out.push_back(bp);
        }
    }
}

/// Tetrahedra with min d_h < delta and max d_h > -delta.
inline BandMesh extract_band(const BulkMesh& bulk, const ImplicitSurface& s, double delta, bool check_window = true)
{
    if (check_window) check_delta_window(delta, bulk.h());
    BandMesh band;
    band.delta = delta;
    band.vertex_values = interpolated_distance(bulk, s);
    const auto& val = band.vertex_values;
    std::vector<char> is_active(static_cast<std::size_t>(bulk.num_vertices()), 0);
    std::vector<BandPoint> pts;
    for (Index t = 0; t < bulk.num_tets(); ++t) {
        const Tet& tet = bulk.tets()[t];
        double lo = val[tet[0]], hi = val[tet[0]];
        for (Index v : tet) {
            lo = std::min(lo, val[v]);
            hi = std::max(hi, val[v]);
        }
        if (!(lo < delta && hi > -delta)) continue;
        band.tets.push_back(t);
        for (Index v : tet) is_active[v] = 1;
        pts.clear();
        band_points_in_tet(bulk.corners(t), {val[tet[0]], val[tet[1]], val[tet[2]], val[tet[3]]}, delta, 0, pts);
        for (const BandPoint& bp : pts) band.measure += bp.weight;
    }
    LBFEM_THROW_IF(band.tets.empty(), ErrorCode::EmptyBand, "no tetrahedron meets the band");
    for (Index v = 0; v < bulk.num_vertices(); ++v)
        if (is_active[v]) band.active_vertices.push_back(v);
    return band;
}

/// Quadrature points of N_h(delta) over all band tets.
inline std::vector<BandPoint> band_quadrature(const BulkMesh& bulk, const BandMesh& band)
{
    std::vector<BandPoint> out;
    out.reserve(band.tets.size() * band_rule().size() * 2);
    const auto& val = band.vertex_values;
    for (std::size_t k = 0; k < band.tets.size(); ++k) {
        const Tet& tet = bulk.tets()[band.tets[k]];
        band_points_in_tet(bulk.corners(band.tets[k]), {val[tet[0]], val[tet[1]], val[tet[2]], val[tet[3]]},
                           band.delta, k, out);
    }
    return out;
}

} // namespace lbfem
