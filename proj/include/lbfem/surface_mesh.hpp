#pragma once

// Closed triangulated surfaces with vertices on the exact surface: icosphere and
// structured torus generators, red (4-way) refinement and newest-vertex bisection.
//
// Triangles are stored as vertex triples oriented outward; the edge (t[0], t[1])
// is the refinement edge used by bisection.

#include "lbfem/geometry.hpp"
#include "lbfem/p1.hpp"

#include <cstdint>
#include <map>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace lbfem {

using Tri = std::array<Index, 3>;

inline constexpr int kMaxValence = 32;

inline std::uint64_t edge_key(Index a, Index b)
{
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

struct MeshEdge {
    Index a = -1, b = -1;
    /// Incident triangles (and the local edge number k, meaning (t[k], t[k+1 mod 3])).
    std::array<Index, 2> tri{-1, -1};
    std::array<int, 2> local{-1, -1};
    int count = 0;
};

class SurfaceMesh {
public:
    SurfaceMesh() = default;

    SurfaceMesh(std::vector<Vec3> vertices, std::vector<Tri> triangles)
        : vertices_(std::move(vertices)), triangles_(std::move(triangles))
    {
        update();
    }

    [[nodiscard]] const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const std::vector<Tri>& triangles() const noexcept { return triangles_; }
    [[nodiscard]] Index num_vertices() const noexcept { return static_cast<Index>(vertices_.size()); }
    [[nodiscard]] Index num_triangles() const noexcept { return static_cast<Index>(triangles_.size()); }

    [[nodiscard]] const Vec3& normal(Index t) const { return normals_[t]; }
    [[nodiscard]] double area(Index t) const { return areas_[t]; }
    /// h_T = |T|^(1/2).
    [[nodiscard]] double h(Index t) const { return std::sqrt(areas_[t]); }

    [[nodiscard]] std::array<Vec3, 3> corners(Index t) const
    {
        const Tri& tri = triangles_[t];
        return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
    }

    [[nodiscard]] double diameter(Index t) const
    {
        const auto c = corners(t);
        return std::max({(c[1] - c[0]).norm(), (c[2] - c[1]).norm(), (c[0] - c[2]).norm()});
    }

    [[nodiscard]] const std::vector<MeshEdge>& edges() const noexcept { return edges_; }
    /// Edge id of local edge k of triangle t.
    [[nodiscard]] Index triangle_edge(Index t, int k) const { return tri_edges_[t][k]; }

    [[nodiscard]] double h_max() const
    {
        double m = 0.0;
        for (Index t = 0; t < num_triangles(); ++t) m = std::max(m, h(t));
        return m;
    }

    [[nodiscard]] double total_area() const
    {
        double s = 0.0;
        for (double a : areas_) s += a;
        return s;
    }

    [[nodiscard]] Index euler_characteristic() const
    {
        return num_vertices() - static_cast<Index>(edges_.size()) + num_triangles();
    }

    /// Every edge has exactly two incident triangles, traversed in opposite directions.
    [[nodiscard]] bool is_closed_manifold() const
    {
        for (const MeshEdge& e : edges_) {
            if (e.count != 2) return false;
            const Tri& t0 = triangles_[e.tri[0]];
            const Tri& t1 = triangles_[e.tri[1]];
            if (t0[e.local[0]] != t1[(e.local[1] + 1) % 3]) return false;
        }
        return true;
    }

    /// max_T diam(T) / h_T.
    [[nodiscard]] double max_shape_ratio() const
    {
        double m = 0.0;
        for (Index t = 0; t < num_triangles(); ++t) m = std::max(m, diameter(t) / h(t));
        return m;
    }

    [[nodiscard]] int max_valence() const
    {
        std::vector<int> val(vertices_.size(), 0);
        for (const Tri& t : triangles_)
            for (Index v : t) ++val[v];
        int m = 0;
        for (int v : val) m = std::max(m, v);
        return m;
    }

    [[nodiscard]] std::vector<TriangleElement> elements() const
    {
        std::vector<TriangleElement> out;
        out.reserve(triangles_.size());
        for (Index t = 0; t < num_triangles(); ++t) out.push_back({corners(t), triangles_[t]});
        return out;
    }

private:
    void update()
    {
        normals_.resize(triangles_.size());
        areas_.resize(triangles_.size());
        for (Index t = 0; t < num_triangles(); ++t) {
            const auto c = corners(t);
            const Vec3 cr = (c[1] - c[0]).cross(c[2] - c[0]);
            areas_[t] = 0.5 * cr.norm();
            normals_[t] = cr.normalized();
        }
        std::unordered_map<std::uint64_t, Index> ids;
        ids.reserve(triangles_.size() * 2);
        edges_.clear();
        tri_edges_.assign(triangles_.size(), {-1, -1, -1});
        for (Index t = 0; t < num_triangles(); ++t) {
            for (int k = 0; k < 3; ++k) {
                const Index a = triangles_[t][k];
                const Index b = triangles_[t][(k + 1) % 3];
                auto [it, fresh] = ids.try_emplace(edge_key(a, b), static_cast<Index>(edges_.size()));
                if (fresh) edges_.push_back({std::min(a, b), std::max(a, b)});
                MeshEdge& e = edges_[it->second];
                if (e.count < 2) {
                    e.tri[e.count] = t;
                    e.local[e.count] = k;
                }
                ++e.count;
                tri_edges_[t][k] = it->second;
            }
        }
        LBFEM_THROW_IF(max_valence() > kMaxValence, ErrorCode::ValenceBound,
                       "vertex valence exceeds " + std::to_string(kMaxValence));
    }

    std::vector<Vec3> vertices_;
    std::vector<Tri> triangles_;
    std::vector<Vec3> normals_;
    std::vector<double> areas_;
    std::vector<MeshEdge> edges_;
    std::vector<std::array<Index, 3>> tri_edges_;
};

namespace detail {

/// Cyclic rotation putting the longest edge at (t[0], t[1]); keeps orientation.
inline Tri rotate_longest_first(const std::vector<Vec3>& v, Tri t)
{
    int best = 0;
    double len = -1.0;
    for (int k = 0; k < 3; ++k) {
        const double l = (v[t[(k + 1) % 3]] - v[t[k]]).squaredNorm();
        if (l > len) {
            len = l;
            best = k;
        }
    }
    return {t[best], t[(best + 1) % 3], t[(best + 2) % 3]};
}

class MidpointCache {
public:
    MidpointCache(const ImplicitSurface& s, std::vector<Vec3>& verts) : surface_(s), verts_(verts) {}

    Index operator()(Index a, Index b)
    {
        auto [it, fresh] = ids_.try_emplace(edge_key(a, b), static_cast<Index>(verts_.size()));
        if (fresh) verts_.push_back(project_to_surface(surface_, 0.5 * (verts_[a] + verts_[b])));
        return it->second;
    }

private:
    const ImplicitSurface& surface_;
    std::vector<Vec3>& verts_;
    std::unordered_map<std::uint64_t, Index> ids_;
};

inline std::vector<Tri> red_split(const std::vector<Tri>& tris, MidpointCache& mid, const std::vector<Vec3>& v)
{
    std::vector<Tri> out;
    out.reserve(tris.size() * 4);
    for (const Tri& t : tris) {
        const Index m01 = mid(t[0], t[1]);
        const Index m12 = mid(t[1], t[2]);
        const Index m20 = mid(t[2], t[0]);
        out.push_back({t[0], m01, m20});
        out.push_back({m01, t[1], m12});
        out.push_back({m20, m12, t[2]});
        out.push_back({m01, m12, m20});
    }
    for (Tri& t : out) t = rotate_longest_first(v, t);
    return out;
}

} // namespace detail

/// Icosahedron projected onto the surface and red-refined `level` times;
/// 20 * 4^level triangles.
inline SurfaceMesh build_sphere_mesh(const ImplicitSurface& s, int level)
{
    LBFEM_THROW_IF(s.kind() == SurfaceKind::Torus, ErrorCode::Unsupported, "icosphere needs a genus-0 surface");
    LBFEM_THROW_IF(level < 0, ErrorCode::InvalidArgument, "level must be >= 0");
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                           {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                           {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
    std::vector<Tri> tris = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (Vec3& p : v) p = project_to_surface(s, p.normalized() * s.extent().minCoeff());
    for (Tri& t : tris) {
        const Vec3 c = (v[t[0]] + v[t[1]] + v[t[2]]) / 3.0;
        if ((v[t[1]] - v[t[0]]).cross(v[t[2]] - v[t[0]]).dot(c) < 0.0) std::swap(t[1], t[2]);
        t = detail::rotate_longest_first(v, t);
    }
    for (int l = 0; l < level; ++l) {
        detail::MidpointCache mid(s, v);
        tris = detail::red_split(tris, mid, v);
    }
    return SurfaceMesh(std::move(v), std::move(tris));
}

/// Structured (phi, theta) grid on a torus, quads split along the shorter diagonal.
inline SurfaceMesh build_torus_mesh(const ImplicitSurface& s, int n_major, int n_minor)
{
    LBFEM_THROW_IF(s.kind() != SurfaceKind::Torus, ErrorCode::Unsupported, "torus mesh needs a torus");
    LBFEM_THROW_IF(n_major < 3 || n_minor < 3, ErrorCode::InvalidArgument, "torus grid needs n >= 3");
    const double big_r = s.major_radius();
    const double small_r = s.minor_radius();
    std::vector<Vec3> v;
    v.reserve(static_cast<std::size_t>(n_major * n_minor));
    for (int i = 0; i < n_major; ++i) {
        const double ph = 2.0 * kPi * i / n_major;
        for (int j = 0; j < n_minor; ++j) {
            const double th = 2.0 * kPi * j / n_minor;
            const double ring = big_r + small_r * std::cos(th);
            v.emplace_back(ring * std::cos(ph), ring * std::sin(ph), small_r * std::sin(th));
        }
    }
    auto id = [&](int i, int j) -> Index { return ((i % n_major) * n_minor) + (j % n_minor); };
    std::vector<Tri> tris;
    for (int i = 0; i < n_major; ++i) {
        for (int j = 0; j < n_minor; ++j) {
            const Index a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            if ((v[c] - v[a]).squaredNorm() <= (v[d] - v[b]).squaredNorm()) {
                tris.push_back({a, b, c});
                tris.push_back({a, c, d});
            } else {
                tris.push_back({a, b, d});
                tris.push_back({b, c, d});
            }
        }
    }
    for (Tri& t : tris) t = detail::rotate_longest_first(v, t);
    return SurfaceMesh(std::move(v), std::move(tris));
}

/// 4-way red refinement; new vertices are projected onto the surface.
inline SurfaceMesh refine_uniform(const SurfaceMesh& mesh, const ImplicitSurface& s)
{
    std::vector<Vec3> v = mesh.vertices();
    detail::MidpointCache mid(s, v);
    std::vector<Tri> tris = detail::red_split(mesh.triangles(), mid, v);
    return SurfaceMesh(std::move(v), std::move(tris));
}

/// Newest-vertex bisection of the marked triangles with conformity closure.
/// New vertices are projected onto the surface.
inline SurfaceMesh refine_bisection(const SurfaceMesh& mesh, const std::vector<Index>& marked,
                                    const ImplicitSurface& s)
{
    if (marked.empty()) return mesh;
    const auto& tris = mesh.triangles();
    const auto& edges = mesh.edges();

    std::vector<char> split(edges.size(), 0);
    std::vector<Index> queue;
    auto mark_edge = [&](Index e) {
        if (!split[e]) {
            split[e] = 1;
            queue.push_back(e);
        }
    };
    for (Index t : marked) {
        LBFEM_THROW_IF(t < 0 || t >= mesh.num_triangles(), ErrorCode::InvalidArgument, "marked id out of range");
        mark_edge(mesh.triangle_edge(t, 0));
    }
    while (!queue.empty()) {
        const Index e = queue.back();
        queue.pop_back();
        for (int k = 0; k < edges[e].count && k < 2; ++k) mark_edge(mesh.triangle_edge(edges[e].tri[k], 0));
    }

    std::unordered_set<std::uint64_t> split_keys;
    for (std::size_t e = 0; e < edges.size(); ++e)
        if (split[e]) split_keys.insert(edge_key(edges[e].a, edges[e].b));

    std::vector<Vec3> v = mesh.vertices();
    detail::MidpointCache mid(s, v);
    std::vector<Tri> out;
    out.reserve(tris.size() + 4 * marked.size());
    auto bisect = [&](auto&& self, const Tri& t) -> void {
        if (!split_keys.count(edge_key(t[0], t[1]))) {
            out.push_back(t);
            return;
        }
        const Index m = mid(t[0], t[1]);
        self(self, Tri{t[2], t[0], m});
        self(self, Tri{t[1], t[2], m});
    };
    for (const Tri& t : tris) bisect(bisect, t);
    return SurfaceMesh(std::move(v), std::move(out));
}

} // namespace lbfem
