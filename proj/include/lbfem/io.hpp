#pragma once

// ASCII OFF for triangulated surfaces, legacy ASCII VTK for tetrahedral meshes.

#include "lbfem/bulk_mesh.hpp"
#include "lbfem/surface_mesh.hpp"

#include <cstdio>
#include <ostream>
#include <string>

namespace lbfem {

namespace detail {

inline std::string fmt_point(const Vec3& p)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g", p.x(), p.y(), p.z());
    return buf;
}

inline std::string fmt_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline void write_off(std::ostream& os, const std::vector<Vec3>& points, const std::vector<std::array<Index, 3>>& tris)
{
    os << "OFF\n" << points.size() << ' ' << tris.size() << " 0\n";
    for (const Vec3& p : points) os << detail::fmt_point(p) << '\n';
    for (const auto& t : tris) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

inline void write_off(std::ostream& os, const SurfaceMesh& mesh)
{
    write_off(os, mesh.vertices(), mesh.triangles());
}

inline void write_off(std::ostream& os, const CutSurface& cut)
{
    std::vector<std::array<Index, 3>> tris;
    tris.reserve(cut.faces.size());
    for (const CutFace& f : cut.faces) tris.push_back(f.points);
    write_off(os, cut.points, tris);
}

/// Unstructured grid of the given tetrahedra (all when `subset` is empty), with
/// d_h as point data when `point_values` is non-empty.
inline void write_vtk(std::ostream& os, const BulkMesh& bulk, const std::vector<Index>& subset = {},
                      const std::vector<double>& point_values = {}, const std::string& title = "lbfem bulk mesh")
{
    std::vector<Index> tets = subset;
    if (tets.empty()) {
        tets.resize(static_cast<std::size_t>(bulk.num_tets()));
        for (Index t = 0; t < bulk.num_tets(); ++t) tets[t] = t;
    }
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << bulk.num_vertices() << " double\n";
    for (const Vec3& p : bulk.vertices()) os << detail::fmt_point(p) << '\n';
    os << "CELLS " << tets.size() << ' ' << tets.size() * 5 << '\n';
    for (Index t : tets) {
        const Tet& tt = bulk.tets()[t];
        os << "4 " << tt[0] << ' ' << tt[1] << ' ' << tt[2] << ' ' << tt[3] << '\n';
    }
    os << "CELL_TYPES " << tets.size() << '\n';
    for (std::size_t i = 0; i < tets.size(); ++i) os << "10\n";
    if (!point_values.empty()) {
        os << "POINT_DATA " << bulk.num_vertices() << "\nSCALARS d_h double 1\nLOOKUP_TABLE default\n";
        for (double v : point_values) os << detail::fmt_double(v) << '\n';
    }
}

} // namespace lbfem
