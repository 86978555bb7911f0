// lbfem: command line driver for solves, convergence studies, adaptivity,
// mesh export and the geometry property suite.

#include "lbfem/lbfem.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace lbfem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitThreshold = 4;

struct Overrides {
    std::string config;
    std::string out;
    std::string method;
    std::string levels;
    std::int64_t seed = -1;
};

RunConfig resolve(const Overrides& o, json* raw = nullptr)
{
    json j = json::object();
    if (!o.config.empty()) {
        std::ifstream in(o.config);
        LBFEM_THROW_IF(!in, ErrorCode::Config, "cannot open config " + o.config);
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw Error(ErrorCode::Config, o.config + ": " + e.what());
        }
    }
    if (!o.method.empty()) j["method"] = o.method;
    if (!o.levels.empty()) j["levels"] = o.levels;
    if (!o.out.empty()) j["out"] = o.out;
    if (o.seed >= 0) j["seed"] = o.seed;
    if (raw) *raw = j;
    return config_from_json(j);
}

fs::path out_dir(const RunConfig& c)
{
    fs::path p(c.out_dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    LBFEM_THROW_IF(ec, ErrorCode::Config, "cannot create output directory " + c.out_dir);
    return p;
}

void print_table(const EocTable& t)
{
    std::cout << t.to_csv();
}

void write_reports(const RunConfig& c, const EocTable& t, const std::string& stem)
{
    const fs::path dir = out_dir(c);
    write_text((dir / (stem + ".csv")).string(), t.to_csv());
    write_text((dir / (stem + ".json")).string(), report_json(c, t).dump(2) + "\n");
}

int cmd_solve(const Overrides& o)
{
    RunConfig c = resolve(o);
    c.levels = {c.levels.back()};
    const EocTable t = run_convergence(c);
    print_table(t);
    write_reports(c, t, "solve_" + std::string(to_string(c.method)));
    return kExitOk;
}

int cmd_converge(const Overrides& o, bool assert_rates)
{
    const RunConfig c = resolve(o);
    const auto t0 = std::chrono::steady_clock::now();
    const EocTable t = run_convergence(c);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    print_table(t);
    write_reports(c, t, "converge_" + std::string(to_string(c.method)));
    std::fprintf(stderr, "elapsed %.2f s\n", secs);
    if (!assert_rates) return kExitOk;
    LBFEM_THROW_IF(c.eoc_bounds.empty(), ErrorCode::Config, "--assert needs an \"assert\" section in the config");
    bool ok = true;
    for (const auto& a : check_eoc_bounds(t, c.eoc_bounds)) {
        std::string rates;
        for (double r : a.rates) rates += (rates.empty() ? "" : " ") + detail::fmt_double(r);
        std::printf("%s eoc_%s [%s] in [%g, %g]\n", a.passed ? "PASS" : "FAIL", a.column.c_str(), rates.c_str(), a.lo,
                    a.hi);
        ok = ok && a.passed;
    }
    return ok ? kExitOk : kExitThreshold;
}

int cmd_adapt(const Overrides& o)
{
    RunConfig c = resolve(o);
    c.method = Method::Adaptive;
    const EocTable t = run_convergence(c);
    print_table(t);
    write_reports(c, t, "adapt");
    return kExitOk;
}

int cmd_export(const Overrides& o)
{
    json raw;
    const RunConfig c = resolve(o, &raw);
    const json mesh = raw.value("mesh", json::object());
    const std::string kind = mesh.value("kind", c.method == Method::Parametric ? "surface" : "cut");
    const fs::path dir = out_dir(c);
    const int level = c.levels.back();
    std::string path;
    if (kind == "surface") {
        const SurfaceMesh m = initial_surface_mesh(c, level);
        path = (dir / mesh.value("file", "surface.off")).string();
        std::ofstream os(path);
        write_off(os, m);
    } else if (kind == "cut") {
        const BulkMesh b = build_bulk_mesh(c.surface, c.box(), level);
        path = (dir / mesh.value("file", "cut.off")).string();
        std::ofstream os(path);
        write_off(os, extract_cut_surface(b, c.surface));
    } else if (kind == "bulk" || kind == "band") {
        const BulkMesh b = build_bulk_mesh(c.surface, c.box(), level);
        std::vector<Index> subset;
        if (kind == "band") subset = extract_band(b, c.surface, c.delta_factor * b.h()).tets;
        path = (dir / mesh.value("file", kind + ".vtk")).string();
        std::ofstream os(path);
        write_vtk(os, b, subset, interpolated_distance(b, c.surface), "lbfem " + kind);
    } else {
        throw Error(ErrorCode::Config, "unknown mesh kind '" + kind + "' (surface, cut, bulk, band)");
    }
    std::cout << path << '\n';
    return kExitOk;
}

int cmd_check_geometry(const Overrides& o, int points)
{
    json raw;
    const RunConfig c = resolve(o, &raw);
    std::vector<ImplicitSurface> surfaces;
    if (raw.contains("surface")) surfaces.push_back(c.surface);
    else
        surfaces = {ImplicitSurface::sphere(1.0), ImplicitSurface::torus(1.0, 0.4),
                    ImplicitSurface::ellipsoid(1.3, 1.0, 0.8)};
    bool ok = true;
    for (const auto& s : surfaces)
        for (const PropertyCheck& pc : check_geometry(s, points, c.seed)) {
            std::printf("%s %-12s %-34s max %.3e tol %.1e\n", pc.passed() ? "PASS" : "FAIL", s.name().c_str(),
                        pc.name.c_str(), pc.max_error, pc.tolerance);
            ok = ok && pc.passed();
        }
    return ok ? kExitOk : kExitThreshold;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Laplace-Beltrami finite elements on implicit surfaces"};
    app.require_subcommand(1);
    Overrides o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON run configuration");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--method", o.method, "parametric, trace, narrowband or adaptive");
        sub->add_option("--levels", o.levels, "levels as a..b or a,b,c");
        sub->add_option("--seed", o.seed, "random seed");
    };
    bool assert_rates = false;
    int points = 1000;

    auto* solve = app.add_subcommand("solve", "solve on the finest configured level");
    auto* converge = app.add_subcommand("converge", "convergence study with EOC table");
    auto* adapt = app.add_subcommand("adapt", "adaptive parametric loop");
    auto* exp = app.add_subcommand("export-mesh", "write a mesh as OFF or VTK");
    auto* geo = app.add_subcommand("check-geometry", "distance-function property suite");
    for (auto* s : {solve, converge, adapt, exp, geo}) add_common(s);
    converge->add_flag("--assert", assert_rates, "exit 4 when the last two rates leave the configured bounds");
    geo->add_option("--points", points, "random tube points per surface");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*solve) return cmd_solve(o);
        if (*converge) return cmd_converge(o, assert_rates);
        if (*adapt) return cmd_adapt(o);
        if (*exp) return cmd_export(o);
        if (*geo) return cmd_check_geometry(o, points);
    } catch (const Error& e) {
        std::fprintf(stderr, "error [%s]: %s\n", std::string(to_string(e.code())).c_str(), e.detail().c_str());
        return e.code() == ErrorCode::Config || e.code() == ErrorCode::InvalidArgument ? kExitConfig : kExitNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    }
    return kExitOk;
}
