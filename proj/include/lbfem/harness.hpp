#pragma once

// Run configuration (JSON), convergence studies, EOC tables and reports.

#include "lbfem/estimators.hpp"
#include "lbfem/io.hpp"
#include "lbfem/narrowband.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace lbfem {

using json = nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;

enum class Method { Parametric, Trace, NarrowBand, Adaptive };

inline std::string_view to_string(Method m)
{
    switch (m) {
    case Method::Parametric: return "parametric";
    case Method::Trace: return "trace";
    case Method::NarrowBand: return "narrowband";
    case Method::Adaptive: return "adaptive";
    }
    return "unknown";
}

inline Method parse_method(const std::string& s)
{
    if (s == "parametric") return Method::Parametric;
    if (s == "trace") return Method::Trace;
    if (s == "narrowband" || s == "narrow_band") return Method::NarrowBand;
    if (s == "adaptive" || s == "adapt") return Method::Adaptive;
    throw Error(ErrorCode::Config, "unknown method '" + s + "'");
}

inline LiftKind parse_lift(const std::string& s)
{
    if (s == "closest_point") return LiftKind::ClosestPoint;
    if (s == "scaled_radial") return LiftKind::ScaledRadial;
    throw Error(ErrorCode::Config, "unknown lift '" + s + "'");
}

inline ImplicitSurface surface_from_json(const json& j)
{
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "sphere") return ImplicitSurface::sphere(j.value("radius", 1.0));
        if (kind == "torus") return ImplicitSurface::torus(j.at("major_radius").get<double>(), j.at("minor_radius").get<double>());
        if (kind == "ellipsoid") return ImplicitSurface::ellipsoid(j.at("a").get<double>(), j.at("b").get<double>(), j.at("c").get<double>());
        throw Error(ErrorCode::Config, "unknown surface kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Config, std::string("surface: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Config) throw;
        throw Error(ErrorCode::Config, e.what());
    }
}

inline json surface_to_json(const ImplicitSurface& s)
{
    switch (s.kind()) {
    case SurfaceKind::Sphere: return {{"kind", "sphere"}, {"radius", s.radius()}};
    case SurfaceKind::Torus: return {{"kind", "torus"}, {"major_radius", s.major_radius()}, {"minor_radius", s.minor_radius()}};
    case SurfaceKind::Ellipsoid: {
        const Vec3 a = s.semi_axes();
        return {{"kind", "ellipsoid"}, {"a", a[0]}, {"b", a[1]}, {"c", a[2]}};
    }
    }
    return {};
}

struct RunConfig {
    Method method = Method::Parametric;
    ImplicitSurface surface = ImplicitSurface::sphere(1.0);
    LiftKind lift = LiftKind::ClosestPoint;
    /// Icosphere levels (parametric, adaptive start) or bulk cells per axis (trace, narrowband).
    std::vector<int> levels{2, 3, 4, 5};
    double box_half_width = 0.0; // 0 selects 1.6 * max extent
    double delta_factor = 1.5;
    double theta = 0.5;
    int max_iters = 8;
    double tol = 1e-10;
    int torus_n_major = 16; // torus grid at level 0, doubled per level
    int torus_n_minor = 8;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    /// column -> allowed EOC range for the last two rates (converge --assert).
    std::map<std::string, std::pair<double, double>> eoc_bounds;

    [[nodiscard]] double box() const
    {
        return box_half_width > 0.0 ? box_half_width : 1.6 * surface.extent().maxCoeff();
    }

    void validate() const
    {
        LBFEM_THROW_IF(levels.empty(), ErrorCode::Config, "levels must be nonempty");
        for (std::size_t i = 1; i < levels.size(); ++i)
            LBFEM_THROW_IF(levels[i] <= levels[i - 1], ErrorCode::Config, "levels must be strictly increasing");
        for (int l : levels) LBFEM_THROW_IF(l < 0, ErrorCode::Config, "levels must be >= 0");
        if (method == Method::Trace || method == Method::NarrowBand)
            for (int l : levels) LBFEM_THROW_IF(l < 2, ErrorCode::Config, "bulk cells per axis must be >= 2");
        LBFEM_THROW_IF(!(delta_factor >= 1.0 && delta_factor <= 2.0), ErrorCode::Config, "delta_factor must lie in [1, 2]");
        LBFEM_THROW_IF(!(theta > 0.0 && theta < 1.0), ErrorCode::Config, "theta must lie in (0, 1)");
        LBFEM_THROW_IF(!(tol > 0.0 && tol < 1.0), ErrorCode::Config, "tol must lie in (0, 1)");
        LBFEM_THROW_IF(max_iters < 0, ErrorCode::Config, "max_iters must be >= 0");
        LBFEM_THROW_IF(torus_n_major < 3 || torus_n_minor < 3, ErrorCode::Config, "torus grid needs n >= 3");
        LBFEM_THROW_IF(box_half_width < 0.0, ErrorCode::Config, "box_half_width must be >= 0");
    }
};

/// "a..b" or "a,b,c".
inline std::vector<int> parse_levels(const std::string& text)
{
    std::vector<int> out;
    try {
        const auto dots = text.find("..");
        if (dots != std::string::npos) {
            const int a = std::stoi(text.substr(0, dots));
            const int b = std::stoi(text.substr(dots + 2));
            LBFEM_THROW_IF(b < a, ErrorCode::Config, "empty level range " + text);
            for (int l = a; l <= b; ++l) out.push_back(l);
            return out;
        }
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    } catch (const std::logic_error&) {
        throw Error(ErrorCode::Config, "cannot parse levels '" + text + "'");
    }
    return out;
}

inline RunConfig config_from_json(const json& j)
{
    RunConfig c;
    try {
        if (j.contains("method")) c.method = parse_method(j.at("method").get<std::string>());
        if (j.contains("surface")) c.surface = surface_from_json(j.at("surface"));
        if (j.contains("lift")) c.lift = parse_lift(j.at("lift").get<std::string>());
        if (j.contains("levels")) {
            const json& l = j.at("levels");
            c.levels = l.is_string() ? parse_levels(l.get<std::string>()) : l.get<std::vector<int>>();
        }
        c.box_half_width = j.value("box_half_width", c.box_half_width);
        c.delta_factor = j.value("delta_factor", c.delta_factor);
        c.theta = j.value("theta", c.theta);
        c.max_iters = j.value("max_iters", c.max_iters);
        c.tol = j.value("tol", c.tol);
        c.torus_n_major = j.value("torus_n_major", c.torus_n_major);
        c.torus_n_minor = j.value("torus_n_minor", c.torus_n_minor);
        c.out_dir = j.value("out", c.out_dir);
        c.seed = j.value("seed", c.seed);
        if (j.contains("assert"))
            for (const auto& [col, range] : j.at("assert").items())
                c.eoc_bounds[col] = {range.at(0).get<double>(), range.at(1).get<double>()};
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Config, e.what());
    }
    c.validate();
    return c;
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    LBFEM_THROW_IF(!in, ErrorCode::Config, "cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Config, path + ": " + e.what());
    }
    return config_from_json(j);
}

/// rate_k = log(e_k / e_{k+1}) / log(h_k / h_{k+1}); +inf when e_{k+1} <= 0.
inline std::vector<double> compute_eoc(const std::vector<double>& errors, const std::vector<double>& hs)
{
    LBFEM_THROW_IF(errors.size() != hs.size() || errors.size() < 2, ErrorCode::BadSeries,
                   "need two or more (error, h) pairs of equal length");
    for (double e : errors) LBFEM_THROW_IF(!(e >= 0.0), ErrorCode::BadSeries, "negative error");
    std::vector<double> rates;
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
        LBFEM_THROW_IF(!(hs[k] > 0.0 && hs[k + 1] > 0.0 && hs[k + 1] < hs[k]), ErrorCode::BadSeries,
                       "mesh sizes must be positive and strictly decreasing");
        if (!(errors[k] > 0.0 && errors[k + 1] > 0.0)) {
            rates.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        rates.push_back(std::log(errors[k] / errors[k + 1]) / std::log(hs[k] / hs[k + 1]));
    }
    return rates;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    LBFEM_THROW_IF(x.size() != y.size() || x.size() < 2, ErrorCode::BadSeries, "need two or more points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct EocTable {
    std::vector<std::string> columns;
    std::vector<std::string> rate_columns;
    std::vector<std::vector<double>> rows;
    std::string h_column = "h";

    [[nodiscard]] std::size_t index_of(const std::string& name) const
    {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw Error(ErrorCode::InvalidArgument, "no column '" + name + "'");
    }

    [[nodiscard]] std::vector<double> column(const std::string& name) const
    {
        const std::size_t i = index_of(name);
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(r[i]);
        return out;
    }

    /// Rates between consecutive rows; empty for a single row.
    [[nodiscard]] std::vector<double> rates(const std::string& name) const
    {
        if (rows.size() < 2) return {};
        return compute_eoc(column(name), column(h_column));
    }

    [[nodiscard]] std::string to_csv() const
    {
        std::ostringstream os;
        for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
        for (const auto& rc : rate_columns) os << ",eoc_" << rc;
        os << '\n';
        std::vector<std::vector<double>> r;
        for (const auto& rc : rate_columns) r.push_back(rates(rc));
        for (std::size_t k = 0; k < rows.size(); ++k) {
            for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << detail::fmt_double(rows[k][i]);
            for (const auto& rr : r) {
                os << ',';
                if (k > 0) os << detail::fmt_double(rr[k - 1]);
            }
            os << '\n';
        }
        return os.str();
    }

    [[nodiscard]] json to_json() const
    {
        json j;
        j["columns"] = columns;
        j["rows"] = json::array();
        for (const auto& r : rows) {
            json row;
            for (std::size_t i = 0; i < columns.size(); ++i) row[columns[i]] = r[i];
            j["rows"].push_back(row);
        }
        json eoc = json::object();
        for (const auto& rc : rate_columns) {
            json arr = json::array();
            for (double v : rates(rc)) arr.push_back(std::isfinite(v) ? json(v) : json("inf"));
            eoc[rc] = arr;
        }
        j["eoc"] = eoc;
        return j;
    }
};

inline json config_to_json(const RunConfig& c)
{
    json j;
    j["method"] = std::string(to_string(c.method));
    j["surface"] = surface_to_json(c.surface);
    j["lift"] = std::string(to_string(c.lift));
    j["levels"] = c.levels;
    j["box_half_width"] = c.box();
    j["delta_factor"] = c.delta_factor;
    j["theta"] = c.theta;
    j["max_iters"] = c.max_iters;
    j["tol"] = c.tol;
    j["seed"] = c.seed;
    return j;
}

inline json report_json(const RunConfig& c, const EocTable& t)
{
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["config"] = config_to_json(c);
    j["table"] = t.to_json();
    return j;
}

inline SurfaceMesh initial_surface_mesh(const RunConfig& c, int level)
{
    if (c.surface.kind() == SurfaceKind::Torus)
        return build_torus_mesh(c.surface, c.torus_n_major << level, c.torus_n_minor << level);
    return build_sphere_mesh(c.surface, level);
}

/// Stage name for error messages from run_convergence.
class StageError : public Error {
public:
    StageError(const Error& e, int level, const std::string& stage)
        : Error(e.code(), "level " + std::to_string(level) + ", " + stage + ": " + e.detail())
    {
    }
};

inline EocTable run_parametric(const RunConfig& c)
{
    EocTable t;
    t.columns = {"level", "h", "n_dof", "err_L2", "err_H1", "eta", "osc", "lambda", "beta", "mu", "iterations"};
    t.rate_columns = {"err_L2", "err_H1", "eta", "lambda", "beta", "mu"};
    SolveOptions opt;
    opt.tol = c.tol;
    for (int level : c.levels) {
        std::string stage = "mesh";
        try {
            ParametricProblem p{c.surface, initial_surface_mesh(c, level), c.lift, manufactured(c.surface)};
            stage = "solve";
            const ParametricResult r = parametric_solve(p, opt);
            stage = "estimate";
            const IndicatorField res = residual_estimator_parametric(p.mesh, r.field.coefficients, r.forcing);
            const IndicatorField geo = geometric_estimators_parametric(c.surface, p.mesh, c.lift);
            t.rows.push_back({double(level), r.report.h_max, double(r.report.n_dof), r.report.err_L2, r.report.err_H1,
                              res.eta_total(), res.osc_total(), geo.lambda_total(), geo.beta_total(), geo.mu_total(),
                              double(r.report.iterations)});
        } catch (const Error& e) {
            throw StageError(e, level, stage);
        }
    }
    return t;
}

inline EocTable run_trace(const RunConfig& c)
{
    EocTable t;
    t.columns = {"n", "h", "n_dof", "err_L2", "err_H1", "eta", "xi", "max_d", "max_normal_dev", "iterations"};
    t.rate_columns = {"err_L2", "err_H1", "eta", "xi", "max_d", "max_normal_dev"};
    SolveOptions opt;
    opt.tol = c.tol;
    for (int n : c.levels) {
        std::string stage = "mesh";
        try {
            const TraceProblem p = make_trace_problem(c.surface, c.box(), n, manufactured(c.surface));
            stage = "solve";
            const TraceResult r = trace_solve(p, opt);
            stage = "estimate";
            const IndicatorField est = trace_estimators(p.cut, *p.bulk, r.field.scatter(p.bulk->num_vertices()),
                                                        r.forcing, c.surface);
            t.rows.push_back({double(n), r.report.h_max, double(r.report.n_dof), r.report.err_L2, r.report.err_H1,
                              est.eta_total(), est.xi_total(), r.resolution.max_distance,
                              r.resolution.max_normal_deviation, double(r.report.iterations)});
        } catch (const Error& e) {
            throw StageError(e, n, stage);
        }
    }
    return t;
}

inline EocTable run_narrowband(const RunConfig& c)
{
    EocTable t;
    t.columns = {"n", "h", "delta", "n_dof", "err_L2", "err_H1", "err_band_L2", "err_band_H1", "mean_correction",
                 "iterations"};
    t.rate_columns = {"err_L2", "err_H1", "err_band_L2", "err_band_H1"};
    SolveOptions opt;
    opt.tol = c.tol;
    for (int n : c.levels) {
        std::string stage = "mesh";
        try {
            const NarrowBandProblem p =
                make_narrowband_problem(c.surface, c.box(), n, c.delta_factor, manufactured(c.surface));
            stage = "solve";
            const NarrowBandResult r = narrowband_solve(p, opt);
            t.rows.push_back({double(n), r.band_report.h_max, p.delta, double(r.band_report.n_dof),
                              r.gamma_report.err_L2, r.gamma_report.err_H1, r.band_report.err_L2,
                              r.band_report.err_H1, std::abs(r.forcing.mean), double(r.band_report.iterations)});
        } catch (const Error& e) {
            throw StageError(e, n, stage);
        }
    }
    return t;
}

/// History table (iter, n_dof, err_H1, err_L2, eta, lambda, beta, mu); rates are
/// taken against n_dof^(-1/2) as the mesh-size proxy.
inline EocTable run_adaptive(const RunConfig& c)
{
    EocTable t;
    t.columns = {"iter", "n_dof", "err_H1", "err_L2", "eta", "lambda", "beta", "mu"};
    SolveOptions opt;
    opt.tol = c.tol;
    std::vector<AdaptStep> hist;
    try {
        hist = adapt_loop(c.surface, initial_surface_mesh(c, c.levels.front()), manufactured(c.surface), c.theta,
                          c.max_iters, c.lift, 0.0, opt);
    } catch (const Error& e) {
        throw StageError(e, c.levels.front(), "adapt");
    }
    for (const AdaptStep& s : hist)
        t.rows.push_back({double(s.iteration), double(s.n_dof), s.err_H1, s.err_L2, s.eta, s.lambda, s.beta, s.mu});
    return t;
}

inline EocTable run_convergence(const RunConfig& c)
{
    c.validate();
    switch (c.method) {
    case Method::Parametric: return run_parametric(c);
    case Method::Trace: return run_trace(c);
    case Method::NarrowBand: return run_narrowband(c);
    case Method::Adaptive: return run_adaptive(c);
    }
    throw Error(ErrorCode::Config, "unknown method");
}

struct AssertionOutcome {
    std::string column;
    std::vector<double> rates; // the last two (or one) rates checked
    double lo = 0.0, hi = 0.0;
    bool passed = false;
};

/// Checks the last two EOCs of each bounded column.
inline std::vector<AssertionOutcome> check_eoc_bounds(const EocTable& t,
                                                      const std::map<std::string, std::pair<double, double>>& bounds)
{
    std::vector<AssertionOutcome> out;
    for (const auto& [col, range] : bounds) {
        AssertionOutcome a{col, {}, range.first, range.second, false};
        const auto r = t.rates(col);
        for (std::size_t k = r.size() >= 2 ? r.size() - 2 : 0; k < r.size(); ++k) a.rates.push_back(r[k]);
        a.passed = !a.rates.empty();
        for (double v : a.rates) a.passed = a.passed && v >= range.first && v <= range.second;
        out.push_back(a);
    }
    return out;
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream os(path);
    LBFEM_THROW_IF(!os, ErrorCode::Config, "cannot write " + path);
    os << text;
}

} // namespace lbfem
