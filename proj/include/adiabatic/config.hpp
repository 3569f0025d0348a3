#pragma once

// Run configuration: strict JSON schema with explicit defaults.
//
// {
//   "model": {
//     "family": "landau_zener_window",      required
//     "dim": 2,                             default 2
//     "initial_state": 0,                   default 0
//     "time_scale": 1.0,                    default 1 (E = lambda / tau)
//     "params": { ... }                     family-specific, see below
//   },
//   "lambda": 50 | [50, 100, ...],          required, > 0
//   "duration": 1.0 | [5, 10, ...],         default 1, > 0
//   "K": 2,                                 expansion order, 0..6
//   "grid": { "policy": "oscillation_resolving" | "uniform",
//             "points_per_period": 128, "max_step": 1e-3,
//             "intervals": 2000, "max_nodes": 20000000 },
//   "oracle": { "rtol": 1e-10, "slices": 100000, "residual_threshold": 1e-6 },
//   "gap_tol": 1e-3,
//   "output_dir": "results",
//   "reports": { "scaling_fit": true, "bound_check": true,
//                "berry_check": false, "secular_probe": false },
//   "seed": 0
// }
//
// Matrices are arrays of rows; an entry is a number or [re, im].
// Family params:
//   constant               h0
//   rotated_frame          h0, generator
//   rotating_spin          cone_angle, revolutions
//   landau_zener_window    gap, sweep_rate
//   smooth_interpolation   h0, h1
//   flat_endpoint_ramp     h0, h1
//   user_matrix_polynomial coefficients | random {degree, scale}
// and every family accepts analytic_derivative (bool).
//
// At most one of lambda / duration may be a list (the sweep axis).

#include "adiabatic/error.hpp"
#include "adiabatic/hamiltonian_models.hpp"
#include "adiabatic/pipeline.hpp"
#include "adiabatic/spectral_frame.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace adiabatic {

using json = nlohmann::ordered_json;

enum class SweepAxis { none, lambda, duration };

struct OracleOptions {
    double rtol = 1e-10;
    std::size_t slices = 100'000;
    double residual_threshold = 1e-6;
};

struct ReportToggles {
    bool scaling_fit = true;
    bool bound_check = true;
    bool berry_check = false;
    bool secular_probe = false;
};

struct RunConfig {
    ModelSpec model;
    std::vector<double> lambdas;
    std::vector<double> durations{1.0};
    int K = 2;
    GridOptions grid;
    double gap_tol = 1e-3;
    OracleOptions oracle;
    std::string output_dir = "results";
    ReportToggles reports;
    std::uint64_t seed = 0;
    /// normalized config with every default filled in; hashed into the manifest
    json canonical;

    SweepAxis axis() const noexcept
    {
        if(lambdas.size() > 1)
            return SweepAxis::lambda;
        if(durations.size() > 1)
            return SweepAxis::duration;
        return SweepAxis::none;
    }

    std::size_t point_count() const noexcept { return lambdas.size() * durations.size(); }

    PipelineOptions pipeline_options() const
    {
        PipelineOptions opt;
        opt.grid = grid;
        opt.frame.gap_tol = gap_tol;
        opt.order = K;
        return opt;
    }
};

namespace detail {

inline Error invalid(const std::string& field, const std::string& why)
{
    return Error(ErrorKind::ValidationError, field + ": " + why, field);
}

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                                const std::string& where)
{
    if(!obj.is_object())
        throw invalid(where.empty() ? "config" : where, "must be an object");
    for(auto it = obj.begin(); it != obj.end(); ++it)
        if(!allowed.count(it.key()))
            throw invalid(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

inline double get_number(const json& j, const std::string& field)
{
    if(!j.is_number())
        throw invalid(field, "must be a number");
    const double v = j.get<double>();
    if(!std::isfinite(v))
        throw invalid(field, "must be finite");
    return v;
}

inline long long get_integer(const json& j, const std::string& field)
{
    if(!j.is_number_integer())
        throw invalid(field, "must be an integer");
    return j.get<long long>();
}

inline bool get_bool(const json& j, const std::string& field)
{
    if(!j.is_boolean())
        throw invalid(field, "must be true or false");
    return j.get<bool>();
}

inline cx_double get_complex(const json& j, const std::string& field)
{
    if(j.is_number())
        return {get_number(j, field), 0.0};
    if(j.is_array() && j.size() == 2)
        return {get_number(j[0], field), get_number(j[1], field)};
    throw invalid(field, "matrix entries are numbers or [re, im] pairs");
}

inline Matrix get_matrix(const json& j, const std::string& field)
{
    if(!j.is_array() || j.empty() || !j[0].is_array())
        throw invalid(field, "must be an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for(Eigen::Index r = 0; r < rows; ++r)
    {
        const auto& row = j[static_cast<std::size_t>(r)];
        if(!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw invalid(field, "rows must have equal length");
        for(Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = get_complex(row[static_cast<std::size_t>(c)], field);
    }
    return m;
}

inline json matrix_to_json(const Matrix& m)
{
    json rows = json::array();
    for(Eigen::Index r = 0; r < m.rows(); ++r)
    {
        json row = json::array();
        for(Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<double> get_axis(const json& j, const std::string& field)
{
    std::vector<double> out;
    if(j.is_array())
    {
        if(j.empty())
            throw invalid(field, "sweep list is empty");
        for(const auto& v : j)
            out.push_back(get_number(v, field));
    }
    else
        out.push_back(get_number(j, field));
    for(double v : out)
        if(!(v > 0))
            throw invalid(field, "values must be > 0");
    std::vector<double> sorted = out;
    std::sort(sorted.begin(), sorted.end());
    if(std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw invalid(field, "sweep values must be distinct");
    return out;
}

inline std::set<std::string> allowed_params(Family f)
{
    std::set<std::string> keys{"analytic_derivative"};
    switch(f)
    {
    case Family::constant: keys.insert("h0"); break;
    case Family::rotated_frame: keys.insert({"h0", "generator"}); break;
    case Family::rotating_spin: keys.insert({"cone_angle", "revolutions"}); break;
    case Family::landau_zener_window: keys.insert({"gap", "sweep_rate"}); break;
    case Family::smooth_interpolation:
    case Family::flat_endpoint_ramp: keys.insert({"h0", "h1"}); break;
    case Family::user_matrix_polynomial: keys.insert({"coefficients", "random"}); break;
    }
    return keys;
}

// 1-based line/column of a byte offset
inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset)
{
    std::size_t line = 1, col = 1;
    for(std::size_t i = 0; i < std::min(offset, text.size()); ++i)
    {
        if(text[i] == '\n')
        {
            ++line;
            col = 1;
        }
        else
            ++col;
    }
    return {line, col};
}

inline ModelSpec parse_model(const json& m, std::uint64_t seed, json& canon)
{
    reject_unknown_keys(m, {"family", "dim", "initial_state", "time_scale", "params"}, "model");
    if(!m.contains("family") || !m["family"].is_string())
        throw invalid("model.family", "required string");
    ModelSpec spec;
    try
    {
        spec.family = parse_family(m["family"].get<std::string>());
    }
    catch(const Error& e)
    {
        throw Error(ErrorKind::UnknownFamily, e.what(), "model.family");
    }
    spec.seed = seed;
    if(m.contains("dim"))
        spec.dim = static_cast<int>(get_integer(m["dim"], "model.dim"));
    if(spec.dim < 2 || spec.dim > 8)
        throw invalid("model.dim", "must lie in [2, 8]");
    if(m.contains("initial_state"))
        spec.initial_state_index = static_cast<int>(get_integer(m["initial_state"], "model.initial_state"));
    if(spec.initial_state_index < 0 || spec.initial_state_index >= spec.dim)
        throw invalid("model.initial_state", "must lie in [0, dim)");
    if(m.contains("time_scale"))
        spec.scales.time_scale = get_number(m["time_scale"], "model.time_scale");
    if(!(spec.scales.time_scale > 0))
        throw invalid("model.time_scale", "must be > 0");

    canon["family"] = std::string(to_string(spec.family));
    canon["dim"] = spec.dim;
    canon["initial_state"] = spec.initial_state_index;
    canon["time_scale"] = spec.scales.time_scale;
    json cp = json::object();

    auto& p = spec.params;
    const json params = m.contains("params") ? m["params"] : json::object();
    reject_unknown_keys(params, allowed_params(spec.family), "model.params");
    auto number = [&](const char* key, double& slot) {
        if(params.contains(key))
            slot = get_number(params[key], std::string("model.params.") + key);
        cp[key] = slot;
    };
    auto matrix = [&](const char* key, std::optional<Matrix>& slot) {
        if(params.contains(key))
        {
            slot = get_matrix(params[key], std::string("model.params.") + key);
            cp[key] = matrix_to_json(*slot);
        }
    };
    switch(spec.family)
    {
    case Family::constant: matrix("h0", p.h0); break;
    case Family::rotated_frame:
        matrix("h0", p.h0);
        matrix("generator", p.generator);
        break;
    case Family::rotating_spin:
        number("cone_angle", p.cone_angle);
        number("revolutions", p.revolutions);
        break;
    case Family::landau_zener_window:
        number("gap", p.gap);
        number("sweep_rate", p.sweep_rate);
        break;
    case Family::smooth_interpolation:
    case Family::flat_endpoint_ramp:
        matrix("h0", p.h0);
        matrix("h1", p.h1);
        break;
    case Family::user_matrix_polynomial:
        if(params.contains("coefficients"))
        {
            const auto& c = params["coefficients"];
            if(!c.is_array() || c.empty())
                throw invalid("model.params.coefficients", "must be a non-empty list of matrices");
            json cc = json::array();
            for(std::size_t k = 0; k < c.size(); ++k)
            {
                p.coefficients.push_back(
                    get_matrix(c[k], "model.params.coefficients[" + std::to_string(k) + "]"));
                cc.push_back(matrix_to_json(p.coefficients.back()));
            }
            cp["coefficients"] = cc;
        }
        if(params.contains("random"))
        {
            const auto& r = params["random"];
            reject_unknown_keys(r, {"degree", "scale"}, "model.params.random");
            RandomPolynomial rp;
            if(r.contains("degree"))
                rp.degree = static_cast<int>(get_integer(r["degree"], "model.params.random.degree"));
            if(r.contains("scale"))
                rp.scale = get_number(r["scale"], "model.params.random.scale");
            p.random = rp;
            cp["random"] = {{"degree", rp.degree}, {"scale", rp.scale}};
        }
        if(p.coefficients.empty() && !p.random)
            throw invalid("model.params.coefficients", "coefficients or random is required");
        if(!p.coefficients.empty() && p.random)
            throw invalid("model.params.random", "give either coefficients or random, not both");
        break;
    }
    if(params.contains("analytic_derivative"))
        p.analytic_derivative = get_bool(params["analytic_derivative"], "model.params.analytic_derivative");
    cp["analytic_derivative"] = p.analytic_derivative;
    canon["params"] = cp;
    return spec;
}

} // namespace detail

/// Validates a parsed JSON document against the schema and applies defaults.
inline RunConfig config_from_json(const json& root)
{
    using namespace detail;
    reject_unknown_keys(root,
                        {"model", "lambda", "duration", "K", "grid", "oracle", "gap_tol",
                         "output_dir", "reports", "seed"},
                        "");
    RunConfig cfg;
    json canon = json::object();

    if(root.contains("seed"))
    {
        const auto& s = root["seed"];
        if(!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            throw invalid("seed", "must be a non-negative integer");
        cfg.seed = s.get<std::uint64_t>();
    }

    if(!root.contains("model"))
        throw invalid("model", "required");
    json model_canon = json::object();
    cfg.model = parse_model(root["model"], cfg.seed, model_canon);
    canon["model"] = model_canon;

    if(!root.contains("lambda"))
        throw invalid("lambda", "required");
    cfg.lambdas = get_axis(root["lambda"], "lambda");
    if(root.contains("duration"))
        cfg.durations = get_axis(root["duration"], "duration");
    if(root["lambda"].is_array() && root.contains("duration") && root["duration"].is_array())
        throw invalid("duration", "only one of lambda and duration may be a sweep list");
    canon["lambda"] = root["lambda"].is_array() ? json(cfg.lambdas) : json(cfg.lambdas.front());
    canon["duration"] = (root.contains("duration") && root["duration"].is_array())
                            ? json(cfg.durations)
                            : json(cfg.durations.front());

    if(root.contains("K"))
        cfg.K = static_cast<int>(get_integer(root["K"], "K"));
    if(cfg.K < 0 || cfg.K > 6)
        throw invalid("K", "expansion order must lie in [0, 6]");
    canon["K"] = cfg.K;

    if(root.contains("grid"))
    {
        const auto& g = root["grid"];
        reject_unknown_keys(g, {"policy", "points_per_period", "max_step", "intervals", "max_nodes"},
                            "grid");
        if(g.contains("policy"))
        {
            if(!g["policy"].is_string())
                throw invalid("grid.policy", "must be a string");
            const auto p = g["policy"].get<std::string>();
            if(p == "uniform")
                cfg.grid.policy = GridPolicy::uniform;
            else if(p == "oscillation_resolving")
                cfg.grid.policy = GridPolicy::oscillation_resolving;
            else
                throw invalid("grid.policy", "must be uniform or oscillation_resolving");
        }
        if(g.contains("points_per_period"))
            cfg.grid.points_per_period = get_number(g["points_per_period"], "grid.points_per_period");
        if(g.contains("max_step"))
            cfg.grid.max_step = get_number(g["max_step"], "grid.max_step");
        if(g.contains("intervals"))
        {
            const auto n = get_integer(g["intervals"], "grid.intervals");
            if(n < 2)
                throw invalid("grid.intervals", "must be >= 2");
            cfg.grid.uniform_intervals = static_cast<std::size_t>(n);
        }
        if(g.contains("max_nodes"))
        {
            const auto n = get_integer(g["max_nodes"], "grid.max_nodes");
            if(n < 3)
                throw invalid("grid.max_nodes", "must be >= 3");
            cfg.grid.max_nodes = static_cast<std::size_t>(n);
        }
    }
    if(!(cfg.grid.points_per_period >= 8))
        throw invalid("grid.points_per_period", "must be >= 8");
    if(!(cfg.grid.max_step > 0))
        throw invalid("grid.max_step", "must be > 0");
    canon["grid"] = {{"policy", std::string(to_string(cfg.grid.policy))},
                     {"points_per_period", cfg.grid.points_per_period},
                     {"max_step", cfg.grid.max_step},
                     {"intervals", cfg.grid.uniform_intervals},
                     {"max_nodes", cfg.grid.max_nodes}};

    if(root.contains("oracle"))
    {
        const auto& o = root["oracle"];
        reject_unknown_keys(o, {"rtol", "slices", "residual_threshold"}, "oracle");
        if(o.contains("rtol"))
            cfg.oracle.rtol = get_number(o["rtol"], "oracle.rtol");
        if(o.contains("slices"))
        {
            const auto n = get_integer(o["slices"], "oracle.slices");
            if(n < 1 || n > 100'000'000)
                throw invalid("oracle.slices", "must lie in [1, 1e8]");
            cfg.oracle.slices = static_cast<std::size_t>(n);
        }
        if(o.contains("residual_threshold"))
            cfg.oracle.residual_threshold = get_number(o["residual_threshold"], "oracle.residual_threshold");
    }
    if(!(cfg.oracle.rtol >= 1e-13 && cfg.oracle.rtol <= 1e-6))
        throw invalid("oracle.rtol", "must lie in [1e-13, 1e-6]");
    if(!(cfg.oracle.residual_threshold > 0))
        throw invalid("oracle.residual_threshold", "must be > 0");
    canon["oracle"] = {{"rtol", cfg.oracle.rtol},
                       {"slices", cfg.oracle.slices},
                       {"residual_threshold", cfg.oracle.residual_threshold}};

    if(root.contains("gap_tol"))
        cfg.gap_tol = get_number(root["gap_tol"], "gap_tol");
    if(!(cfg.gap_tol > 0))
        throw invalid("gap_tol", "must be > 0");
    canon["gap_tol"] = cfg.gap_tol;

    if(root.contains("output_dir"))
    {
        if(!root["output_dir"].is_string() || root["output_dir"].get<std::string>().empty())
            throw invalid("output_dir", "must be a non-empty string");
        cfg.output_dir = root["output_dir"].get<std::string>();
    }
    canon["output_dir"] = cfg.output_dir;

    if(root.contains("reports"))
    {
        const auto& r = root["reports"];
        reject_unknown_keys(r, {"scaling_fit", "bound_check", "berry_check", "secular_probe"},
                            "reports");
        if(r.contains("scaling_fit"))
            cfg.reports.scaling_fit = get_bool(r["scaling_fit"], "reports.scaling_fit");
        if(r.contains("bound_check"))
            cfg.reports.bound_check = get_bool(r["bound_check"], "reports.bound_check");
        if(r.contains("berry_check"))
            cfg.reports.berry_check = get_bool(r["berry_check"], "reports.berry_check");
        if(r.contains("secular_probe"))
            cfg.reports.secular_probe = get_bool(r["secular_probe"], "reports.secular_probe");
    }
    if(cfg.reports.berry_check && cfg.model.family != Family::rotating_spin)
        throw invalid("reports.berry_check", "requires the rotating_spin family");
    if(cfg.reports.secular_probe && cfg.K < 2)
        throw invalid("reports.secular_probe", "requires K >= 2");
    canon["reports"] = {{"scaling_fit", cfg.reports.scaling_fit},
                        {"bound_check", cfg.reports.bound_check},
                        {"berry_check", cfg.reports.berry_check},
                        {"secular_probe", cfg.reports.secular_probe}};
    canon["seed"] = cfg.seed;

    // the model itself must build at every point
    for(double l : cfg.lambdas)
        for(double s : cfg.durations)
            (void)build_model(with_point(cfg.model, l, s));

    cfg.canonical = std::move(canon);
    return cfg;
}

inline RunConfig parse_config(const std::string& text)
{
    json root;
    try
    {
        root = json::parse(text);
    }
    catch(const json::parse_error& e)
    {
        const auto [line, col] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        throw Error(ErrorKind::ParseError,
                    "line " + std::to_string(line) + ", column " + std::to_string(col) + ": "
                        + e.what());
    }
    return config_from_json(root);
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if(!in)
        throw Error(ErrorKind::IoError, "cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// FNV-1a 64 of the canonical config, as 16 hex digits.
inline std::string config_hash(const RunConfig& cfg)
{
    const std::string text = cfg.canonical.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for(unsigned char c : text)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace adiabatic
