#pragma once

// Single runs, parallel sweeps, and result files (CSV, JSON summary, JSON
// manifest).

#include "adiabatic/asymptotics.hpp"
#include "adiabatic/config.hpp"
#include "adiabatic/error.hpp"
#include "adiabatic/exact_propagator.hpp"
#include "adiabatic/jump_expansion.hpp"
#include "adiabatic/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace adiabatic {

inline constexpr const char* tool_version = "1.0.0";

struct PointError {
    ErrorKind kind = ErrorKind::NumericalFailure;
    std::string stage;
    std::string message;
};

struct RunResult {
    double lambda = 0.0;
    double duration = 0.0;
    int dim = 0;
    int m0 = 0;
    int K = 0;
    std::size_t grid_intervals = 0;
    std::optional<PointError> error;

    /// eigenbasis_terms[k][m] = exp(-i lambda f_m(S)) A~_m^(k)(S)
    std::vector<std::vector<cx_double>> eigenbasis_terms;
    /// moving-frame amplitudes from the ODE oracle, A~_m^exact
    std::vector<cx_double> exact_moving;
    /// ||psi_exact - psi^(<=k)|| for k = 0..K
    std::vector<double> truncation_residuals;
    CrossValidation oracle;
    double gamma = 0.0;
    double bound = 0.0;
    double bound_margin = 0.0; ///< bound - max_m |A~_m^(1)(S)|, when K >= 1
    double first_order_envelope = 0.0;
    /// relative-phase boundary terms for each m != m0 (zero at m0)
    std::vector<cx_double> boundary_terms;
    double boundary_residual = 0.0;
    bool boundary_regime_ok = true;
    std::optional<double> geometric_phase;
    std::optional<double> expected_geometric_phase;
    std::vector<std::string> warnings;

    bool ok() const noexcept { return !error.has_value(); }
};

struct SweepResult {
    SweepAxis axis = SweepAxis::none;
    std::vector<RunResult> points; ///< sorted by (lambda, duration)
    std::optional<ScalingReport> first_order;
    std::optional<ScalingReport> secular;
    std::size_t failures = 0;
};

namespace detail {

inline double wrap_phase(double x)
{
    x = std::remainder(x, 2.0 * pi);
    return x <= -pi ? x + 2.0 * pi : x;
}

} // namespace detail

/// Full pipeline at one (lambda, S): expansion to K, both oracles, residuals,
/// bound margin and boundary asymptotics. Errors carry the failing stage.
inline RunResult run_point(const RunConfig& cfg, double lambda, double duration)
{
    RunResult r;
    r.lambda = lambda;
    r.duration = duration;
    r.K = cfg.K;

    const PipelineOptions opt = cfg.pipeline_options();
    const Pipeline p = run_pipeline(with_point(cfg.model, lambda, duration), opt);
    const Model& model = p.m();
    const int dim = model.dim();
    const int m0 = model.initial_state_index();
    r.dim = dim;
    r.m0 = m0;
    r.grid_intervals = p.grid.intervals();

    r.eigenbasis_terms.assign(static_cast<std::size_t>(cfg.K) + 1, std::vector<cx_double>(static_cast<std::size_t>(dim)));
    for(int k = 0; k <= cfg.K; ++k)
        for(int m = 0; m < dim; ++m)
            r.eigenbasis_terms[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)]
                = std::polar(1.0, -lambda * p.phases.at_end(m)) * p.series.at_end(k, m);

    const Vector psi0 = p.frame.vectors.front().col(m0);
    const auto ode = detail::staged("oracle", [&] { return propagate_ode(model, lambda, cfg.oracle.rtol, psi0); });
    const auto slicing = detail::staged("oracle", [&] { return propagate_slicing(model, lambda, cfg.oracle.slices, psi0); });
    r.oracle.threshold = cfg.oracle.residual_threshold;
    r.oracle.state_residual = (ode.state - slicing.state).norm();
    r.oracle.level_residuals = (p.frame.vectors.back().adjoint() * (ode.state - slicing.state)).cwiseAbs();
    r.oracle.ode_drift = ode.norm_drift;
    r.oracle.slicing_drift = slicing.norm_drift;
    const double phase_per_slice = lambda * p.frame.spectral_width() * duration / static_cast<double>(cfg.oracle.slices);
    r.oracle.insufficient_resolution = r.oracle.state_residual > cfg.oracle.residual_threshold || phase_per_slice > 0.25;
    if(r.oracle.insufficient_resolution)
        r.warnings.push_back("oracle cross-check residual above threshold; increase oracle.slices");

    const Vector exact = moving_amplitudes(ode.state, p.frame, p.phases, lambda);
    r.exact_moving.assign(exact.data(), exact.data() + exact.size());
    for(int k = 0; k <= cfg.K; ++k)
        r.truncation_residuals.push_back((ode.state - assemble_state(p.series, p.frame, p.phases, lambda, k)).norm());

    r.gamma = coupling_gamma(p.kernel, m0);
    r.bound = standard_bound(p.kernel, lambda, m0);
    r.boundary_terms.assign(static_cast<std::size_t>(dim), cx_double{});
    r.boundary_regime_ok = boundary_regime_ok(duration);
    if(!r.boundary_regime_ok)
        r.warnings.push_back("boundary asymptotics assume S of order one");
    if(cfg.K >= 1)
    {
        double max_first = 0.0;
        for(int m = 0; m < dim; ++m)
        {
            if(m == m0)
                continue;
            max_first = std::max(max_first, std::abs(p.series.at_end(1, m)));
            r.first_order_envelope = std::max(r.first_order_envelope, amplitude_envelope(p, 1, m));
            r.boundary_terms[static_cast<std::size_t>(m)] = boundary_asymptotic(p.frame, p.kernel, p.phases, m, lambda, m0);
            const double df = p.phases.at_end(m) - p.phases.at_end(m0);
            const cx_double numeric = std::polar(1.0, -lambda * df) * p.series.at_end(1, m);
            r.boundary_residual = std::max(r.boundary_residual, std::abs(numeric - r.boundary_terms[static_cast<std::size_t>(m)]));
        }
        r.bound_margin = r.bound - max_first;
        if(cfg.reports.bound_check && r.bound_margin < -0.05 * r.bound)
            r.warnings.push_back("first-order amplitude exceeds 2 gamma / lambda");
    }

    if(cfg.reports.berry_check)
    {
        // closed loop: compare against the initial eigenvector, dynamical phase removed
        const cx_double a = psi0.dot(ode.state) * std::polar(1.0, lambda * p.phases.at_end(m0));
        r.geometric_phase = std::arg(a);
        const auto& sp = cfg.model.params;
        r.expected_geometric_phase = detail::wrap_phase(-pi * (1.0 - std::cos(sp.cone_angle)) * sp.revolutions);
    }
    return r;
}

inline RunResult run_single(const RunConfig& cfg)
{
    if(cfg.point_count() != 1)
        throw Error(ErrorKind::ValidationError, "run expects a single (lambda, duration) point; use sweep",
                    "lambda");
    return run_point(cfg, cfg.lambdas.front(), cfg.durations.front());
}

namespace detail {

inline ScalingReport report_from_points(const std::vector<RunResult>& pts, SweepAxis axis,
                                        bool secular, double lo, double hi)
{
    ScalingReport r;
    r.axis = axis == SweepAxis::lambda ? "lambda" : "duration";
    r.quantity = secular ? "|A~_m0^(2)(S)|" : "max_m envelope |A~_m^(1)|";
    for(const auto& p : pts)
    {
        if(!p.ok())
            continue;
        r.axis_values.push_back(axis == SweepAxis::lambda ? p.lambda : p.duration);
        r.gamma = std::max(r.gamma, p.gamma);
        if(secular)
        {
            const double mag = std::abs(p.eigenbasis_terms[2][static_cast<std::size_t>(p.m0)]);
            r.magnitudes.push_back(mag);
            r.secular_ratio.push_back(p.gamma > 0 ? mag / (p.duration * p.gamma * p.gamma / p.lambda) : 0.0);
        }
        else
        {
            r.magnitudes.push_back(p.first_order_envelope);
            r.bound_margins.push_back(p.bound_margin);
        }
    }
    finish_report(r, lo, hi);
    return r;
}

} // namespace detail

/// Independent parallel map over the sweep points. Each point is computed by
/// exactly one worker with no shared mutable state, so results do not depend
/// on the thread count. A failing point is recorded and the sweep continues.
inline SweepResult run_sweep(const RunConfig& cfg, unsigned threads = 0)
{
    struct Key {
        double lambda, duration;
    };
    std::vector<Key> keys;
    for(double l : cfg.lambdas)
        for(double s : cfg.durations)
            keys.push_back({l, s});
    if(keys.empty())
        throw Error(ErrorKind::ValidationError, "sweep has no points", "lambda");
    std::sort(keys.begin(), keys.end(), [](Key a, Key b) {
        return a.lambda != b.lambda ? a.lambda < b.lambda : a.duration < b.duration;
    });

    if(threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(keys.size()));

    std::vector<RunResult> results(keys.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for(std::size_t i = next++; i < keys.size(); i = next++)
        {
            try
            {
                results[i] = run_point(cfg, keys[i].lambda, keys[i].duration);
            }
            catch(const Error& e)
            {
                RunResult r;
                r.lambda = keys[i].lambda;
                r.duration = keys[i].duration;
                r.K = cfg.K;
                r.error = PointError{e.kind(), e.stage(), e.what()};
                results[i] = std::move(r);
            }
            catch(const std::exception& e)
            {
                RunResult r;
                r.lambda = keys[i].lambda;
                r.duration = keys[i].duration;
                r.K = cfg.K;
                r.error = PointError{ErrorKind::NumericalFailure, "", e.what()};
                results[i] = std::move(r);
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for(unsigned t = 1; t < threads; ++t)
            pool.emplace_back(worker);
        worker();
    }

    SweepResult out;
    out.axis = cfg.axis();
    out.points = std::move(results);
    out.failures = static_cast<std::size_t>(std::count_if(out.points.begin(), out.points.end(),
                                                          [](const RunResult& r) { return !r.ok(); }));
    if(out.axis != SweepAxis::none)
    {
        if(cfg.reports.scaling_fit && cfg.K >= 1 && out.axis == SweepAxis::lambda)
            out.first_order = detail::report_from_points(out.points, out.axis, false, -1.3, -0.7);
        if(cfg.reports.secular_probe)
        {
            const bool lambda_axis = out.axis == SweepAxis::lambda;
            out.secular = detail::report_from_points(out.points, out.axis, true,
                                                     lambda_axis ? -1.3 : 0.8, lambda_axis ? -0.7 : 1.2);
        }
    }
    return out;
}

struct EmitFormats {
    bool csv = true;
    bool json = true;
};

namespace detail {

inline std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json complex_json(cx_double z)
{
    return json::array({z.real(), z.imag()});
}

inline json report_json(const ScalingReport& r)
{
    json j;
    j["axis"] = r.axis;
    j["quantity"] = r.quantity;
    j["axis_values"] = r.axis_values;
    j["magnitudes"] = r.magnitudes;
    if(!r.bound_margins.empty())
        j["bound_margins"] = r.bound_margins;
    if(!r.secular_ratio.empty())
        j["secular_ratio"] = r.secular_ratio;
    j["gamma"] = r.gamma;
    j["null_case"] = r.null_case;
    if(r.fit)
        j["fit"] = {{"exponent", r.fit->exponent}, {"intercept", r.fit->intercept}, {"r2", r.fit->r2}};
    else
        j["fit"] = nullptr;
    j["consistent"] = r.consistent;
    return j;
}

inline void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if(!out)
        throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << text;
    if(!out)
        throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

} // namespace detail

/// One row per (lambda, S, level, order) with the eigenbasis term exp(-i lambda f_m) A~_m^(k).
inline std::string amplitudes_csv(const SweepResult& sweep)
{
    using detail::fmt17;
    std::string out = "lambda,duration,level,order,re,im,modulus,phase\n";
    for(const auto& p : sweep.points)
    {
        if(!p.ok())
            continue;
        for(int m = 0; m < p.dim; ++m)
            for(int k = 0; k <= p.K; ++k)
            {
                const cx_double z = p.eigenbasis_terms[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)];
                out += fmt17(p.lambda) + ',' + fmt17(p.duration) + ',' + std::to_string(m) + ','
                       + std::to_string(k) + ',' + fmt17(z.real()) + ',' + fmt17(z.imag()) + ','
                       + fmt17(std::abs(z)) + ',' + fmt17(std::arg(z)) + '\n';
            }
    }
    return out;
}

inline json summary_json(const SweepResult& sweep, const RunConfig& cfg)
{
    using detail::complex_json;
    json j;
    j["config_hash"] = config_hash(cfg);
    j["family"] = std::string(to_string(cfg.model.family));
    j["axis"] = sweep.axis == SweepAxis::none ? "none" : (sweep.axis == SweepAxis::lambda ? "lambda" : "duration");
    j["failures"] = sweep.failures;
    json points = json::array();
    for(const auto& p : sweep.points)
    {
        json q;
        q["lambda"] = p.lambda;
        q["duration"] = p.duration;
        if(!p.ok())
        {
            q["status"] = "error";
            q["error"] = {{"kind", std::string(to_string(p.error->kind))},
                          {"stage", p.error->stage},
                          {"message", p.error->message}};
            points.push_back(std::move(q));
            continue;
        }
        q["status"] = "ok";
        q["grid_intervals"] = p.grid_intervals;
        json eig = json::array();
        for(int m = 0; m < p.dim; ++m)
        {
            cx_double total{};
            for(int k = 0; k <= p.K; ++k)
                total += p.eigenbasis_terms[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)];
            eig.push_back(complex_json(total));
        }
        q["eigenbasis_amplitudes"] = eig;
        json exact = json::array();
        for(auto z : p.exact_moving)
            exact.push_back(complex_json(z));
        q["exact_moving_amplitudes"] = exact;
        q["truncation_residuals"] = p.truncation_residuals;
        q["oracle"] = {{"state_residual", p.oracle.state_residual},
                       {"ode_norm_drift", p.oracle.ode_drift},
                       {"slicing_norm_drift", p.oracle.slicing_drift},
                       {"insufficient_resolution", p.oracle.insufficient_resolution}};
        q["gamma"] = p.gamma;
        q["bound"] = p.bound;
        if(p.K >= 1)
        {
            q["bound_margin"] = p.bound_margin;
            q["first_order_envelope"] = p.first_order_envelope;
            json bt = json::array();
            for(auto z : p.boundary_terms)
                bt.push_back(complex_json(z));
            q["boundary_terms"] = bt;
            q["boundary_residual"] = p.boundary_residual;
        }
        if(p.geometric_phase)
        {
            q["geometric_phase"] = *p.geometric_phase;
            q["expected_geometric_phase"] = *p.expected_geometric_phase;
        }
        q["warnings"] = p.warnings;
        points.push_back(std::move(q));
    }
    j["points"] = std::move(points);
    if(sweep.first_order)
        j["first_order_scaling"] = detail::report_json(*sweep.first_order);
    if(sweep.secular)
        j["secular_probe"] = detail::report_json(*sweep.secular);
    return j;
}

struct RunMetadata {
    double wall_time_seconds = 0.0;
    unsigned threads = 1;
};

inline json manifest_json(const SweepResult& sweep, const RunConfig& cfg, const RunMetadata& meta)
{
    json j;
    j["tool"] = "adiabat";
    j["version"] = tool_version;
    j["config_hash"] = config_hash(cfg);
    j["config"] = cfg.canonical;
    json grids = json::array();
    for(const auto& p : sweep.points)
        grids.push_back({{"lambda", p.lambda}, {"duration", p.duration}, {"intervals", p.grid_intervals}});
    j["grid_sizes"] = grids;
    j["points"] = sweep.points.size();
    j["failures"] = sweep.failures;
    j["threads"] = meta.threads;
    j["wall_time_seconds"] = meta.wall_time_seconds;
    return j;
}

/// Writes amplitudes.csv, summary.json (per the requested formats) and
/// manifest.json into out_dir. Returns the written paths.
inline std::vector<std::filesystem::path> emit(const SweepResult& sweep, const RunConfig& cfg,
                                               const std::filesystem::path& out_dir,
                                               EmitFormats formats = {}, RunMetadata meta = {})
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if(ec)
        throw Error(ErrorKind::IoError, "cannot create " + out_dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;
    if(formats.csv)
    {
        written.push_back(out_dir / "amplitudes.csv");
        detail::write_file(written.back(), amplitudes_csv(sweep));
    }
    if(formats.json)
    {
        written.push_back(out_dir / "summary.json");
        detail::write_file(written.back(), summary_json(sweep, cfg).dump(2) + "\n");
    }
    written.push_back(out_dir / "manifest.json");
    detail::write_file(written.back(), manifest_json(sweep, cfg, meta).dump(2) + "\n");
    return written;
}

} // namespace adiabatic
